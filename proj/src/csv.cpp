// Copyright 2026 The PPRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pprl/csv.hpp"

#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

namespace pprl {

std::vector<CsvRow> parse_csv(std::istream& in) {
  std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    if (row_has_content || row.size() > 1 || !row.front().empty()) {
      rows.push_back(std::move(row));
    }
    row.clear();
    row_has_content = false;
  };

  for (size_t i = 0; i < data.size(); ++i) {
    char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        break;
      case ',':
        end_field();
        row_has_content = true;
        break;
      case '\r':
        if (i + 1 < data.size() && data[i + 1] == '\n') ++i;
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) throw std::runtime_error("csv: unterminated quoted field");
  if (!field.empty() || !row.empty() || row_has_content) end_row();
  return rows;
}

void write_csv_row(std::ostream& out, const CsvRow& row) {
  for (size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    const std::string& f = row[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

Dataset read_dataset(std::istream& in, const std::string& id_field) {
  auto rows = parse_csv(in);
  Dataset ds;
  if (rows.empty()) return ds;
  const CsvRow& header = rows.front();
  int id_col = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] == id_field) id_col = static_cast<int>(c);
  }
  std::unordered_set<std::string> ids;
  for (size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.size() != header.size()) {
      throw std::runtime_error("csv: row " + std::to_string(r + 1) + " has " +
                               std::to_string(row.size()) + " fields, header has " +
                               std::to_string(header.size()));
    }
    Record rec;
    rec.id = id_col >= 0 ? row[id_col] : std::to_string(r);
    for (size_t c = 0; c < row.size(); ++c) {
      if (static_cast<int>(c) == id_col) continue;
      if (!rec.fields.emplace(header[c], row[c]).second) {
        throw std::runtime_error("csv: duplicate column '" + header[c] + "'");
      }
    }
    if (!ids.insert(rec.id).second) {
      throw std::runtime_error("csv: duplicate record id '" + rec.id + "'");
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset read_dataset_file(const std::string& path, const std::string& id_field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  return read_dataset(in, id_field);
}

void write_dataset(std::ostream& out, const Dataset& ds,
                   const std::vector<std::string>& columns, const std::string& id_field) {
  CsvRow header{id_field};
  header.insert(header.end(), columns.begin(), columns.end());
  write_csv_row(out, header);
  for (const auto& rec : ds.records) {
    CsvRow row{rec.id};
    for (const auto& col : columns) {
      const std::string* v = rec.field(col);
      row.push_back(v ? *v : std::string{});
    }
    write_csv_row(out, row);
  }
}

void write_dataset_file(const std::string& path, const Dataset& ds,
                        const std::vector<std::string>& columns,
                        const std::string& id_field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset '" + path + "'");
  write_dataset(out, ds, columns, id_field);
}

}  // namespace pprl
