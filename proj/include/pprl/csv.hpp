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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pprl/core_model.hpp"

namespace pprl {

using CsvRow = std::vector<std::string>;

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// line breaks. Accepts LF or CRLF line endings.
std::vector<CsvRow> parse_csv(std::istream& in);
void write_csv_row(std::ostream& out, const CsvRow& row);

/// Reads a dataset whose first row names the fields. The column named
/// `id_field` (when present) supplies record ids; otherwise the 1-based row
/// number is used. Throws std::runtime_error on ragged rows or duplicate ids.
Dataset read_dataset(std::istream& in, const std::string& id_field = "id");
Dataset read_dataset_file(const std::string& path, const std::string& id_field = "id");

/// Writes records with the given column order; the id goes first.
void write_dataset(std::ostream& out, const Dataset& ds,
                   const std::vector<std::string>& columns,
                   const std::string& id_field = "id");
void write_dataset_file(const std::string& path, const Dataset& ds,
                        const std::vector<std::string>& columns,
                        const std::string& id_field = "id");

}  // namespace pprl
