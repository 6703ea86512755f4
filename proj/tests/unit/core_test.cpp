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

#include <gtest/gtest.h>

#include <sstream>
#include <stdexcept>

#include "pprl/bytes.hpp"
#include "pprl/config.hpp"
#include "pprl/core_model.hpp"
#include "pprl/csv.hpp"

using namespace pprl;

TEST(Bytes, Sha256KnownAnswer) {
  EXPECT_EQ(to_hex(sha256("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Bytes, HmacSha256Rfc4231Case2) {
  const std::string key = "Jefe";
  const std::string msg = "what do ya want for nothing?";
  EXPECT_EQ(to_hex(hmac_sha256(as_bytes(key), as_bytes(msg))),
            "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST(Bytes, HexRoundTripAndRejects) {
  const Bytes b = {0x00, 0xab, 0xff, 0x10};
  EXPECT_EQ(from_hex(to_hex(b)), b);
  EXPECT_EQ(from_hex("ABff"), (Bytes{0xab, 0xff}));
  EXPECT_THROW(from_hex("abc"), std::invalid_argument);
  EXPECT_THROW(from_hex("zz"), std::invalid_argument);
}

TEST(Bytes, BigEndianHelpers) {
  Bytes out;
  put_u16_be(out, 0x0102);
  put_u32_be(out, 0x03040506);
  put_u64_be(out, 0x0708090a0b0c0d0eULL);
  ASSERT_EQ(out.size(), 14u);
  EXPECT_EQ(out[0], 0x01);
  EXPECT_EQ(out[13], 0x0e);
  EXPECT_EQ(get_u16_be(out.data()), 0x0102);
  EXPECT_EQ(get_u32_be(out.data() + 2), 0x03040506u);
  EXPECT_EQ(get_u64_be(out.data() + 6), 0x0708090a0b0c0d0eULL);
}

TEST(Bytes, SecureRandomDiffers) {
  std::array<uint8_t, 32> a{}, b{};
  secure_random(a);
  secure_random(b);
  EXPECT_NE(a, b);
  SecureRng rng;
  EXPECT_NE(rng(), rng());
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_text("Sunset Blvd, Los Angeles"), "sunset blvd los angeles");
  EXPECT_EQ(normalize_text("  A--B  c "), "ab c");
  EXPECT_EQ(normalize_text(""), "");
  EXPECT_EQ(normalize_text(" ,,, "), "");
  EXPECT_EQ(normalize_text("Apt 4B\t\n12"), "apt 4b 12");
}

TEST(Normalize, Idempotent) {
  for (const char* s : {"Sunset Blvd, Los Angeles", "  A--B  c ", "O'Brien-Smith", "x\ty\nz",
                        "Zoë  Ärger", "123 MAIN ST."}) {
    const std::string once = normalize_text(s);
    EXPECT_EQ(normalize_text(once), once) << s;
  }
}

TEST(Normalize, KeepsNonAsciiLetters) {
  const std::string n = normalize_text("Zoë");
  EXPECT_EQ(utf8_units(n).size(), 3u);
}

TEST(Utf8, Units) {
  const auto u = utf8_units("aé€😀");
  ASSERT_EQ(u.size(), 4u);
  EXPECT_EQ(u[1], "é");
  EXPECT_EQ(u[3].size(), 4u);
  // A lone continuation byte is kept as one unit.
  EXPECT_EQ(utf8_units(std::string("a\x80" "b")).size(), 3u);
}

namespace {

std::vector<FieldGroupSpec> two_groups() {
  return {{"name", {"first", "last"}, 2, 1}, {"city", {"city"}, 3, 2}};
}

Record rec(std::string id, std::string first, std::string last, std::string city) {
  Record r;
  r.id = std::move(id);
  r.fields = {{"first", first}, {"last", last}, {"city", city}, {"extra", "ignored"}};
  return r;
}

}  // namespace

TEST(Specs, Validation) {
  EXPECT_NO_THROW(validate_specs(two_groups()));
  EXPECT_THROW(validate_specs({{"a", {"x"}, 3, 1}, {"b", {"x"}, 3, 1}}), std::invalid_argument);
  EXPECT_THROW(validate_specs({{"a", {}, 3, 1}}), std::invalid_argument);
  EXPECT_THROW(validate_specs({{"a", {"x"}, 0, 1}}), std::invalid_argument);
  EXPECT_THROW(validate_specs({{"a", {"x"}, 3, 0}}), std::invalid_argument);
}

TEST(Preprocess, DropsUngroupedAndFillsMissing) {
  Record r;
  r.id = "r1";
  r.fields = {{"first", "  JOHN "}, {"extra", "x"}};
  const Record p = preprocess(r, two_groups());
  EXPECT_EQ(p.id, "r1");
  EXPECT_EQ(p.fields.size(), 3u);
  EXPECT_EQ(*p.field("first"), "john");
  EXPECT_EQ(*p.field("last"), "");
  EXPECT_EQ(p.field("extra"), nullptr);
}

TEST(Dedup, FirstOfEachClassWins) {
  Dataset ds;
  ds.records = {rec("1", "John", "Doe", "LA"), rec("2", "john", "DOE", "L.A."),
                rec("3", "Jane", "Doe", "LA"), rec("4", "JOHN", "doe", "la")};
  const Dataset d = deduplicate(ds, two_groups());
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.records[0].id, "1");
  EXPECT_EQ(d.records[1].id, "3");
  EXPECT_EQ(dedup_key(ds.records[0], two_groups()), dedup_key(ds.records[3], two_groups()));
  // The group boundary is part of the key.
  EXPECT_NE(dedup_key(rec("a", "ab", "c", ""), two_groups()),
            dedup_key(rec("b", "a", "bc", ""), two_groups()));
}

TEST(MatchResultTest, Aggregates) {
  MatchResult r;
  r.pairs = {{0, "a", 3, 2}, {0, "a", 5, 1}, {2, "c", 3, 4}};
  EXPECT_EQ(r.matched_records(), 2u);
  EXPECT_EQ(r.record_hits(0), 3u);
  EXPECT_EQ(r.record_hits(2), 4u);
  EXPECT_EQ(r.record_hits(1), 0u);
  ExactJaccard e{0, 15, 19, 18};
  EXPECT_DOUBLE_EQ(e.value(), 15.0 / 22.0);
}

TEST(Csv, QuotedFieldsAndCrlf) {
  std::istringstream in("id,name,note\r\n1,\"Doe, John\",\"say \"\"hi\"\"\"\r\n2,Ann,\"two\nlines\"\n");
  const auto rows = parse_csv(in);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][1], "Doe, John");
  EXPECT_EQ(rows[1][2], "say \"hi\"");
  EXPECT_EQ(rows[2][2], "two\nlines");
}

TEST(Csv, DatasetRoundTrip) {
  Dataset ds;
  ds.records = {rec("x1", "A, b", "q\"t", "c\nd"), rec("x2", "", "", "")};
  std::ostringstream out;
  write_dataset(out, ds, {"first", "last", "city", "extra"});
  std::istringstream in(out.str());
  const Dataset back = read_dataset(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.records[0], ds.records[0]);
  EXPECT_EQ(back.records[1], ds.records[1]);
}

TEST(Csv, RejectsRaggedAndDuplicateIds) {
  std::istringstream ragged("id,a\n1,x,y\n");
  EXPECT_THROW(read_dataset(ragged), std::runtime_error);
  std::istringstream dup("id,a\n1,x\n1,y\n");
  EXPECT_THROW(read_dataset(dup), std::runtime_error);
}

TEST(Csv, RowNumberIdsWithoutIdColumn) {
  std::istringstream in("a,b\nx,y\nz,w\n");
  const Dataset ds = read_dataset(in);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.records[0].id, "1");
  EXPECT_EQ(ds.records[1].id, "2");
}

TEST(Config, JsonRoundTripAndDigests) {
  const std::string text = R"({
    "id_field": "rid", "threshold": 0.6,
    "lsh": {"bands": 20, "rows": 5,
            "seed": "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f"},
    "groups": [{"name": "name", "fields": ["first", "last"], "k": 2, "w": 2},
               {"name": "city", "fields": ["city"], "k": 3}]})";
  const LinkageConfig c = parse_config(text);
  EXPECT_EQ(c.id_field, "rid");
  EXPECT_EQ(c.lsh.bands, 20u);
  EXPECT_EQ(c.groups[0].w, 2u);
  EXPECT_EQ(c.groups[1].w, 1u);
  EXPECT_EQ(c.lsh.seed[31], 0x1f);
  const LinkageConfig back = parse_config(to_json(c));
  EXPECT_EQ(back.params_digest(), c.params_digest());
  EXPECT_EQ(back.spec_digest(), c.spec_digest());

  LinkageConfig other = c;
  other.lsh.rows = 6;
  EXPECT_NE(other.params_digest(), c.params_digest());
  EXPECT_EQ(other.spec_digest(), c.spec_digest());
  other = c;
  other.groups[0].k = 3;
  EXPECT_NE(other.spec_digest(), c.spec_digest());
  EXPECT_EQ(other.params_digest(), c.params_digest());
}

TEST(Config, Rejects) {
  EXPECT_THROW(parse_config("{"), std::runtime_error);
  EXPECT_THROW(parse_config(R"({"lsh": {"bands": 0, "rows": 5, "seed": "00"}, "groups": []})"),
               std::exception);
  const std::string short_seed =
      R"({"threshold": 0.5, "lsh": {"bands": 2, "rows": 2, "seed": "0011"},
          "groups": [{"name": "a", "fields": ["x"], "k": 2}]})";
  EXPECT_THROW(parse_config(short_seed), std::runtime_error);
}
