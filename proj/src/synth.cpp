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

#include "pprl/synth.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

namespace pprl {

namespace {

const char* const kFirstNames[] = {
    "James",   "Mary",     "Robert",  "Patricia", "John",     "Jennifer", "Michael", "Linda",
    "David",   "Elizabeth", "William", "Barbara",  "Richard",  "Susan",    "Joseph",  "Jessica",
    "Thomas",  "Sarah",    "Charles", "Karen",    "Daniel",   "Lisa",     "Matthew", "Nancy",
    "Anthony", "Betty",    "Mark",    "Margaret", "Donald",   "Sandra",   "Steven",  "Ashley",
    "Paul",    "Kimberly", "Andrew",  "Emily",    "Joshua",   "Donna",    "Kenneth", "Michelle",
    "Kevin",   "Carol",    "Brian",   "Amanda",   "George",   "Dorothy",  "Timothy", "Melissa",
    "Ronald",  "Deborah",  "Edward",  "Stephanie", "Jason",   "Rebecca",  "Jeffrey", "Sharon",
    "Ryan",    "Laura",    "Jacob",   "Cynthia",  "Gary",     "Kathleen", "Nicholas", "Amy",
    "Eric",    "Angela",   "Jonathan", "Shirley", "Stephen",  "Anna",     "Larry",   "Brenda",
    "Justin",  "Pamela",   "Scott",   "Emma",     "Brandon",  "Nicole",   "Benjamin", "Helen",
    "Samuel",  "Samantha", "Gregory", "Katherine", "Alexander", "Christine", "Frank", "Debra",
    "Patrick", "Rachel",   "Raymond", "Carolyn",  "Jack",     "Janet",    "Dennis",  "Catherine",
    "Jerry",   "Maria",    "Tyler",   "Heather",  "Aaron",    "Diane",    "Jose",    "Ruth",
    "Adam",    "Julie",    "Nathan",  "Olivia",   "Henry",    "Joyce",    "Douglas", "Virginia",
    "Zachary", "Victoria", "Peter",   "Kelly",    "Kyle",     "Lauren",   "Ethan",   "Christina",
    "Walter",  "Joan",     "Noah",    "Evelyn",   "Jeremy",   "Judith",   "Christian", "Megan",
};

const char* const kLastNames[] = {
    "Smith",     "Johnson",  "Williams", "Brown",    "Jones",     "Garcia",   "Miller",
    "Davis",     "Rodriguez", "Martinez", "Hernandez", "Lopez",   "Gonzalez", "Wilson",
    "Anderson",  "Thomas",   "Taylor",   "Moore",    "Jackson",   "Martin",   "Lee",
    "Perez",     "Thompson", "White",    "Harris",   "Sanchez",   "Clark",    "Ramirez",
    "Lewis",     "Robinson", "Walker",   "Young",    "Allen",     "King",     "Wright",
    "Scott",     "Torres",   "Nguyen",   "Hill",     "Flores",    "Green",    "Adams",
    "Nelson",    "Baker",    "Hall",     "Rivera",   "Campbell",  "Mitchell", "Carter",
    "Roberts",   "Gomez",    "Phillips", "Evans",    "Turner",    "Diaz",     "Parker",
    "Cruz",      "Edwards",  "Collins",  "Reyes",    "Stewart",   "Morris",   "Morales",
    "Murphy",    "Cook",     "Rogers",   "Gutierrez", "Ortiz",    "Morgan",   "Cooper",
    "Peterson",  "Bailey",   "Reed",     "Kelly",    "Howard",    "Ramos",    "Kim",
    "Cox",       "Ward",     "Richardson", "Watson", "Brooks",    "Chavez",   "Wood",
    "James",     "Bennett",  "Gray",     "Mendoza",  "Ruiz",      "Hughes",   "Price",
    "Alvarez",   "Castillo", "Sanders",  "Patel",    "Myers",     "Long",     "Ross",
    "Foster",    "Jimenez",  "Powell",   "Jenkins",  "Perry",     "Russell",  "Sullivan",
    "Bell",      "Coleman",  "Butler",   "Henderson", "Barnes",   "Gonzales", "Fisher",
    "Vasquez",   "Simmons",  "Romero",   "Jordan",   "Patterson", "Alexander", "Hamilton",
    "Graham",    "Reynolds", "Griffin",  "Wallace",  "Moreno",    "West",     "Cole",
};

const char* const kStreets[] = {
    "Main",    "Oak",      "Pine",     "Maple",    "Cedar",    "Elm",      "Washington",
    "Lake",    "Hill",     "Walnut",   "Park",     "Sunset",   "Lincoln",  "Jackson",
    "Church",  "Highland", "Ridge",    "Meadow",   "Forest",   "River",    "Spring",
    "Willow",  "Chestnut", "Franklin", "Jefferson", "Madison", "Adams",    "Center",
    "Mill",    "Valley",   "Prospect", "Cherry",   "Dogwood",  "Hickory",  "Magnolia",
    "Birch",   "Holly",    "Laurel",   "Spruce",   "Sycamore", "Poplar",   "Aspen",
};

const char* const kSuffixes[] = {"Street", "Avenue", "Road", "Drive", "Lane",
                                 "Court",  "Place",  "Boulevard", "Way", "Terrace"};

struct City {
  const char* name;
  const char* state;
};

const City kCities[] = {
    {"Springfield", "IL"}, {"Portland", "OR"},     {"Austin", "TX"},      {"Denver", "CO"},
    {"Raleigh", "NC"},     {"Madison", "WI"},      {"Columbus", "OH"},    {"Richmond", "VA"},
    {"Salem", "MA"},       {"Albany", "NY"},       {"Boise", "ID"},       {"Tucson", "AZ"},
    {"Omaha", "NE"},       {"Tulsa", "OK"},        {"Fresno", "CA"},      {"Reno", "NV"},
    {"Durham", "NC"},      {"Lexington", "KY"},    {"Savannah", "GA"},    {"Dayton", "OH"},
    {"Spokane", "WA"},     {"Eugene", "OR"},       {"Akron", "OH"},       {"Provo", "UT"},
    {"Macon", "GA"},       {"Mobile", "AL"},       {"Lincoln", "NE"},     {"Topeka", "KS"},
    {"Trenton", "NJ"},     {"Hartford", "CT"},     {"Concord", "NH"},     {"Augusta", "ME"},
    {"Burlington", "VT"},  {"Charleston", "SC"},   {"Knoxville", "TN"},   {"Memphis", "TN"},
    {"Jackson", "MS"},     {"Baton Rouge", "LA"},  {"Little Rock", "AR"}, {"Des Moines", "IA"},
    {"Fargo", "ND"},       {"Sioux Falls", "SD"},  {"Billings", "MT"},    {"Cheyenne", "WY"},
    {"Santa Fe", "NM"},    {"Anchorage", "AK"},    {"Honolulu", "HI"},    {"Duluth", "MN"},
    {"Flint", "MI"},       {"Erie", "PA"},         {"Dover", "DE"},       {"Annapolis", "MD"},
    {"Orlando", "FL"},     {"Tampa", "FL"},        {"Wichita", "KS"},     {"Peoria", "IL"},
    {"Gary", "IN"},        {"Bangor", "ME"},       {"Ogden", "UT"},       {"Yuma", "AZ"},
};

const char* const kDomains[] = {"gmail.com",   "yahoo.com",   "outlook.com", "hotmail.com",
                                "aol.com",     "icloud.com",  "mail.com",    "proton.me",
                                "comcast.net", "verizon.net", "att.net",     "example.org"};

const char* const kUnitKinds[] = {"Apt", "Suite", "Unit", "Floor"};

template <typename T, size_t N>
const T& pick(const T (&arr)[N], std::mt19937_64& rng) {
  return arr[std::uniform_int_distribution<size_t>(0, N - 1)(rng)];
}

std::string digits(size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 9);
  std::string s;
  for (size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('0' + d(rng)));
  return s;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

const std::pair<const char*, const char*> kAbbreviations[] = {
    {"Street", "St"}, {"Avenue", "Ave"}, {"Road", "Rd"},      {"Drive", "Dr"},
    {"Lane", "Ln"},   {"Court", "Ct"},   {"Place", "Pl"},     {"Boulevard", "Blvd"},
    {"Terrace", "Ter"}, {"Apt", "#"},    {"Suite", "Ste"},
};

// Abbreviates or expands one known word; otherwise changes letter case.
std::string style_change(const std::string& s, std::mt19937_64& rng) {
  for (const auto& [full, abbr] : kAbbreviations) {
    auto pos = s.find(full);
    if (pos != std::string::npos) {
      return s.substr(0, pos) + abbr + s.substr(pos + std::string(full).size());
    }
  }
  return std::bernoulli_distribution(0.5)(rng) ? upper(s) : lower(s);
}

}  // namespace

const std::vector<std::string>& synth_fields() {
  static const std::vector<std::string> kFields = {
      "first_name",   "last_name", "email",   "email_domain", "address_number",
      "address_location", "address_line", "city", "state", "country",
      "zip_base",     "zip_ext",   "phone_area_code", "phone_exchange_code",
      "phone_line_number"};
  return kFields;
}

std::string apply_typo(const std::string& s, std::mt19937_64& rng) {
  if (s.empty()) return s;
  const int op = std::uniform_int_distribution<int>(s.size() >= 2 ? 0 : 1, 3)(rng);
  std::string out = s;
  switch (op) {
    case 0: {  // swap adjacent
      size_t i = std::uniform_int_distribution<size_t>(0, s.size() - 2)(rng);
      std::swap(out[i], out[i + 1]);
      break;
    }
    case 1: {  // drop
      if (s.size() < 2) return style_change(s, rng);
      size_t i = std::uniform_int_distribution<size_t>(0, s.size() - 1)(rng);
      out.erase(i, 1);
      break;
    }
    case 2: {  // duplicate
      size_t i = std::uniform_int_distribution<size_t>(0, s.size() - 1)(rng);
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(i), s[i]);
      break;
    }
    default:
      out = style_change(s, rng);
      break;
  }
  return out;
}

Record perturb(const Record& r, double rate, std::mt19937_64& rng) {
  Record out = r;
  std::bernoulli_distribution hit(rate);
  for (auto& [name, value] : out.fields) {
    if (hit(rng)) value = apply_typo(value, rng);
  }
  return out;
}

Record random_person(std::mt19937_64& rng) {
  Record r;
  const std::string first = pick(kFirstNames, rng);
  const std::string last = pick(kLastNames, rng);
  const City& city = pick(kCities, rng);
  auto& f = r.fields;
  f["first_name"] = first;
  f["last_name"] = last;
  std::string user;
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: user = lower(first) + "." + lower(last); break;
    case 1: user = lower(first.substr(0, 1)) + lower(last); break;
    case 2: user = lower(first) + "_" + lower(last.substr(0, 3)); break;
    default: user = lower(last) + lower(first.substr(0, 2)); break;
  }
  user += digits(std::uniform_int_distribution<size_t>(2, 4)(rng), rng);
  f["email"] = user;
  f["email_domain"] = pick(kDomains, rng);
  f["address_number"] = std::to_string(std::uniform_int_distribution<int>(1, 19999)(rng));
  f["address_location"] = std::string(pick(kStreets, rng)) + " " + pick(kSuffixes, rng);
  if (std::bernoulli_distribution(0.35)(rng)) {
    f["address_line"] = std::string(pick(kUnitKinds, rng)) + " " +
                        std::to_string(std::uniform_int_distribution<int>(1, 999)(rng));
  } else {
    f["address_line"] = "";
  }
  f["city"] = city.name;
  f["state"] = city.state;
  f["country"] = "USA";
  f["zip_base"] = digits(5, rng);
  f["zip_ext"] = digits(4, rng);
  f["phone_area_code"] = std::to_string(std::uniform_int_distribution<int>(201, 989)(rng));
  f["phone_exchange_code"] = std::to_string(std::uniform_int_distribution<int>(200, 999)(rng));
  f["phone_line_number"] = digits(4, rng);
  return r;
}

LinkageConfig synthetic_config(uint64_t seed) {
  LinkageConfig cfg;
  cfg.groups = {
      {"name", {"first_name", "last_name"}, 2, 1},
      {"email", {"email", "email_domain"}, 3, 1},
      {"address",
       {"address_number", "address_location", "address_line", "city", "state", "country",
        "zip_base", "zip_ext"},
       3,
       1},
      {"phone", {"phone_area_code", "phone_exchange_code", "phone_line_number"}, 2, 1},
  };
  cfg.lsh.bands = 45;
  cfg.lsh.rows = 10;
  Bytes label = {'p', 'p', 'r', 'l', '/', 's', 'e', 'e', 'd'};
  put_u64_be(label, seed);
  cfg.lsh.seed = sha256(label);
  cfg.threshold = 0.7;
  cfg.id_field = "id";
  return cfg;
}

SynthData generate_synthetic(const SynthOptions& opts) {
  if (opts.planted > opts.n) throw std::invalid_argument("planted must not exceed n");
  if (!(opts.typo_rate >= 0.0 && opts.typo_rate <= 1.0)) {
    throw std::invalid_argument("typo rate must be in [0, 1]");
  }
  std::mt19937_64 rng(opts.seed);
  SynthData out;

  // Distinct persons only: two unrelated rows never share email and phone.
  std::set<std::string> used;
  auto fresh = [&] {
    for (;;) {
      Record r = random_person(rng);
      std::string key = r.fields["email"] + "|" + r.fields["phone_line_number"] + "|" +
                        r.fields["zip_base"];
      if (used.insert(key).second) return r;
    }
  };

  std::vector<Record> a(opts.n);
  for (auto& r : a) r = fresh();
  std::vector<Record> b;
  b.reserve(opts.n);

  std::vector<size_t> a_order(opts.n);
  for (size_t i = 0; i < opts.n; ++i) a_order[i] = i;
  std::shuffle(a_order.begin(), a_order.end(), rng);
  std::vector<std::pair<size_t, size_t>> links;  // (a index, b index)
  for (size_t p = 0; p < opts.planted; ++p) {
    links.emplace_back(a_order[p], b.size());
    b.push_back(perturb(a[a_order[p]], opts.typo_rate, rng));
  }
  while (b.size() < opts.n) b.push_back(fresh());

  std::vector<size_t> b_order(b.size());
  for (size_t i = 0; i < b.size(); ++i) b_order[i] = i;
  std::shuffle(b_order.begin(), b_order.end(), rng);
  std::vector<size_t> b_pos(b.size());
  for (size_t i = 0; i < b_order.size(); ++i) b_pos[b_order[i]] = i;

  auto make_id = [](char side, size_t i) {
    std::string num = std::to_string(i + 1);
    return std::string(1, side) + "-" + std::string(num.size() < 6 ? 6 - num.size() : 0, '0') +
           num;
  };
  for (size_t i = 0; i < a.size(); ++i) {
    a[i].id = make_id('a', i);
    out.a.records.push_back(a[i]);
  }
  for (size_t i = 0; i < b_order.size(); ++i) {
    Record r = b[b_order[i]];
    r.id = make_id('b', i);
    out.b.records.push_back(std::move(r));
  }
  for (const auto& [ai, bi] : links) {
    out.truth.emplace_back(make_id('a', ai), make_id('b', b_pos[bi]));
  }
  std::sort(out.truth.begin(), out.truth.end());
  return out;
}

}  // namespace pprl
