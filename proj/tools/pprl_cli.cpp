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

// pprl: privacy-preserving record linkage command-line tool.
//
//   pprl generate --n 10000 --planted 100 --out-dir data
//   pprl run --role self-test --config data/config.json \
//            --dataset data/a.csv --peer-dataset data/b.csv --out matches.csv
//   pprl run --role receiver --listen 0.0.0.0:7000 ...   (first host)
//   pprl run --role sender --connect host:7000 ...       (second host)
//   pprl tune --bands 20 --rows 200
//   pprl bench --sizes 256,1024,4096
//   pprl score --matches matches.csv --truth data/truth.csv

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pprl/analysis.hpp"
#include "pprl/bench.hpp"
#include "pprl/config.hpp"
#include "pprl/csv.hpp"
#include "pprl/protocol.hpp"
#include "pprl/synth.hpp"
#include "pprl/tls.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pprl;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_truth(const std::string& path, const GroundTruth& truth) {
  auto out = open_out(path);
  write_csv_row(out, {"a_id", "b_id"});
  for (const auto& [a, b] : truth) write_csv_row(out, {a, b});
}

GroundTruth read_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read ground truth " + path);
  auto rows = parse_csv(in);
  GroundTruth truth;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 2) throw std::runtime_error("ground truth row " + std::to_string(i));
    truth.emplace_back(rows[i][0], rows[i][1]);
  }
  return truth;
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  SynthOptions opts;
  std::string out_dir = ".";
};

int cmd_generate(const GenerateArgs& args) {
  const SynthData data = generate_synthetic(args.opts);
  fs::create_directories(args.out_dir);
  std::vector<std::string> columns = synth_fields();
  write_dataset_file((fs::path(args.out_dir) / "a.csv").string(), data.a, columns);
  write_dataset_file((fs::path(args.out_dir) / "b.csv").string(), data.b, columns);
  write_truth((fs::path(args.out_dir) / "truth.csv").string(), data.truth);
  auto cfg_out = open_out((fs::path(args.out_dir) / "config.json").string());
  cfg_out << to_json(synthetic_config(args.opts.seed)) << '\n';
  std::cout << "wrote " << data.a.size() << " + " << data.b.size() << " records, "
            << data.truth.size() << " planted pairs to " << args.out_dir << '\n';
  return 0;
}

// --------------------------------------------------------------------- run

struct RunArgs {
  std::string role = "self-test";
  std::string variant = "base";
  std::string config;
  std::string dataset;
  std::string peer_dataset;
  std::string listen;
  std::string connect;
  TlsCredentials creds;
  int64_t timeout_ms = kDefaultIoTimeout.count();
  bool exact_jaccard = false;
  bool estimate_tau = false;
  uint64_t seed = 1;
  std::string out = "matches.csv";
  std::string peer_out;
  std::string manifest = "manifest.json";
};

/// Matches as CSV. `peer_ids` maps a peer block to a readable id when the
/// peer's data is at hand (self-test); otherwise the block number is used.
void write_matches(const std::string& path, const MatchResult& res, const LshParams& lsh,
                   const std::vector<std::string>* peer_ids) {
  auto out = open_out(path);
  if (res.match_count) {
    write_csv_row(out, {"match_count"});
    write_csv_row(out, {std::to_string(*res.match_count)});
    return;
  }
  std::set<std::string> revealed_fields;
  for (const auto& r : res.revealed) {
    for (const auto& [k, v] : r.fields) revealed_fields.insert(k);
  }
  std::map<size_t, double> exact;
  for (const auto& e : res.exact) exact[e.pair_index] = e.value();

  CsvRow header = {"local_id", "peer", "hits", "j_low", "j_high"};
  if (!res.exact.empty()) header.push_back("exact_jaccard");
  for (const auto& f : revealed_fields) header.push_back("peer." + f);

  std::vector<CsvRow> rows;
  for (size_t i = 0; i < res.pairs.size(); ++i) {
    const auto& p = res.pairs[i];
    const JaccardInterval iv = estimate_jaccard_interval(p.hits, lsh.bands, lsh.rows);
    CsvRow row = {p.local_id,
                  peer_ids ? (*peer_ids)[p.peer_block] : "block:" + std::to_string(p.peer_block),
                  std::to_string(p.hits), fmt(iv.lo), fmt(iv.hi)};
    if (!res.exact.empty()) row.push_back(exact.count(i) ? fmt(exact[i]) : "");
    for (const auto& f : revealed_fields) {
      const auto& fields = res.revealed[i].fields;
      auto it = fields.find(f);
      row.push_back(it == fields.end() ? "" : it->second);
    }
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end());
  write_csv_row(out, header);
  for (const auto& r : rows) write_csv_row(out, r);
}

json stats_json(const SessionStats& s) {
  return json{{"comm_kb", static_cast<double>(s.bytes_sent + s.bytes_received) / 1024.0},
              {"comm_time_s", s.comm_seconds},
              {"offline_time_s", s.offline_seconds},
              {"total_time_s", s.total_seconds},
              {"bytes_sent", s.bytes_sent},
              {"bytes_received", s.bytes_received}};
}

json result_json(const MatchResult& res) {
  json j{{"n_local", res.n_local}, {"n_peer", res.n_peer}};
  if (res.match_count) {
    j["match_count"] = *res.match_count;
  } else {
    j["matched_pairs"] = res.pairs.size();
    j["matched_records"] = res.matched_records();
  }
  if (!res.disclosed.empty()) j["disclosed_records"] = res.disclosed.size();
  return j;
}

std::vector<std::string> block_ids(const Dataset& ds, const MatchResult& res) {
  std::vector<std::string> ids;
  for (size_t idx : res.block_records) ids.push_back(ds.records[idx].id);
  return ids;
}

int cmd_run(const RunArgs& args) {
  const LinkageConfig linkage = load_config(args.config);
  const Dataset data = read_dataset_file(args.dataset, linkage.id_field);
  ProtocolConfig cfg;
  cfg.variant = parse_variant(args.variant);
  cfg.linkage = linkage;
  cfg.exact_jaccard = args.exact_jaccard;

  json manifest{{"config", args.config},     {"dataset", args.dataset},
                {"role", args.role},         {"variant", args.variant},
                {"output", args.out},        {"seed", args.seed},
                {"exact_jaccard", args.exact_jaccard}};
  MatchResult mine;

  if (args.role == "self-test") {
    if (args.peer_dataset.empty()) throw std::invalid_argument("self-test needs --peer-dataset");
    const Dataset peer = read_dataset_file(args.peer_dataset, linkage.id_field);
    manifest["peer_dataset"] = args.peer_dataset;
    const LoopbackOutcome out = run_loopback(data, peer, cfg);
    mine = out.sender;
    const auto peer_ids = block_ids(peer, out.receiver);
    write_matches(args.out, out.sender, linkage.lsh, &peer_ids);
    manifest["receiver"] = result_json(out.receiver);
    if (!args.peer_out.empty()) {
      const auto own_ids = block_ids(data, out.sender);
      write_matches(args.peer_out, out.receiver, linkage.lsh, &own_ids);
      manifest["peer_output"] = args.peer_out;
    }
  } else {
    const Role role = args.role == "sender"     ? Role::kSender
                      : args.role == "receiver" ? Role::kReceiver
                                                : throw std::invalid_argument(
                                                      "role must be sender, receiver or self-test");
    const TlsCredentials creds = credentials_from_env(args.creds, true);
    const Timeout timeout(args.timeout_ms);
    std::unique_ptr<Channel> ch;
    if (!args.listen.empty()) {
      auto [host, port] = parse_endpoint(args.listen);
      TlsListener listener(host, port, creds);
      std::cerr << "listening on " << host << ':' << listener.port() << '\n';
      ch = listener.accept(timeout, timeout);
      manifest["endpoint"] = args.listen;
    } else if (!args.connect.empty()) {
      auto [host, port] = parse_endpoint(args.connect);
      ch = tls_connect(host, port, creds, timeout);
      manifest["endpoint"] = args.connect;
    } else {
      throw std::invalid_argument("--listen or --connect is required for a networked run");
    }
    mine = run_party(role, data, cfg, *ch);
    ch->close();
    if (role == Role::kReceiver && mine.pairs.empty() && !mine.match_count &&
        cfg.variant != Variant::kMutual) {
      auto out = open_out(args.out);
      write_csv_row(out, {"peer_records", "disclosed_records"});
      write_csv_row(out, {std::to_string(mine.n_peer), std::to_string(mine.disclosed.size())});
    } else {
      write_matches(args.out, mine, linkage.lsh, nullptr);
    }
  }

  manifest["result"] = result_json(mine);
  manifest["report"] = stats_json(mine.stats);
  if (args.estimate_tau) {
    FalsePositiveOptions fp;
    fp.seed = args.seed;
    const auto est =
        estimate_false_positive_rate(data, linkage.groups, linkage.lsh, linkage.threshold, fp);
    manifest["tau_hat"] = est.tau;
    manifest["tau_samples"] = est.negatives;
    const size_t matched = mine.match_count.value_or(mine.matched_records());
    manifest["leakage_estimate"] = leakage_bound(est.tau, matched, mine.n_peer);
  }
  auto mout = open_out(args.manifest);
  mout << manifest.dump(2) << '\n';
  std::cout << manifest["result"].dump() << '\n';
  return 0;
}

// -------------------------------------------------------------------- tune

struct TuneArgs {
  CurveSpec target;
  TuneBounds bounds;
  double epsilon = 0.05;
  double step = 0.01;
  std::string curve_out;
};

int cmd_tune(const TuneArgs& args) {
  const TuneResult r = tune_parameters(args.target, args.bounds, args.epsilon, args.step);
  if (!r.feasible) {
    std::cout << "infeasible: no (B, R) within bounds meets epsilon " << args.epsilon << '\n';
    return 2;
  }
  std::cout << "bands=" << r.spec.bands << "\nrows=" << r.spec.rows
            << "\nmax_error=" << fmt(r.max_error)
            << "\ncurve_threshold=" << fmt(curve_threshold(r.spec.bands, r.spec.rows))
            << "\ntarget_threshold=" << fmt(curve_threshold(args.target.bands, args.target.rows))
            << "\nhashes=" << r.spec.bands * r.spec.rows
            << " (target " << args.target.bands * args.target.rows << ")\n";
  if (!args.curve_out.empty()) {
    auto out = open_out(args.curve_out);
    write_curve_csv(out, r.spec.bands, r.spec.rows, args.step);
  }
  return 0;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<size_t> sizes = {256, 1024, 4096};
  std::string config;
  uint32_t bands = 20;
  uint32_t rows = 5;
  uint64_t seed = 1;
  std::string out;
};

int cmd_bench(const BenchArgs& args) {
  LinkageConfig linkage = args.config.empty() ? synthetic_config(args.seed)
                                              : load_config(args.config);
  if (args.config.empty()) {
    linkage.lsh.bands = args.bands;
    linkage.lsh.rows = args.rows;
  }
  std::vector<BenchRow> rows;
  write_bench_csv(std::cout, {});
  for (size_t n : args.sizes) {
    rows.push_back(bench_once(n, linkage, args.seed));
    const auto& r = rows.back();
    std::cout << r.set_size << ',' << r.comm_kb << ',' << r.comm_seconds << ','
              << r.offline_seconds << ',' << r.total_seconds << ',' << r.matched << std::endl;
  }
  if (!args.out.empty()) {
    auto out = open_out(args.out);
    write_bench_csv(out, rows);
  }
  return 0;
}

// ------------------------------------------------------------------- score

struct ScoreArgs {
  std::string matches;
  std::string truth;
  int64_t hits = -1;
  uint32_t bands = 0;
  uint32_t rows = 0;
  double confidence = 0.95;
};

int cmd_score(const ScoreArgs& args) {
  if (args.hits >= 0) {
    const auto iv = estimate_jaccard_interval(static_cast<uint32_t>(args.hits), args.bands,
                                              args.rows, args.confidence);
    std::cout << "j_low=" << fmt(iv.lo) << "\nj_high=" << fmt(iv.hi) << '\n';
    return 0;
  }
  if (args.matches.empty()) throw std::invalid_argument("score needs --matches or --hits");
  std::ifstream in(args.matches, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + args.matches);
  const auto rows = parse_csv(in);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "local_id") {
    throw std::runtime_error(args.matches + " is not a pair listing");
  }
  const auto& header = rows[0];
  const auto exact_col = std::find(header.begin(), header.end(), "exact_jaccard");
  std::vector<std::pair<std::string, std::string>> reported;
  double exact_sum = 0;
  size_t exact_n = 0;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][1].rfind("block:", 0) == 0) {
      throw std::runtime_error("matches carry peer block numbers, not ids; score a self-test run");
    }
    reported.emplace_back(rows[i][0], rows[i][1]);
    if (exact_col != header.end()) {
      const auto& cell = rows[i][static_cast<size_t>(exact_col - header.begin())];
      if (!cell.empty()) {
        exact_sum += std::stod(cell);
        ++exact_n;
      }
    }
  }
  std::optional<GroundTruth> truth;
  if (!args.truth.empty()) truth = read_truth(args.truth);
  const AccuracyReport report = evaluate_accuracy(reported, truth);
  std::cout << report.to_text();
  if (exact_n) std::cout << "mean_exact_jaccard=" << fmt(exact_sum / exact_n) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving record linkage with LSH and DH-PSI"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate two synthetic datasets with planted matches");
  g->add_option("--n", gen.opts.n, "Records per dataset")->capture_default_str();
  g->add_option("--planted", gen.opts.planted, "Entities present in both")->capture_default_str();
  g->add_option("--typo-rate", gen.opts.typo_rate, "Per-field perturbation probability")
      ->capture_default_str();
  g->add_option("--seed", gen.opts.seed, "Generator seed")->capture_default_str();
  g->add_option("--out-dir", gen.out_dir, "Output directory")->capture_default_str();

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run one protocol role, or both over loopback");
  r->add_option("--role", run.role, "sender, receiver or self-test")
      ->check(CLI::IsMember({"sender", "receiver", "self-test"}))
      ->capture_default_str();
  r->add_option("--variant", run.variant, "base, mutual, count or revealing")
      ->check(CLI::IsMember({"base", "mutual", "count", "revealing"}))
      ->capture_default_str();
  r->add_option("--config", run.config, "Linkage config (JSON)")->required();
  r->add_option("--dataset", run.dataset, "Local dataset (CSV)")->required();
  r->add_option("--peer-dataset", run.peer_dataset, "Peer dataset, self-test only");
  r->add_option("--listen", run.listen, "host:port to accept the peer on");
  r->add_option("--connect", run.connect, "host:port of the listening peer");
  r->add_option("--cert", run.creds.cert_file, "PEM certificate (env PPRL_TLS_CERT)");
  r->add_option("--key", run.creds.key_file, "PEM private key (env PPRL_TLS_KEY)");
  r->add_option("--ca", run.creds.ca_file, "PEM CA bundle for the peer (env PPRL_TLS_CA)");
  r->add_option("--timeout-ms", run.timeout_ms, "Network timeout")->capture_default_str();
  r->add_flag("--exact-jaccard", run.exact_jaccard, "Cardinality PSI per matched pair");
  r->add_flag("--estimate-tau", run.estimate_tau, "Estimate tau and the leakage bound");
  r->add_option("--seed", run.seed, "Seed recorded in the manifest and used for tau")
      ->capture_default_str();
  r->add_option("--out", run.out, "Matches output (CSV)")->capture_default_str();
  r->add_option("--peer-out", run.peer_out, "Self-test: the receiver's output (CSV)");
  r->add_option("--manifest", run.manifest, "Run manifest (JSON)")->capture_default_str();

  TuneArgs tune;
  auto* t = app.add_subcommand("tune", "Find the smallest B that approximates a target curve");
  t->add_option("--bands", tune.target.bands, "Target B")->required();
  t->add_option("--rows", tune.target.rows, "Target R")->required();
  t->add_option("--threshold", tune.target.threshold, "Target Jaccard threshold")
      ->capture_default_str();
  t->add_option("--epsilon", tune.epsilon, "Max curve deviation")->capture_default_str();
  t->add_option("--step", tune.step, "Jaccard grid step")->capture_default_str();
  t->add_option("--max-bands", tune.bounds.max_bands)->capture_default_str();
  t->add_option("--max-rows", tune.bounds.max_rows)->capture_default_str();
  t->add_option("--curve-out", tune.curve_out, "Write the recommended curve (CSV)");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Loopback performance table over set sizes");
  b->add_option("--sizes", bench.sizes, "Set sizes")->delimiter(',')->capture_default_str();
  b->add_option("--config", bench.config, "Linkage config; default is the synthetic one");
  b->add_option("--bands", bench.bands)->capture_default_str();
  b->add_option("--rows", bench.rows)->capture_default_str();
  b->add_option("--seed", bench.seed)->capture_default_str();
  b->add_option("--out", bench.out, "Also write the table here (CSV)");

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Accuracy of a self-test run, or one Jaccard interval");
  s->add_option("--matches", score.matches, "Matches CSV with peer ids");
  s->add_option("--truth", score.truth, "Ground truth CSV (a_id,b_id)");
  s->add_option("--hits", score.hits, "Band hits h for an interval");
  s->add_option("--bands", score.bands);
  s->add_option("--rows", score.rows);
  s->add_option("--confidence", score.confidence)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) return cmd_generate(gen);
    if (*r) return cmd_run(run);
    if (*t) return cmd_tune(tune);
    if (*b) return cmd_bench(bench);
    if (*s) return cmd_score(score);
  } catch (const ProtocolError& e) {
    std::cerr << "session aborted (code " << static_cast<int>(e.code()) << "): " << e.what()
              << '\n';
    return 10 + static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
