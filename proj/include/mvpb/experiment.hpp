// Copyright 2026 The mvpb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// End-to-end runs (split -> forests -> cache -> minimise -> certify) and the
// versioned JSON run-report format consumed by `mvpb report`.

#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mvpb/bounds.hpp"
#include "mvpb/data.hpp"
#include "mvpb/optimize.hpp"
#include "mvpb/voters.hpp"

namespace mvpb {

inline constexpr int kReportSchema = 1;

/// Which voters a run uses: all views, a single view, or all views joined.
struct RunMode {
  enum class Kind { multiview, single_view, concat } kind = Kind::multiview;
  std::size_t view = 0;

  std::string str() const {
    switch (kind) {
      case Kind::multiview: return "multiview";
      case Kind::concat: return "concat";
      case Kind::single_view: return "view_" + std::to_string(view + 1);
    }
    return "?";
  }
  static RunMode parse(const std::string& s) {
    if (s == "multiview") return {};
    if (s == "concat") return {Kind::concat, 0};
    if (s.starts_with("view_")) return {Kind::single_view, std::stoul(s.substr(5)) - 1};
    throw Error("unknown run mode '" + s + "'");
  }
};

struct RunConfig {
  DivergenceSpec divergence;
  double test_fraction = 0.2;
  double labeled_fraction = 1.0;
  int n_trees = 100;
  int max_depth = 1;
  OptimConfig optim;
  double delta = 0.05;
};

struct RunRecord {
  BoundKind kind = BoundKind::K;
  RunMode mode;
  std::uint64_t seed = 0;
  BoundReport report;
  double wall_time_s = 0.0;
};

/// Split, forests and prediction cache for one seed and mode.
struct PreparedRun {
  MultiViewDataset train;
  MultiViewDataset test;
  PredictionCache cache;
};

inline PreparedRun prepare(const MultiViewDataset& ds, const RunConfig& cfg, RunMode mode, std::uint64_t seed) {
  const SplitResult sp = split(ds, SplitSpec{seed, cfg.test_fraction, cfg.labeled_fraction});
  PreparedRun run;
  switch (mode.kind) {
    case RunMode::Kind::multiview:
      run.train = sp.train;
      run.test = sp.test;
      break;
    case RunMode::Kind::single_view:
      run.train = single_view(sp.train, mode.view);
      run.test = single_view(sp.test, mode.view);
      break;
    case RunMode::Kind::concat:
      run.train = concat_views(sp.train);
      run.test = concat_views(sp.test);
      break;
  }
  std::vector<ViewEnsemble> forests;
  for (std::size_t v = 0; v < run.train.num_views(); ++v)
    forests.push_back(train_forest(run.train.views[v], run.train.labels, ds.num_classes,
                                   ForestConfig{cfg.n_trees, cfg.max_depth, seed, true}, v));
  run.cache = predict_cache(forests, ds.num_classes, run.train.views, run.train.unlabeled_views, run.test.views);
  return run;
}

/// Builds the problem view of a prepared run (points into `run.cache`).
inline TrainingProblem problem_of(const PreparedRun& run, double delta) {
  TrainingProblem pb;
  pb.cache = &run.cache;
  pb.labels = run.train.labels;
  pb.test_labels = run.test.labels;
  pb.priors = Priors::uniform(run.cache.voters_per_view());
  pb.delta = delta;
  return pb;
}

/// Single-view and concatenated baselines use KL, multi-view runs the configured divergence.
inline DivergenceSpec divergence_for(RunMode mode, const DivergenceSpec& configured) {
  return mode.kind == RunMode::Kind::multiview ? configured : DivergenceSpec{DivergenceMode::kl, 1.1};
}

inline RunRecord run_once(const MultiViewDataset& ds, const RunConfig& cfg, BoundKind kind, RunMode mode,
                          std::uint64_t seed) {
  require_kind_valid(kind, ds.num_classes);
  const auto t0 = std::chrono::steady_clock::now();
  const PreparedRun run = prepare(ds, cfg, mode, seed);
  const TrainingProblem pb = problem_of(run, cfg.delta);
  OptimConfig oc = cfg.optim;
  oc.seed = seed;
  RunRecord rec;
  rec.kind = kind;
  rec.mode = mode;
  rec.seed = seed;
  rec.report = minimize(kind, pb, divergence_for(mode, cfg.divergence), oc).report;
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// ---------------------------------------------------------------------------
// Worker pool

/// Runs `tasks` tasks on at most `workers` threads; task i writes only its own slot.
inline void run_pool(std::size_t tasks, unsigned workers, const std::function<void(std::size_t)>& task) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(tasks, 1))));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks; i = next++) task(i);
  };
  if (workers == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// JSON reports

inline nlohmann::json nan_to_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

inline nlohmann::json to_json(const RunRecord& r) {
  const auto& b = r.report;
  return {
      {"kind", std::string(to_string(r.kind))},
      {"mode", r.mode.str()},
      {"seed", r.seed},
      {"certified_bound", b.certified_value},
      {"raw_bound", b.raw_value},
      {"gibbs", b.stats.gibbs},
      {"joint", b.stats.joint},
      {"disagreement", b.stats.disagreement},
      {"m", b.stats.m},
      {"n", b.stats.n},
      {"mv_train_risk", b.mv_train_risk},
      {"mv_test_risk", nan_to_null(b.mv_test_risk)},
      {"rho", b.rho},
      {"divergence_mode", b.divergence.str()},
      {"alpha", b.alpha},
      {"view_alpha", b.view_alpha},
      {"lambda", b.lambda},
      {"lambda1", b.lambda1},
      {"lambda2", b.lambda2},
      {"gamma", b.gamma},
      {"psi_r", b.psi.psi_r},
      {"psi_e", b.psi.psi_e},
      {"psi_d", b.psi.psi_d},
      {"divergence", b.psi.divergence},
      {"kl_gibbs_upper", b.inverted.gibbs_upper},
      {"kl_joint_upper", b.inverted.joint_upper},
      {"kl_dis_lower", b.inverted.dis_lower},
      {"trace_length", b.trace.size()},
      {"initial_objective", b.initial_objective},
      {"final_objective", b.final_objective},
      {"converged", b.converged},
      {"wall_time_s", r.wall_time_s},
      {"notes", b.notes},
  };
}

inline double json_number(const nlohmann::json& j, const char* key) {
  const auto& x = j.at(key);
  return x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>();
}

struct MeanRow {
  std::string kind;
  std::string mode;
  std::size_t runs = 0;
  std::map<std::string, double> means;
};

inline const std::vector<std::string>& mean_fields() {
  static const std::vector<std::string> f{"certified_bound", "gibbs",         "joint",       "disagreement",
                                          "mv_train_risk",   "mv_test_risk"};
  return f;
}

/// Arithmetic means of each numeric field per (kind, mode), in first-seen order.
/// Missing (null) values are skipped field-wise.
inline std::vector<MeanRow> aggregate(const nlohmann::json& runs) {
  std::vector<MeanRow> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::map<std::string, std::pair<CompensatedSum, std::size_t>>> acc;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.at("kind").get<std::string>(), r.at("mode").get<std::string>());
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      rows.push_back(MeanRow{key.first, key.second, 0, {}});
      acc.emplace_back();
    }
    ++rows[it->second].runs;
    for (const auto& f : mean_fields()) {
      const double x = json_number(r, f.c_str());
      if (std::isnan(x)) continue;
      auto& slot = acc[it->second][f];
      slot.first.add(x);
      ++slot.second;
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& f : mean_fields()) {
      auto it = acc[i].find(f);
      rows[i].means[f] = (it == acc[i].end() || it->second.second == 0)
                             ? std::numeric_limits<double>::quiet_NaN()
                             : it->second.first.value() / static_cast<double>(it->second.second);
    }
  return rows;
}

struct ReportHeader {
  std::string dataset;
  int classes = 0;
  std::size_t views = 0;
  nlohmann::json config = nlohmann::json::object();
};

inline nlohmann::json make_report(const ReportHeader& h, const std::vector<RunRecord>& records,
                                  const nlohmann::json& failed = nlohmann::json::array()) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : records) runs.push_back(to_json(r));
  nlohmann::json means = nlohmann::json::array();
  for (const auto& row : aggregate(runs)) {
    nlohmann::json m{{"kind", row.kind}, {"mode", row.mode}, {"runs", row.runs}};
    for (const auto& [k, v] : row.means) m[k] = nan_to_null(v);
    means.push_back(std::move(m));
  }
  return {{"schema", kReportSchema}, {"dataset", h.dataset}, {"classes", h.classes}, {"views", h.views},
          {"config", h.config},      {"runs", runs},         {"means", means},       {"failed", failed}};
}

/// Canonical serialisation: parse(serialise(j)) re-serialises byte-identically.
inline std::string serialize_report(const nlohmann::json& report) { return report.dump(2) + "\n"; }

inline nlohmann::json parse_report(const std::string& text, const std::string& origin = "<report>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(origin + ": " + e.what());
  }
  require(j.is_object() && j.contains("schema") && j.at("schema") == kReportSchema,
          origin + ": unsupported report schema");
  for (const char* key : {"classes", "views", "runs"}) require(j.contains(key), origin + ": missing '" + key + "'");
  return j;
}

inline nlohmann::json read_report(const std::filesystem::path& file) {
  std::ifstream in(file);
  require(static_cast<bool>(in), "missing report file: " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str(), file.string());
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  require(static_cast<bool>(out), "cannot write " + file.string());
  out << text;
}

/// Wide CSV (rows = bound kinds; per mode Bnd / G / B columns) plus plot series,
/// from one or more run reports over the same class count.
struct WideTable {
  std::string csv;
  nlohmann::json series;
};

inline WideTable summarize_reports(const std::vector<nlohmann::json>& reports) {
  require(!reports.empty(), "report: need at least one run file");
  const int classes = reports.front().at("classes").get<int>();
  nlohmann::json all_runs = nlohmann::json::array();
  for (const auto& r : reports) {
    require(r.at("classes").get<int>() == classes, "report: schema mismatch (runs with different class counts)");
    for (const auto& run : r.at("runs")) all_runs.push_back(run);
  }
  const auto rows = aggregate(all_runs);

  // column groups: single views in order, then concat, then multiview
  std::vector<std::string> modes;
  for (const auto& row : rows)
    if (std::find(modes.begin(), modes.end(), row.mode) == modes.end()) modes.push_back(row.mode);
  auto rank = [](const std::string& m) {
    if (m.starts_with("view_")) return std::make_pair(0, std::stoi(m.substr(5)));
    return std::make_pair(m == "concat" ? 1 : 2, 0);
  };
  std::sort(modes.begin(), modes.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  std::vector<std::string> kinds;
  for (const auto& row : rows)
    if (std::find(kinds.begin(), kinds.end(), row.kind) == kinds.end()) kinds.push_back(row.kind);

  auto fmt = [](double x) {
    if (std::isnan(x)) return std::string();
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
  };
  std::ostringstream csv;
  csv << "bound";
  for (const auto& m : modes) csv << ',' << m << "_Bnd," << m << "_G," << m << "_B";
  csv << '\n';
  WideTable out;
  out.series = nlohmann::json{{"classes", classes}, {"series", nlohmann::json::array()}};
  for (const auto& k : kinds) {
    csv << k;
    for (const auto& m : modes) {
      auto it = std::find_if(rows.begin(), rows.end(), [&](const MeanRow& r) { return r.kind == k && r.mode == m; });
      if (it == rows.end()) {
        csv << ",,,";
        continue;
      }
      double risk = it->means.at("mv_test_risk");
      if (std::isnan(risk)) risk = it->means.at("mv_train_risk");
      csv << ',' << fmt(it->means.at("certified_bound")) << ',' << fmt(it->means.at("gibbs")) << ',' << fmt(risk);
      out.series["series"].push_back({{"kind", k},
                                      {"mode", m},
                                      {"runs", it->runs},
                                      {"bound", nan_to_null(it->means.at("certified_bound"))},
                                      {"gibbs", nan_to_null(it->means.at("gibbs"))},
                                      {"mv_risk", nan_to_null(risk)}});
    }
    csv << '\n';
  }
  out.csv = csv.str();
  return out;
}

}  // namespace mvpb
