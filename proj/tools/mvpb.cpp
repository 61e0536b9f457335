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

// mvpb: train and certify multi-view majority votes from the command line.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvpb/experiment.hpp"
#include "mvpb/oracle.hpp"

namespace {

using namespace mvpb;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_reals(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& t : split_list(s)) {
    try {
      out.push_back(std::stod(t));
    } catch (const std::exception&) {
      throw Error(what + ": '" + t + "' is not a number");
    }
  }
  return out;
}

DepthPreset parse_depth(const std::string& s) {
  if (s == "stump") return DepthPreset::stump;
  if (s == "weak") return DepthPreset::weak;
  if (s == "strong") return DepthPreset::strong;
  if (s == "strong20") return DepthPreset::strong20;
  throw Error("--depth must be stump, weak, strong or strong20");
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "auto") return OptimizerKind::automatic;
  if (s == "adam") return OptimizerKind::adaptive_moment;
  if (s == "cocob") return OptimizerKind::coin_betting;
  throw Error("--optimizer must be auto, adam or cocob");
}

struct TrainOptions {
  std::string data;
  std::string synth;  // V,m,C,d,noise_1..noise_V
  std::uint64_t synth_seed = 0;
  int synth_unlabeled = 0;
  std::string binary;  // a,b
  std::string bounds = "K";
  std::string alpha = "kl";
  double labeled_frac = 1.0;
  double test_frac = 0.2;
  std::string depth = "stump";
  int trees = 100;
  int seeds = 1;
  std::uint64_t seed_base = 0;
  double delta = 0.05;
  int iters = 1000;
  std::string optimizer = "auto";
  std::vector<int> single_views;
  bool concat = false;
  bool baselines = false;
  bool no_multiview = false;
  unsigned jobs = 1;

  void add_to(CLI::App* app) {
    app->add_option("--data", data, "dataset directory");
    app->add_option("--synth", synth, "synthetic dataset V,m,C,d,noise_1,...,noise_V");
    app->add_option("--synth-seed", synth_seed, "seed of the synthetic dataset");
    app->add_option("--synth-unlabeled", synth_unlabeled, "extra unlabeled rows drawn with the synthetic dataset");
    app->add_option("--binary", binary, "one-versus-one task a,b");
    app->add_option("--bounds", bounds, "comma-separated bound kinds")->capture_default_str();
    app->add_option("--alpha", alpha, "kl | fixed:X | learnable")->capture_default_str();
    app->add_option("--labeled-frac", labeled_frac, "labeled fraction of the training rows")->capture_default_str();
    app->add_option("--test-frac", test_frac, "test fraction")->capture_default_str();
    app->add_option("--depth", depth, "stump | weak | strong | strong20")->capture_default_str();
    app->add_option("--trees", trees, "trees per view")->capture_default_str();
    app->add_option("--seeds", seeds, "number of runs per bound")->capture_default_str();
    app->add_option("--seed-base", seed_base, "first run seed")->capture_default_str();
    app->add_option("--delta", delta, "confidence parameter")->capture_default_str();
    app->add_option("--iters", iters, "maximum optimiser iterations")->capture_default_str();
    app->add_option("--optimizer", optimizer, "auto | adam | cocob")->capture_default_str();
    app->add_option("--single-view", single_views, "also run on view v alone (1-based, repeatable)");
    app->add_flag("--concat", concat, "also run on all views concatenated");
    app->add_flag("--baselines", baselines, "also run every single view and the concatenation");
    app->add_flag("--no-multiview", no_multiview, "skip the multi-view run");
    app->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  }

  MultiViewDataset dataset() const {
    require(data.empty() != synth.empty(), "give exactly one of --data or --synth");
    MultiViewDataset ds;
    if (!data.empty()) {
      ds = load_dataset(data);
    } else {
      const auto v = parse_reals(synth, "--synth");
      require(v.size() >= 4, "--synth needs V,m,C,d,noise_1,...,noise_V");
      const int V = static_cast<int>(v[0]);
      require(v.size() == 4 + static_cast<std::size_t>(std::max(V, 0)), "--synth needs one noise scale per view");
      const int m = static_cast<int>(v[1]);
      const std::vector<double> noise(v.begin() + 4, v.end());
      ds = synth_dataset(V, m + synth_unlabeled, static_cast<int>(v[2]), static_cast<int>(v[3]), noise, synth_seed);
      if (synth_unlabeled > 0) {
        std::vector<std::size_t> lab(static_cast<std::size_t>(m)), unl(static_cast<std::size_t>(synth_unlabeled));
        std::iota(lab.begin(), lab.end(), std::size_t{0});
        std::iota(unl.begin(), unl.end(), static_cast<std::size_t>(m));
        MultiViewDataset pool = select_rows(ds, unl);
        ds = select_rows(ds, lab);
        ds.unlabeled_views = pool.views;
        ds.name = "synth";
      }
    }
    if (!binary.empty()) {
      const auto ab = parse_reals(binary, "--binary");
      require(ab.size() == 2, "--binary needs a,b");
      ds = make_binary_task(ds, static_cast<int>(ab[0]), static_cast<int>(ab[1]));
    }
    return ds;
  }

  RunConfig config() const {
    RunConfig cfg;
    cfg.divergence = DivergenceSpec::parse(alpha);
    cfg.labeled_fraction = labeled_frac;
    cfg.test_fraction = test_frac;
    cfg.n_trees = trees;
    cfg.max_depth = depth_of(parse_depth(depth));
    cfg.optim.max_iters = iters;
    cfg.optim.optimizer = parse_optimizer(optimizer);
    cfg.delta = delta;
    require(trees >= 1, "--trees must be >= 1");
    require(seeds >= 1, "--seeds must be >= 1");
    require(iters >= 1, "--iters must be >= 1");
    require(delta > 0.0 && delta < 1.0, "--delta must lie in (0,1)");
    return cfg;
  }

  std::vector<BoundKind> kinds(int num_classes) const {
    std::vector<BoundKind> out;
    for (const auto& b : split_list(bounds)) {
      const BoundKind k = parse_bound_kind(b);
      require(is_trainable(k), "bound " + b + " is evaluation-only and cannot be trained");
      require_kind_valid(k, num_classes);
      out.push_back(k);
    }
    require(!out.empty(), "--bounds is empty");
    return out;
  }

  std::vector<RunMode> modes(std::size_t V) const {
    std::vector<RunMode> out;
    std::vector<int> views = single_views;
    if (baselines)
      for (std::size_t v = 1; v <= V; ++v) views.push_back(static_cast<int>(v));
    std::sort(views.begin(), views.end());
    views.erase(std::unique(views.begin(), views.end()), views.end());
    for (int v : views) {
      require(v >= 1 && static_cast<std::size_t>(v) <= V, "--single-view out of range");
      out.push_back(RunMode{RunMode::Kind::single_view, static_cast<std::size_t>(v - 1)});
    }
    if (concat || baselines) out.push_back(RunMode{RunMode::Kind::concat, 0});
    if (!no_multiview) out.push_back(RunMode{});
    require(!out.empty(), "no run mode selected");
    return out;
  }

  nlohmann::json json() const {
    return {{"data", data},           {"synth", synth},     {"synth_seed", synth_seed},
            {"synth_unlabeled", synth_unlabeled},           {"binary", binary},
            {"bounds", bounds},       {"alpha", alpha},     {"labeled_frac", labeled_frac},
            {"test_frac", test_frac}, {"depth", depth},     {"trees", trees},
            {"seeds", seeds},         {"seed_base", seed_base},
            {"delta", delta},         {"iters", iters},     {"optimizer", optimizer}};
  }
};

struct Cell {
  BoundKind kind;
  RunMode mode;
  std::uint64_t seed;
};

/// Runs every (kind, mode, seed) cell; failures are collected, not fatal.
nlohmann::json run_grid(const MultiViewDataset& ds, const TrainOptions& opt, const RunConfig& cfg,
                        std::vector<std::string>& failures) {
  std::vector<Cell> cells;
  for (auto k : opt.kinds(ds.num_classes))
    for (const auto& m : opt.modes(ds.num_views()))
      for (int s = 0; s < opt.seeds; ++s) cells.push_back({k, m, opt.seed_base + static_cast<std::uint64_t>(s)});

  std::vector<RunRecord> records(cells.size());
  std::vector<std::string> errors(cells.size());
  run_pool(cells.size(), opt.jobs, [&](std::size_t i) {
    try {
      records[i] = run_once(ds, cfg, cells[i].kind, cells[i].mode, cells[i].seed);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<RunRecord> ok;
  nlohmann::json failed = nlohmann::json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (errors[i].empty()) {
      ok.push_back(std::move(records[i]));
      continue;
    }
    const std::string label = std::string(to_string(cells[i].kind)) + "/" + cells[i].mode.str() + "/seed " +
                              std::to_string(cells[i].seed);
    failures.push_back(label + ": " + errors[i]);
    failed.push_back({{"kind", std::string(to_string(cells[i].kind))},
                      {"mode", cells[i].mode.str()},
                      {"seed", cells[i].seed},
                      {"error", errors[i]}});
  }
  ReportHeader h{ds.name, ds.num_classes, ds.num_views(), opt.json()};
  return make_report(h, ok, failed);
}

int report_failures(const std::vector<std::string>& failures) {
  if (failures.empty()) return 0;
  std::cerr << failures.size() << " run(s) failed:\n";
  for (const auto& f : failures) std::cerr << "  " << f << '\n';
  return 2;
}

int cmd_train(const TrainOptions& opt, const std::string& out) {
  const auto ds = opt.dataset();
  const auto cfg = opt.config();
  std::vector<std::string> failures;
  const auto rep = run_grid(ds, opt, cfg, failures);
  write_text(out, serialize_report(rep));
  for (const auto& m : rep.at("means"))
    std::cout << m.at("kind").get<std::string>() << " " << m.at("mode").get<std::string>()
              << " runs=" << m.at("runs") << " bound=" << m.at("certified_bound")
              << " mv_test=" << m.at("mv_test_risk") << '\n';
  return report_failures(failures);
}

int cmd_report(const std::vector<std::string>& files, const std::string& csv, const std::string& json) {
  std::vector<nlohmann::json> reports;
  for (const auto& f : files) reports.push_back(read_report(f));
  const auto table = summarize_reports(reports);
  if (csv.empty())
    std::cout << table.csv;
  else
    write_text(csv, table.csv);
  if (!json.empty()) write_text(json, table.series.dump(2) + "\n");
  return 0;
}

int cmd_sweep(TrainOptions opt, const std::string& axis, const std::string& grid, const std::string& out_dir) {
  const auto values = split_list(grid);
  require(!values.empty(), "--grid is empty");
  require(axis == "labeled" || axis == "alpha", "--axis must be labeled or alpha");
  const auto ds = opt.dataset();
  std::vector<std::string> failures;
  nlohmann::json points = nlohmann::json::array();
  for (const auto& v : values) {
    TrainOptions o = opt;
    if (axis == "labeled")
      o.labeled_frac = parse_reals(v, "--grid").at(0);
    else
      o.alpha = v.find(':') == std::string::npos && v != "kl" && v != "learnable" ? "fixed:" + v : v;
    const auto rep = run_grid(ds, o, o.config(), failures);
    const std::string name = axis + "_" + v + ".json";
    write_text(std::filesystem::path(out_dir) / name, serialize_report(rep));
    points.push_back({{"value", v}, {"file", name}, {"means", rep.at("means")}});
  }
  // one series per (kind, mode): bound and MV risk along the axis
  nlohmann::json series = nlohmann::json::object();
  for (const auto& p : points)
    for (const auto& m : p.at("means")) {
      const std::string key = m.at("kind").get<std::string>() + "/" + m.at("mode").get<std::string>();
      series[key].push_back({{"value", p.at("value")},
                             {"bound", m.at("certified_bound")},
                             {"gibbs", m.at("gibbs")},
                             {"mv_test_risk", m.at("mv_test_risk")}});
    }
  const nlohmann::json summary{{"schema", kReportSchema}, {"axis", axis}, {"points", points}, {"series", series}};
  write_text(std::filesystem::path(out_dir) / "summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << values.size() << " grid points to " << out_dir << '\n';
  return report_failures(failures);
}

int cmd_verify(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> views(1, 3), voters(1, 4), samples(1, 20), unl(0, 10);
  std::uniform_int_distribution<int> classes(2, 3);
  std::exponential_distribution<double> ex(1.0);
  auto simplex = [&](std::size_t n) {
    Vector p(n);
    double s = 0;
    for (auto& x : p) s += (x = ex(rng) + 1e-6);
    for (auto& x : p) x /= s;
    return p;
  };
  int mismatches = 0, violations = 0;
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const int C = classes(rng);
    const std::size_t V = views(rng), m = samples(rng), u = unl(rng);
    std::uniform_int_distribution<int> cls(0, C - 1);
    PredictionCache c;
    c.num_classes = C;
    c.labeled = {0, m};
    c.unlabeled = {m, m + u};
    c.test = {m + u, m + u};
    for (std::size_t v = 0; v < V; ++v) {
      PredictionMatrix P{voters(rng), m + u, {}};
      for (std::size_t j = 0; j < P.voters * P.samples; ++j) P.data.push_back(cls(rng));
      c.pred.push_back(std::move(P));
    }
    Labels y;
    for (std::size_t i = 0; i < m; ++i) y.push_back(cls(rng));
    const Vector rho = simplex(V);
    std::vector<Vector> Q;
    for (const auto& P : c.pred) Q.push_back(simplex(P.voters));
    const auto fast = empirical_stats(c, rho, Q, y);
    const auto slow = oracle::brute_stats(c, rho, Q, y);
    const double err = std::max({std::abs(fast.gibbs - slow.gibbs), std::abs(fast.joint - slow.joint),
                                 std::abs(fast.disagreement - slow.disagreement)});
    worst = std::max(worst, err);
    if (err > 1e-12 || fast.mv_risk != slow.mv_risk) ++mismatches;
    if (!oracle::oracle_inequalities(c, rho, Q, y).all_hold()) ++violations;
  }
  const bool ok_eq = mismatches == 0, ok_ineq = violations == 0;
  std::printf("%s statistics vs brute force: %d/%d mismatches, worst abs diff %.3g\n", ok_eq ? "PASS" : "FAIL",
              mismatches, instances, worst);
  std::printf("%s oracle inequalities: %d/%d violations\n", ok_ineq ? "PASS" : "FAIL", violations, instances);
  return ok_eq && ok_ineq ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view majority votes with self-certified PAC-Bayesian bounds"};
  app.require_subcommand(1);

  TrainOptions train_opt;
  std::string train_out;
  auto* train = app.add_subcommand("train", "train and certify every bound x seed (x mode)");
  train_opt.add_to(train);
  train->add_option("--out", train_out, "run report (JSON)")->required();

  std::vector<std::string> report_files;
  std::string report_csv, report_json;
  auto* report = app.add_subcommand("report", "aggregate run reports into a CSV table and plot series");
  report->add_option("files", report_files, "run reports")->required();
  report->add_option("--csv", report_csv, "CSV output (stdout if omitted)");
  report->add_option("--json", report_json, "plot-series JSON output");

  TrainOptions sweep_opt;
  std::string sweep_axis = "labeled", sweep_grid = "0.05,0.1,0.2,0.4,0.6,0.8,1.0", sweep_out;
  auto* sweep = app.add_subcommand("sweep", "repeat training along a labeled-fraction or alpha grid");
  sweep_opt.add_to(sweep);
  sweep->add_option("--axis", sweep_axis, "labeled | alpha")->capture_default_str();
  sweep->add_option("--grid", sweep_grid, "comma-separated grid values")->capture_default_str();
  sweep->add_option("--out", sweep_out, "output directory")->required();

  int verify_instances = 1000;
  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "audit fast statistics and oracle inequalities on random instances");
  verify->add_option("--instances", verify_instances, "random instances")->capture_default_str();
  verify->add_option("--seed", verify_seed, "generator seed")->capture_default_str();

  int syn_views = 3, syn_m = 300, syn_classes = 2, syn_dim = 5, syn_unlabeled = 0;
  std::string syn_noise = "0.5,1.0,2.0", syn_out;
  std::uint64_t syn_seed = 0;
  auto* synth = app.add_subcommand("synth", "write a synthetic multi-view dataset");
  synth->add_option("--views", syn_views)->capture_default_str();
  synth->add_option("--m", syn_m, "labeled samples")->capture_default_str();
  synth->add_option("--classes", syn_classes)->capture_default_str();
  synth->add_option("--dim", syn_dim, "features per view")->capture_default_str();
  synth->add_option("--noise", syn_noise, "per-view noise scales")->capture_default_str();
  synth->add_option("--unlabeled", syn_unlabeled, "extra unlabeled rows")->capture_default_str();
  synth->add_option("--seed", syn_seed)->capture_default_str();
  synth->add_option("--out", syn_out, "output directory")->required();

  std::string poi_data, poi_views = "1", poi_out;
  double poi_sigma = 1.0;
  std::uint64_t poi_seed = 0;
  auto* poison = app.add_subcommand("poison", "add Gaussian noise to selected views of a dataset");
  poison->add_option("--data", poi_data, "dataset directory")->required();
  poison->add_option("--views", poi_views, "views to corrupt (1-based, comma-separated)")->capture_default_str();
  poison->add_option("--sigma", poi_sigma, "noise scale relative to column std")->capture_default_str();
  poison->add_option("--seed", poi_seed)->capture_default_str();
  poison->add_option("--out", poi_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(train_opt, train_out);
    if (*report) return cmd_report(report_files, report_csv, report_json);
    if (*sweep) return cmd_sweep(sweep_opt, sweep_axis, sweep_grid, sweep_out);
    if (*verify) return cmd_verify(verify_instances, verify_seed);
    if (*synth) {
      TrainOptions o;
      std::ostringstream spec;
      spec << syn_views << ',' << syn_m << ',' << syn_classes << ',' << syn_dim << ',' << syn_noise;
      o.synth = spec.str();
      o.synth_seed = syn_seed;
      o.synth_unlabeled = syn_unlabeled;
      save_dataset(o.dataset(), syn_out);
      return 0;
    }
    if (*poison) {
      std::vector<std::size_t> targets;
      for (double v : parse_reals(poi_views, "--views")) {
        require(v >= 1, "--views are 1-based");
        targets.push_back(static_cast<std::size_t>(v) - 1);
      }
      save_dataset(poison_views(load_dataset(poi_data), targets, poi_sigma, poi_seed), poi_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
