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

// Multi-view datasets: on-disk format, synthesis, splitting, one-vs-one
// binarization and Gaussian view poisoning.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvpb/common.hpp"

namespace mvpb {

/// Dense row-major matrix of features.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }

  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols);
    for (std::size_t k = 0; k < idx.size(); ++k) std::copy_n(row(idx[k]).begin(), cols, out.row(k).begin());
    return out;
  }

  bool operator==(const Matrix&) const = default;
};

using Labels = std::vector<int>;

struct MultiViewDataset {
  std::vector<Matrix> views;
  Labels labels;
  std::vector<Matrix> unlabeled_views;  // empty, or one matrix per view
  int num_classes = 0;
  std::string name;

  std::size_t num_views() const { return views.size(); }
  std::size_t size() const { return labels.size(); }
  std::size_t unlabeled_size() const { return unlabeled_views.empty() ? 0 : unlabeled_views.front().rows; }
};

/// Checks the structural invariants. `min_views` is 2 for real multi-view
/// data; derived single-view baselines pass 1. Class coverage is only
/// required of full datasets (held-out blocks may miss a class).
inline void validate(const MultiViewDataset& ds, std::size_t min_views = 2, bool require_coverage = true) {
  require(ds.views.size() >= min_views, "dataset needs at least " + std::to_string(min_views) + " views");
  require(ds.num_classes >= 1, "dataset needs at least one class");
  const std::size_t m = ds.labels.size();
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    require(ds.views[v].rows == m, "row count mismatch in view " + std::to_string(v + 1));
    require(ds.views[v].cols >= 1, "view " + std::to_string(v + 1) + " has no features");
  }
  std::vector<bool> seen(static_cast<std::size_t>(ds.num_classes), false);
  for (int y : ds.labels) {
    require(y >= 0 && y < ds.num_classes, "label outside {0..C-1}");
    seen[static_cast<std::size_t>(y)] = true;
  }
  if (require_coverage) {
    require(m >= 1, "dataset has no samples");
    for (int c = 0; c < ds.num_classes; ++c)
      require(seen[static_cast<std::size_t>(c)], "class " + std::to_string(c) + " never occurs in labels");
  }
  if (!ds.unlabeled_views.empty()) {
    require(ds.unlabeled_views.size() == ds.views.size(), "unlabeled pool must have one matrix per view");
    const std::size_t nu = ds.unlabeled_views.front().rows;
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
      require(ds.unlabeled_views[v].rows == nu, "row count mismatch in unlabeled view " + std::to_string(v + 1));
      require(ds.unlabeled_views[v].cols == ds.views[v].cols,
              "feature count mismatch between labeled and unlabeled view " + std::to_string(v + 1));
    }
  }
}

// ---------------------------------------------------------------------------
// CSV / directory format

namespace detail {

inline std::vector<std::vector<double>> read_csv_reals(const std::filesystem::path& file) {
  std::ifstream in(file);
  require(static_cast<bool>(in), "missing file: " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        require(cell.find_first_not_of(" \t", used) == std::string::npos, "trailing characters");
      } catch (const std::exception&) {
        throw Error(file.string() + ":" + std::to_string(lineno) + ": not a real number: '" + cell + "'");
      }
    }
    if (rows.empty()) width = row.size();
    if (row.size() != width)
      throw Error(file.string() + ":" + std::to_string(lineno) + ": ragged row (" + std::to_string(row.size()) +
                  " columns, expected " + std::to_string(width) + ")");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix read_matrix(const std::filesystem::path& file) {
  const auto rows = read_csv_reals(file);
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  return m;
}

inline void write_matrix(const std::filesystem::path& file, const Matrix& m) {
  std::ofstream out(file);
  require(static_cast<bool>(out), "cannot write " + file.string());
  out.precision(17);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace detail

/// Reads `meta.json`, `view_k.csv`, `labels.csv` and the optional `unlabeled/` pool.
inline MultiViewDataset load_dataset(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path);
  require(static_cast<bool>(meta_in), "missing file: " + meta_path.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const std::exception& e) {
    throw Error(meta_path.string() + ": " + e.what());
  }
  require(meta.contains("views") && meta.contains("classes"), meta_path.string() + ": needs 'views' and 'classes'");
  const int V = meta.at("views").get<int>();
  const int C = meta.at("classes").get<int>();
  require(V >= 2, meta_path.string() + ": V < 2");

  MultiViewDataset ds;
  ds.num_classes = C;
  ds.name = meta.value("name", dir.filename().string());
  for (int v = 1; v <= V; ++v) {
    const auto file = dir / ("view_" + std::to_string(v) + ".csv");
    ds.views.push_back(detail::read_matrix(file));
    if (v > 1 && ds.views.back().rows != ds.views.front().rows)
      throw Error(file.string() + ": row count mismatch (" + std::to_string(ds.views.back().rows) + " vs " +
                  std::to_string(ds.views.front().rows) + ")");
  }

  const auto label_path = dir / "labels.csv";
  std::ifstream lin(label_path);
  require(static_cast<bool>(lin), "missing file: " + label_path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lin, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    int y = 0;
    try {
      std::size_t used = 0;
      y = std::stoi(line, &used);
      require(line.find_first_not_of(" \t\r", used) == std::string::npos, "trailing characters");
    } catch (const std::exception&) {
      throw Error(label_path.string() + ":" + std::to_string(lineno) + ": not an integer label");
    }
    if (y < 0 || y >= C)
      throw Error(label_path.string() + ":" + std::to_string(lineno) + ": label " + std::to_string(y) +
                  " outside {0.." + std::to_string(C - 1) + "}");
    ds.labels.push_back(y);
  }
  if (ds.labels.size() != ds.views.front().rows)
    throw Error(label_path.string() + ": row count mismatch (" + std::to_string(ds.labels.size()) +
                " labels, " + std::to_string(ds.views.front().rows) + " samples)");

  const auto udir = dir / "unlabeled";
  if (std::filesystem::is_directory(udir)) {
    for (int v = 1; v <= V; ++v) {
      const auto file = udir / ("view_" + std::to_string(v) + ".csv");
      ds.unlabeled_views.push_back(detail::read_matrix(file));
      if (v > 1 && ds.unlabeled_views.back().rows != ds.unlabeled_views.front().rows)
        throw Error(file.string() + ": row count mismatch");
    }
  }
  validate(ds);
  return ds;
}

inline void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta{{"views", ds.num_views()}, {"classes", ds.num_classes}, {"name", ds.name}};
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
  for (std::size_t v = 0; v < ds.num_views(); ++v)
    detail::write_matrix(dir / ("view_" + std::to_string(v + 1) + ".csv"), ds.views[v]);
  std::ofstream lout(dir / "labels.csv");
  for (int y : ds.labels) lout << y << '\n';
  if (!ds.unlabeled_views.empty()) {
    std::filesystem::create_directories(dir / "unlabeled");
    for (std::size_t v = 0; v < ds.num_views(); ++v)
      detail::write_matrix(dir / "unlabeled" / ("view_" + std::to_string(v + 1) + ".csv"), ds.unlabeled_views[v]);
  }
}

// ---------------------------------------------------------------------------
// Transformations

inline MultiViewDataset select_rows(const MultiViewDataset& ds, std::span<const std::size_t> idx) {
  MultiViewDataset out;
  out.num_classes = ds.num_classes;
  out.name = ds.name;
  for (const auto& m : ds.views) out.views.push_back(m.select_rows(idx));
  out.labels.reserve(idx.size());
  for (std::size_t i : idx) out.labels.push_back(ds.labels[i]);
  return out;
}

/// One-versus-one task: keeps classes a and b, relabelled to 0 and 1.
inline MultiViewDataset make_binary_task(const MultiViewDataset& ds, int label_a, int label_b) {
  require(label_a != label_b, "make_binary_task: labels must differ");
  std::vector<std::size_t> keep;
  bool has_a = false, has_b = false;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i] == label_a) has_a = true;
    if (ds.labels[i] == label_b) has_b = true;
    if (ds.labels[i] == label_a || ds.labels[i] == label_b) keep.push_back(i);
  }
  require(has_a, "make_binary_task: label " + std::to_string(label_a) + " absent from dataset");
  require(has_b, "make_binary_task: label " + std::to_string(label_b) + " absent from dataset");
  MultiViewDataset out = select_rows(ds, keep);
  for (int& y : out.labels) y = (y == label_a) ? 0 : 1;
  out.num_classes = 2;
  out.unlabeled_views = ds.unlabeled_views;
  out.name = ds.name + "_" + std::to_string(label_a) + "v" + std::to_string(label_b);
  return out;
}

/// Single-view dataset made of view `v` only (baseline mode).
inline MultiViewDataset single_view(const MultiViewDataset& ds, std::size_t v) {
  require(v < ds.num_views(), "single_view: view index out of range");
  MultiViewDataset out;
  out.views = {ds.views[v]};
  out.labels = ds.labels;
  if (!ds.unlabeled_views.empty()) out.unlabeled_views = {ds.unlabeled_views[v]};
  out.num_classes = ds.num_classes;
  out.name = ds.name + "_view" + std::to_string(v + 1);
  return out;
}

/// Single-view dataset whose features are all views joined column-wise.
inline MultiViewDataset concat_views(const MultiViewDataset& ds) {
  auto join = [](const std::vector<Matrix>& views) {
    std::size_t cols = 0;
    for (const auto& m : views) cols += m.cols;
    Matrix out(views.front().rows, cols);
    for (std::size_t i = 0; i < out.rows; ++i) {
      std::size_t off = 0;
      for (const auto& m : views) {
        std::copy_n(m.row(i).begin(), m.cols, out.row(i).begin() + static_cast<std::ptrdiff_t>(off));
        off += m.cols;
      }
    }
    return out;
  };
  MultiViewDataset out;
  out.views = {join(ds.views)};
  out.labels = ds.labels;
  if (!ds.unlabeled_views.empty()) out.unlabeled_views = {join(ds.unlabeled_views)};
  out.num_classes = ds.num_classes;
  out.name = ds.name + "_concat";
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitSpec {
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  double labeled_fraction = 1.0;
};

struct SplitResult {
  MultiViewDataset train;                 // labeled rows; unlabeled_views = unlabeled rows + external pool
  MultiViewDataset test;
  std::vector<std::size_t> labeled_rows;  // indices into the source dataset
  std::vector<std::size_t> unlabeled_rows;
  std::vector<std::size_t> test_rows;
  Labels hidden_labels;                   // ground truth of unlabeled_rows; never read by training
  int attempts = 1;
};

/// Deterministic shuffle split into labeled-train / unlabeled-train / test.
inline SplitResult split(const MultiViewDataset& ds, const SplitSpec& spec) {
  require(spec.test_fraction > 0.0 && spec.test_fraction < 1.0, "split: test_fraction must be in (0,1)");
  require(spec.labeled_fraction > 0.0 && spec.labeled_fraction <= 1.0, "split: labeled_fraction must be in (0,1]");
  const std::size_t m = ds.size();
  const auto n_test = static_cast<std::size_t>(std::ceil(spec.test_fraction * static_cast<double>(m)));
  require(n_test < m, "split: test set would consume every sample");
  const std::size_t n_train = m - n_test;
  const auto n_lab = std::min(
      n_train, static_cast<std::size_t>(std::ceil(spec.labeled_fraction * static_cast<double>(n_train))));

  for (int attempt = 0; attempt < 100; ++attempt) {
    std::seed_seq sseq{static_cast<std::uint32_t>(spec.seed & 0xffffffffu), static_cast<std::uint32_t>(spec.seed >> 32),
                       static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(sseq);
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    SplitResult r;
    r.test_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
    r.labeled_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test),
                          perm.begin() + static_cast<std::ptrdiff_t>(n_test + n_lab));
    r.unlabeled_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test + n_lab), perm.end());

    std::set<int> classes;
    for (std::size_t i : r.labeled_rows) classes.insert(ds.labels[i]);
    if (static_cast<int>(classes.size()) != ds.num_classes) continue;

    r.attempts = attempt + 1;
    r.train = select_rows(ds, r.labeled_rows);
    r.test = select_rows(ds, r.test_rows);
    for (std::size_t i : r.unlabeled_rows) r.hidden_labels.push_back(ds.labels[i]);
    if (!r.unlabeled_rows.empty() || !ds.unlabeled_views.empty()) {
      for (std::size_t v = 0; v < ds.num_views(); ++v) {
        Matrix u = ds.views[v].select_rows(r.unlabeled_rows);
        if (!ds.unlabeled_views.empty()) {
          u.data.insert(u.data.end(), ds.unlabeled_views[v].data.begin(), ds.unlabeled_views[v].data.end());
          u.rows += ds.unlabeled_views[v].rows;
        }
        r.train.unlabeled_views.push_back(std::move(u));
      }
    }
    return r;
  }
  throw Error("split: could not draw a labeled training set covering every class after 100 attempts");
}

// ---------------------------------------------------------------------------
// Synthesis and poisoning

/// Class-conditional Gaussian clusters per view; `view_noise[v]` is the
/// isotropic noise scale of view v around unit-scale class centres.
inline MultiViewDataset synth_dataset(int V, int m, int C, int d_per_view, const std::vector<double>& view_noise,
                                      std::uint64_t seed) {
  require(V >= 2, "synth_dataset: V must be >= 2");
  require(C >= 2, "synth_dataset: C must be >= 2");
  require(m >= C, "synth_dataset: m must be >= C");
  require(d_per_view >= 1, "synth_dataset: d_per_view must be >= 1");
  require(view_noise.size() == static_cast<std::size_t>(V), "synth_dataset: need one noise scale per view");
  for (double s : view_noise) require(s >= 0.0, "synth_dataset: noise must be >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MultiViewDataset ds;
  ds.num_classes = C;
  ds.name = "synth";
  ds.labels.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) ds.labels[static_cast<std::size_t>(i)] = i % C;
  std::shuffle(ds.labels.begin(), ds.labels.end(), rng);

  for (int v = 0; v < V; ++v) {
    Matrix centres(static_cast<std::size_t>(C), static_cast<std::size_t>(d_per_view));
    for (double& x : centres.data) x = normal(rng);
    Matrix X(static_cast<std::size_t>(m), static_cast<std::size_t>(d_per_view));
    for (std::size_t i = 0; i < X.rows; ++i)
      for (std::size_t j = 0; j < X.cols; ++j)
        X(i, j) = centres(static_cast<std::size_t>(ds.labels[i]), j) + view_noise[static_cast<std::size_t>(v)] * normal(rng);
    ds.views.push_back(std::move(X));
  }
  validate(ds);
  return ds;
}

/// Adds N(0, (sigma * column std)^2) noise to every targeted view, labeled and
/// unlabeled rows alike. Column std is taken over the labeled rows.
inline MultiViewDataset poison_views(const MultiViewDataset& ds, const std::vector<std::size_t>& target_views,
                                     double sigma, std::uint64_t seed) {
  require(!target_views.empty(), "poison_views: empty target set");
  require(sigma > 0.0, "poison_views: sigma must be > 0");
  for (std::size_t v : target_views) require(v < ds.num_views(), "poison_views: view index out of range");

  MultiViewDataset out = ds;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::set<std::size_t> targets(target_views.begin(), target_views.end());
  for (std::size_t v : targets) {
    const Matrix& X = ds.views[v];
    std::vector<double> col_sd(X.cols, 0.0);
    for (std::size_t j = 0; j < X.cols; ++j) {
      CompensatedSum s;
      for (std::size_t i = 0; i < X.rows; ++i) s.add(X(i, j));
      const double mean = s.value() / static_cast<double>(X.rows);
      CompensatedSum ss;
      for (std::size_t i = 0; i < X.rows; ++i) ss.add((X(i, j) - mean) * (X(i, j) - mean));
      col_sd[j] = std::sqrt(ss.value() / static_cast<double>(X.rows));
    }
    auto corrupt = [&](Matrix& M) {
      for (std::size_t i = 0; i < M.rows; ++i)
        for (std::size_t j = 0; j < M.cols; ++j) M(i, j) += sigma * col_sd[j] * normal(rng);
    };
    corrupt(out.views[v]);
    if (!out.unlabeled_views.empty()) corrupt(out.unlabeled_views[v]);
  }
  out.name = ds.name + "_poisoned";
  return out;
}

}  // namespace mvpb
