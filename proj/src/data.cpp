// Copyright 2026 The miaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mia/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "mia/errors.hpp"

namespace mia {

namespace {

constexpr double kStdClamp = 1e-12;

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || cell.empty()) {
    throw NonNumericCellError("non-numeric cell '" + cell + "' in column '" +
                              col + "', data row " + std::to_string(row));
  }
  return value;
}

}  // namespace

Dataset make_dataset(Matrix features, std::vector<int> labels, int n_classes) {
  if (features.rows == 0 || features.cols == 0) {
    throw DataError("dataset must have at least one sample and one feature");
  }
  if (labels.size() != features.rows) {
    throw DataError("label count does not match sample count");
  }
  if (n_classes < 1) throw DataError("n_classes must be positive");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) {
      throw DataError("label out of range at sample " + std::to_string(i));
    }
  }
  for (double v : features.data) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
  return Dataset{std::move(features), std::move(labels), n_classes};
}

Dataset generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n_samples < 4 || cfg.n_features < 1 || cfg.n_classes < 1) {
    throw ConfigError("synthetic config requires n_samples >= 4, n_features >= 1, n_classes >= 1");
  }
  if (!(cfg.cluster_spread > 0.0)) {
    throw ConfigError("cluster_spread must be positive");
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Unit-norm random center per class.
  Matrix centers(static_cast<std::size_t>(cfg.n_classes), cfg.n_features);
  for (std::size_t c = 0; c < centers.rows; ++c) {
    double norm_sq = 0.0;
    do {
      norm_sq = 0.0;
      for (std::size_t j = 0; j < cfg.n_features; ++j) {
        double v = gauss(rng);
        centers(c, j) = v;
        norm_sq += v * v;
      }
    } while (norm_sq < 1e-24);
    double inv = 1.0 / std::sqrt(norm_sq);
    for (std::size_t j = 0; j < cfg.n_features; ++j) centers(c, j) *= inv;
  }

  Matrix features(cfg.n_samples, cfg.n_features);
  std::vector<int> labels(cfg.n_samples);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    int label = static_cast<int>(i % static_cast<std::size_t>(cfg.n_classes));
    labels[i] = label;
    for (std::size_t j = 0; j < cfg.n_features; ++j) {
      features(i, j) = centers(static_cast<std::size_t>(label), j) +
                       cfg.cluster_spread * gauss(rng);
    }
  }
  return make_dataset(std::move(features), std::move(labels), cfg.n_classes);
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV file: " + path);
  std::vector<std::string> header = split_csv_line(line);

  std::size_t label_col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) {
      label_col = j;
      break;
    }
  }
  if (label_col == header.size()) {
    throw MissingColumnError("label column '" + label_column + "' not found in " + path);
  }
  if (header.size() < 2) {
    throw DataError("CSV has no feature columns: " + path);
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_no;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    std::vector<double> feat;
    feat.reserve(header.size() - 1);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j == label_col) continue;
      feat.push_back(parse_cell(cells[j], row_no, header[j]));
    }
    rows.push_back(std::move(feat));
    raw_labels.push_back(cells[label_col]);
  }
  if (rows.empty()) throw DataError("CSV has no data rows: " + path);

  // Dense label ids in first-occurrence order.
  std::unordered_map<std::string, int> label_ids;
  std::vector<int> labels;
  labels.reserve(raw_labels.size());
  for (const std::string& s : raw_labels) {
    auto it = label_ids.emplace(s, static_cast<int>(label_ids.size())).first;
    labels.push_back(it->second);
  }
  if (label_ids.size() < 2) {
    throw SingleClassError("CSV label column '" + label_column + "' holds a single class");
  }

  const std::size_t n = rows.size();
  const std::size_t d = rows.front().size();
  Matrix features(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) features(i, j) = rows[i][j];
  }

  // Standardize each column; constant columns collapse to zeros.
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += features(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dlt = features(i, j) - mean;
      var += dlt * dlt;
    }
    var /= static_cast<double>(n);
    double std_dev = std::max(std::sqrt(var), kStdClamp);
    for (std::size_t i = 0; i < n; ++i) {
      features(i, j) = (features(i, j) - mean) / std_dev;
    }
  }

  return make_dataset(std::move(features), std::move(labels),
                      static_cast<int>(label_ids.size()));
}

SplitPlan make_split(const Dataset& data, double member_fraction,
                     double shadow_fraction, std::uint64_t seed) {
  if (!(member_fraction > 0.0 && member_fraction < 1.0) ||
      !(shadow_fraction > 0.0 && shadow_fraction < 1.0)) {
    throw ConfigError("split fractions must lie in (0,1)");
  }
  if (member_fraction + shadow_fraction > 1.0 + 1e-12) {
    throw ConfigError("member_fraction + shadow_fraction must not exceed 1");
  }

  const std::size_t n = data.n_samples();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  // Round the private pool down to even so member/nonmember halves match.
  std::size_t n_private = static_cast<std::size_t>(member_fraction * static_cast<double>(n));
  n_private -= n_private % 2;
  const std::size_t n_public = static_cast<std::size_t>(shadow_fraction * static_cast<double>(n));

  const std::size_t half_private = n_private / 2;
  const std::size_t half_public = n_public / 2;
  if (half_private < 2 || half_public < 2) {
    throw ConfigError("split produces sets with fewer than 2 samples");
  }

  SplitPlan plan;
  plan.seed = seed;
  plan.member_idx.assign(order.begin(), order.begin() + half_private);
  plan.nonmember_idx.assign(order.begin() + half_private, order.begin() + n_private);
  plan.shadow_idx.assign(order.begin() + n_private, order.begin() + n_private + n_public);
  plan.sim_member_idx.assign(plan.shadow_idx.begin(), plan.shadow_idx.begin() + half_public);
  plan.sim_nonmember_idx.assign(plan.shadow_idx.begin() + half_public,
                                plan.shadow_idx.begin() + 2 * half_public);
  return plan;
}

std::vector<std::size_t> subsample_indices(std::span<const std::size_t> idx,
                                           double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw ConfigError("subsample ratio must lie in (0,1]");
  }
  std::vector<std::size_t> pool(idx.begin(), idx.end());
  if (ratio == 1.0) return pool;
  const std::size_t keep = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(pool.size())));
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(keep);
  std::sort(pool.begin(), pool.end());
  return pool;
}

SplitPlan subsample_members(const SplitPlan& plan, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw ConfigError("member subsample ratio must lie in (0,1]");
  }
  if (ratio == 1.0) return plan;

  SplitPlan out = plan;
  out.member_idx = subsample_indices(plan.member_idx, ratio, seed);
  out.members_subsampled = true;
  return out;
}

double mean_feature_std(const Dataset& data) {
  const std::size_t n = data.n_samples();
  const std::size_t d = data.n_features();
  double acc = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data.features(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dlt = data.features(i, j) - mean;
      var += dlt * dlt;
    }
    acc += std::sqrt(var / static_cast<double>(n));
  }
  return acc / static_cast<double>(d);
}

}  // namespace mia
