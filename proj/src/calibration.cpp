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

#include "mia/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mia/errors.hpp"

namespace mia {

std::vector<std::size_t> reference_subsample(std::span<const std::size_t> shadow_idx,
                                             double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw ConfigError("shadow_subsample_fraction must lie in (0,1]");
  }
  std::vector<std::size_t> subsample(shadow_idx.begin(), shadow_idx.end());
  const std::size_t size = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(subsample.size())));
  std::mt19937_64 rng(seed);
  std::shuffle(subsample.begin(), subsample.end(), rng);
  subsample.resize(size);
  return subsample;
}

std::vector<Model> train_references(const Dataset& data,
                                    std::span<const std::size_t> shadow_idx,
                                    const CalibrationConfig& cfg,
                                    const Model& target,
                                    std::uint64_t base_seed) {
  if (shadow_idx.empty()) throw ConfigError("shadow index list is empty");
  if (cfg.n_reference_models < 1) {
    throw ConfigError("n_reference_models must be >= 1");
  }

  std::vector<Model> references;
  references.reserve(cfg.n_reference_models);
  for (std::size_t j = 0; j < cfg.n_reference_models; ++j) {
    const std::uint64_t seed = base_seed + j;
    const std::vector<std::size_t> subsample =
        reference_subsample(shadow_idx, cfg.shadow_subsample_fraction, seed);

    TrainConfig train_cfg = cfg.reference_train_config;
    train_cfg.seed = seed;

    if (cfg.mode == CalibrationMode::kFromScratch) {
      references.push_back(train(init_mlp(target.arch, seed), data, subsample, train_cfg));
    } else {
      references.push_back(train(target, data, subsample, train_cfg));
    }
  }
  return references;
}

ScoreSet calibrate_scores(const ScoreSet& target_scores,
                          const std::vector<ScoreSet>& reference_scores) {
  if (reference_scores.empty()) {
    throw ConfigError("calibration needs at least one reference score set");
  }
  if (target_scores.calibrated) {
    throw ShapeError("target scores are already calibrated");
  }
  for (const ScoreSet& ref : reference_scores) {
    if (ref.kind != target_scores.kind || ref.calibrated) {
      throw ShapeError("reference score kind does not match target");
    }
    if (ref.size() != target_scores.size() ||
        ref.sample_idx != target_scores.sample_idx) {
      throw ShapeError("reference scores cover different samples than target");
    }
    if (ref.is_member != target_scores.is_member) {
      throw ShapeError("reference membership bits do not match target");
    }
  }

  ScoreSet out = target_scores;
  out.calibrated = true;
  const double inv_k = 1.0 / static_cast<double>(reference_scores.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double mean_ref = 0.0;
    for (const ScoreSet& ref : reference_scores) mean_ref += ref.scores[i];
    out.scores[i] = target_scores.scores[i] - mean_ref * inv_k;
  }
  return out;
}

std::vector<bool> calibrated_gap_decide(const Model& target,
                                        const Model& reference,
                                        const Dataset& data,
                                        std::span<const std::size_t> idx) {
  std::vector<bool> member(idx.size());
  for (std::size_t pos = 0; pos < idx.size(); ++pos) {
    const std::size_t i = idx[pos];
    member[pos] = gap_score(target, data.row(i), data.labels[i]) == 1.0 &&
                  gap_score(reference, data.row(i), data.labels[i]) == 0.0;
  }
  return member;
}

double calibrated_gap_accuracy(double p_train, double p_test, double eps1,
                               double eps2) {
  for (double v : {p_train, p_test, eps1, eps2}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError("calibrated_gap_accuracy inputs must lie in [0,1]");
    }
  }
  return 0.5 * (1.0 - eps2 + p_train - p_test + eps1);
}

}  // namespace mia
