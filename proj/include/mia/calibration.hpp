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

#pragma once

#include <cstdint>
#include <vector>

#include "mia/data.hpp"
#include "mia/model.hpp"
#include "mia/scores.hpp"

namespace mia {

/// How reference models are produced for difficulty calibration.
/// kFromScratch trains freshly initialized models on the shadow data;
/// kForgetting warm-starts from the target model and continues training on
/// shadow data, relying on catastrophic forgetting of the target's training
/// set. Forgetting typically needs fewer epochs.
enum class CalibrationMode { kFromScratch, kForgetting };

struct CalibrationConfig {
  CalibrationMode mode = CalibrationMode::kFromScratch;
  std::size_t n_reference_models = 1;
  // Per-reference shadow subsample (without replacement), in (0,1].
  double shadow_subsample_fraction = 1.0;
  TrainConfig reference_train_config;
};

/// The shadow subsample reference j trains on: ceil(fraction * |shadow_idx|)
/// indices drawn without replacement under seed base_seed + j.
std::vector<std::size_t> reference_subsample(std::span<const std::size_t> shadow_idx,
                                             double fraction, std::uint64_t seed);

/// Trains cfg.n_reference_models reference models on the shadow pool.
/// Model j draws its own without-replacement subsample via
/// reference_subsample and trains with seed base_seed + j, so the models are
/// independent yet reproducible. The target is only consulted for its
/// architecture (kFromScratch) or as the warm start (kForgetting).
std::vector<Model> train_references(const Dataset& data,
                                    std::span<const std::size_t> shadow_idx,
                                    const CalibrationConfig& cfg,
                                    const Model& target,
                                    std::uint64_t base_seed);

/// Difficulty-calibrated scores: for each sample, the target score minus the
/// mean of the reference scores. Membership bits and sample identities are
/// preserved; the result is marked calibrated. All sets must agree on
/// samples, membership bits and kind, and must be uncalibrated.
ScoreSet calibrate_scores(const ScoreSet& target_scores,
                          const std::vector<ScoreSet>& reference_scores);

/// Calibrated gap rule against a single reference: member iff the target
/// classifies the sample correctly and the reference misclassifies it.
std::vector<bool> calibrated_gap_decide(const Model& target,
                                        const Model& reference,
                                        const Dataset& data,
                                        std::span<const std::size_t> idx);

/// Closed-form accuracy of the calibrated gap rule on equal-sized member and
/// non-member pools, (1 - eps2 + p_train - p_test + eps1) / 2, where eps1 and
/// eps2 are the rates at which the reference is right exactly when the
/// target is wrong on the member and non-member pools. All inputs must lie
/// in [0,1].
double calibrated_gap_accuracy(double p_train, double p_test, double eps1,
                               double eps2);

}  // namespace mia
