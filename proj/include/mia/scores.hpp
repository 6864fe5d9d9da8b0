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
#include <string>
#include <vector>

#include "mia/data.hpp"
#include "mia/model.hpp"

namespace mia {

/// Membership scoring functions. Convention throughout: higher score means
/// more member-like. Morgan is a two-threshold decision rule over loss and
/// Merlin scores, not a kind of its own (see morgan_decide).
enum class ScoreKind {
  kLoss,
  kGradNorm,
  kConfidence,
  kEntropy,
  kModifiedEntropy,
  kMerlin,
  kGap,
};

std::string to_string(ScoreKind kind);
ScoreKind score_kind_from_string(const std::string& name);

/// Per-sample membership scores with ground-truth membership bits and the
/// sample identities they were computed on. `calibrated` marks scores that
/// went through difficulty calibration.
struct ScoreSet {
  std::vector<double> scores;
  std::vector<bool> is_member;
  std::vector<std::size_t> sample_idx;
  ScoreKind kind = ScoreKind::kLoss;
  bool calibrated = false;
  std::string provenance;

  std::size_t size() const { return scores.size(); }
};

/// Tag such as "loss" or "calibrated(grad_norm)".
std::string score_label(const ScoreSet& s);

/// log(p_y), clamped; always <= 0. Equals -per_example_loss exactly.
double loss_score(const Model& model, std::span<const double> x, int y);

/// Negated L2 norm of the per-example parameter gradient; always <= 0.
double grad_norm_score(const Model& model, std::span<const double> x, int y);

/// max_i log(p_i); label-free, always >= loss_score for the same sample.
double confidence_score(const Model& model, std::span<const double> x);

/// Negative predictive entropy, sum_i p_i log(p_i) in [-log(n_classes), 0];
/// confident predictions score near the top regardless of the label.
double entropy_score(const Model& model, std::span<const double> x);

/// Label-aware entropy variant:
///   -[-(1-p_y) log(p_y) - sum_{i!=y} p_i log(1-p_i)]
/// with the probability clamp inside both logarithms. Behaves like the loss
/// score: perfect predictions score near 0, the maximum.
double modified_entropy_score(const Model& model, std::span<const double> x, int y);

/// Fraction of Gaussian perturbations x + sigma*xi that strictly increase
/// the loss, over `trials` draws; in [0,1]. Deterministic in the seed.
double merlin_score(const Model& model, std::span<const double> x, int y,
                    double sigma, int trials, std::uint64_t seed);

/// 1 if the model classifies (x, y) correctly (argmax tie toward the
/// smallest class index), else 0.
double gap_score(const Model& model, std::span<const double> x, int y);

/// Member iff loss_score >= tau_loss AND merlin_score >= tau_merlin,
/// elementwise over two aligned score sets. Thresholds typically come from
/// the PPV maximizer in the evaluation module.
std::vector<bool> morgan_decide(const ScoreSet& loss_scores,
                                const ScoreSet& merlin_scores, double tau_loss,
                                double tau_merlin);

/// Extra parameters for batch Merlin scoring. Each sample uses the derived
/// stream derive_seed(seed, position) so batch results equal per-sample
/// calls with those seeds.
struct MerlinParams {
  double sigma = 0.01;
  int trials = 100;
  std::uint64_t seed = 0;
};

/// Applies the selected score to every indexed sample and attaches the
/// caller-supplied membership bits. `merlin` is required for kMerlin and
/// ignored otherwise.
ScoreSet score_batch(const Model& model, const Dataset& data,
                     std::span<const std::size_t> idx,
                     const std::vector<bool>& is_member, ScoreKind kind,
                     const MerlinParams* merlin = nullptr);

}  // namespace mia
