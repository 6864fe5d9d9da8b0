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

#include "mia/scores.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mia/errors.hpp"
#include "mia/seed.hpp"

namespace mia {

namespace {

double clamped_log(double p) {
  return std::log(std::clamp(p, kProbClamp, 1.0));
}

}  // namespace

std::string to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kLoss: return "loss";
    case ScoreKind::kGradNorm: return "grad_norm";
    case ScoreKind::kConfidence: return "confidence";
    case ScoreKind::kEntropy: return "entropy";
    case ScoreKind::kModifiedEntropy: return "modified_entropy";
    case ScoreKind::kMerlin: return "merlin";
    case ScoreKind::kGap: return "gap";
  }
  throw ConfigError("unknown score kind");
}

ScoreKind score_kind_from_string(const std::string& name) {
  if (name == "loss") return ScoreKind::kLoss;
  if (name == "grad_norm") return ScoreKind::kGradNorm;
  if (name == "confidence") return ScoreKind::kConfidence;
  if (name == "entropy") return ScoreKind::kEntropy;
  if (name == "modified_entropy") return ScoreKind::kModifiedEntropy;
  if (name == "merlin") return ScoreKind::kMerlin;
  if (name == "gap") return ScoreKind::kGap;
  throw ConfigError("unknown score kind: " + name);
}

std::string score_label(const ScoreSet& s) {
  return s.calibrated ? "calibrated(" + to_string(s.kind) + ")" : to_string(s.kind);
}

double loss_score(const Model& model, std::span<const double> x, int y) {
  return -per_example_loss(model, x, y);
}

double grad_norm_score(const Model& model, std::span<const double> x, int y) {
  return -per_example_grad_norm(model, x, y);
}

double confidence_score(const Model& model, std::span<const double> x) {
  std::vector<double> probs = forward(model, x);
  double best = probs[0];
  for (double p : probs) best = std::max(best, p);
  return clamped_log(best);
}

double entropy_score(const Model& model, std::span<const double> x) {
  std::vector<double> probs = forward(model, x);
  double acc = 0.0;
  for (double p : probs) acc += p * clamped_log(p);
  return acc;
}

double modified_entropy_score(const Model& model, std::span<const double> x, int y) {
  std::vector<double> probs = forward(model, x);
  const std::size_t c = probs.size();
  if (y < 0 || static_cast<std::size_t>(y) >= c) {
    throw ShapeError("label " + std::to_string(y) + " out of range");
  }
  const double p_y = probs[static_cast<std::size_t>(y)];
  double mentr = -(1.0 - p_y) * clamped_log(p_y);
  for (std::size_t i = 0; i < c; ++i) {
    if (i == static_cast<std::size_t>(y)) continue;
    mentr -= probs[i] * clamped_log(1.0 - probs[i]);
  }
  return -mentr;
}

double merlin_score(const Model& model, std::span<const double> x, int y,
                    double sigma, int trials, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw ConfigError("merlin sigma must be positive");
  if (trials < 1) throw ConfigError("merlin trials must be >= 1");

  const double base_loss = per_example_loss(model, x, y);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> perturbed(x.size());
  int increases = 0;
  for (int t = 0; t < trials; ++t) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      perturbed[j] = x[j] + sigma * gauss(rng);
    }
    if (per_example_loss(model, perturbed, y) > base_loss) ++increases;
  }
  return static_cast<double>(increases) / static_cast<double>(trials);
}

double gap_score(const Model& model, std::span<const double> x, int y) {
  const std::size_t c = model.arch.layer_widths.back();
  if (y < 0 || static_cast<std::size_t>(y) >= c) {
    throw ShapeError("label " + std::to_string(y) + " out of range");
  }
  return predict_class(model, x) == y ? 1.0 : 0.0;
}

std::vector<bool> morgan_decide(const ScoreSet& loss_scores,
                                const ScoreSet& merlin_scores, double tau_loss,
                                double tau_merlin) {
  if (loss_scores.size() != merlin_scores.size()) {
    throw ShapeError("morgan_decide: score sets have different lengths");
  }
  if (loss_scores.sample_idx != merlin_scores.sample_idx) {
    throw ShapeError("morgan_decide: score sets cover different samples");
  }
  std::vector<bool> member(loss_scores.size());
  for (std::size_t i = 0; i < member.size(); ++i) {
    member[i] = loss_scores.scores[i] >= tau_loss &&
                merlin_scores.scores[i] >= tau_merlin;
  }
  return member;
}

ScoreSet score_batch(const Model& model, const Dataset& data,
                     std::span<const std::size_t> idx,
                     const std::vector<bool>& is_member, ScoreKind kind,
                     const MerlinParams* merlin) {
  if (idx.empty()) throw ConfigError("score_batch over an empty index list");
  if (is_member.size() != idx.size()) {
    throw ShapeError("membership bits do not match index count");
  }
  if (kind == ScoreKind::kMerlin && merlin == nullptr) {
    throw ConfigError("merlin scoring needs MerlinParams");
  }

  ScoreSet out;
  out.kind = kind;
  out.scores.reserve(idx.size());
  out.sample_idx.assign(idx.begin(), idx.end());
  out.is_member = is_member;
  for (std::size_t pos = 0; pos < idx.size(); ++pos) {
    const std::size_t i = idx[pos];
    const std::span<const double> x = data.row(i);
    const int y = data.labels[i];
    double s = 0.0;
    switch (kind) {
      case ScoreKind::kLoss: s = loss_score(model, x, y); break;
      case ScoreKind::kGradNorm: s = grad_norm_score(model, x, y); break;
      case ScoreKind::kConfidence: s = confidence_score(model, x); break;
      case ScoreKind::kEntropy: s = entropy_score(model, x); break;
      case ScoreKind::kModifiedEntropy: s = modified_entropy_score(model, x, y); break;
      case ScoreKind::kMerlin:
        s = merlin_score(model, x, y, merlin->sigma, merlin->trials,
                         derive_seed(merlin->seed, pos));
        break;
      case ScoreKind::kGap: s = gap_score(model, x, y); break;
    }
    out.scores.push_back(s);
  }
  return out;
}

}  // namespace mia
