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
#include <utility>
#include <vector>

#include "mia/scores.hpp"

namespace mia {

// The decision rule everywhere is "member iff score > tau" (strict, so ties
// at tau count as non-members). Curve points are the operating points
// reachable by that rule: the recorded threshold of a point is the smallest
// score still predicted member at that point, i.e. any tau just below it
// realizes the point.

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

/// Operating points from the all-negative sentinel (0,0, +inf) down to
/// (1,1, min score). fpr and tpr are non-decreasing along the list.
struct RocCurve {
  std::vector<RocPoint> points;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;
};

/// Precision/recall along the same threshold sweep. At the sentinel with
/// zero predicted positives precision is defined as 1, so the curve is
/// total; recall is non-decreasing along the list.
struct PrCurve {
  std::vector<PrPoint> points;
};

struct PpvReport {
  double ppv = 0.0;                // best precision over non-empty predictions
  std::size_t zero_fpr_count = 0;  // members scored strictly above every non-member
};

/// Everything measured for one attack cell in one repetition.
struct AttackReport {
  double auc = 0.0;
  double accuracy = 0.0;           // at optimal_threshold
  double optimal_threshold = 0.0;
  double ppv = 0.0;
  std::size_t ppv_zero_fpr_count = 0;
  std::vector<std::pair<double, double>> tpr_at_fpr;  // (fpr level, tpr)
  RocCurve roc;
  PrCurve pr;
  std::uint64_t seed = 0;
  std::string provenance;
};

/// Falls back as the calibrated attacks' threshold when no simulation set is
/// available: calibrated scores of typical non-members sit near zero, so a
/// hair above zero separates them from memorized members.
inline constexpr double kDefaultCalibratedThreshold = 1e-4;

/// Threshold sweep over the descending unique scores plus a +inf sentinel.
/// Throws EvalError unless the set holds at least one member and one
/// non-member.
RocCurve roc_curve(const ScoreSet& s);

/// Trapezoidal area under roc_curve. Equals the probability that a random
/// member outscores a random non-member, counting ties as one half.
double auc(const ScoreSet& s);
double auc_from_curve(const RocCurve& curve);

PrCurve pr_curve(const ScoreSet& s);

/// Fraction of correct membership predictions under "member iff score > tau".
double accuracy_at(const ScoreSet& s, double tau);

/// Threshold maximizing accuracy_at over the candidate set: midpoints of
/// adjacent sorted unique scores plus {min-1, max+1}. Ties break toward the
/// largest threshold (fewer predicted members). Throws EvalError when the
/// simulation set is single-class.
double select_threshold(const ScoreSet& sim);

PpvReport ppv_report(const ScoreSet& s);

/// Threshold achieving ppv_report().ppv under the ">= threshold" reading of
/// curve points; ties break toward the largest threshold. Feeds
/// morgan_decide.
double ppv_threshold(const ScoreSet& s);

/// Largest tpr on the curve with fpr <= fpr_level (step interpolation).
double tpr_at_fpr(const ScoreSet& s, double fpr_level);
double tpr_at_fpr_from_curve(const RocCurve& curve, double fpr_level);

/// Fraction of members among the k highest-scored samples (ties resolved by
/// sample position, ascending). 1 <= k <= size required.
double precision_at_top_k(const ScoreSet& s, std::size_t k);

/// Assembles the full report for an evaluation score set. The threshold
/// comes from select_threshold(*sim) when a simulation set is given,
/// otherwise kDefaultCalibratedThreshold for calibrated sets and 0 for raw
/// ones.
AttackReport build_attack_report(const ScoreSet& eval, const ScoreSet* sim,
                                 std::span<const double> fpr_levels);

}  // namespace mia
