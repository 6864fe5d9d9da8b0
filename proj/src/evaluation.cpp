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

#include "mia/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mia/errors.hpp"

namespace mia {

namespace {

struct ClassCounts {
  std::size_t members = 0;
  std::size_t nonmembers = 0;
};

ClassCounts count_classes(const ScoreSet& s) {
  ClassCounts counts;
  for (bool m : s.is_member) {
    if (m) ++counts.members;
    else ++counts.nonmembers;
  }
  return counts;
}

void require_both_classes(const ScoreSet& s) {
  ClassCounts counts = count_classes(s);
  if (counts.members == 0 || counts.nonmembers == 0) {
    throw EvalError("score set needs at least one member and one non-member");
  }
  for (double v : s.scores) {
    if (!std::isfinite(v)) throw EvalError("score set holds a non-finite score");
  }
}

// Sample positions ordered by descending score; ties keep ascending position.
std::vector<std::size_t> descending_order(const ScoreSet& s) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.scores[a] > s.scores[b];
  });
  return order;
}

}  // namespace

RocCurve roc_curve(const ScoreSet& s) {
  require_both_classes(s);
  const ClassCounts counts = count_classes(s);
  const std::vector<std::size_t> order = descending_order(s);

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double value = s.scores[order[i]];
    while (i < order.size() && s.scores[order[i]] == value) {
      if (s.is_member[order[i]]) ++tp;
      else ++fp;
      ++i;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(counts.nonmembers),
                            static_cast<double>(tp) / static_cast<double>(counts.members),
                            value});
  }
  return curve;
}

double auc_from_curve(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const RocPoint& a = curve.points[i - 1];
    const RocPoint& b = curve.points[i];
    area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  return area;
}

double auc(const ScoreSet& s) { return auc_from_curve(roc_curve(s)); }

PrCurve pr_curve(const ScoreSet& s) {
  require_both_classes(s);
  const ClassCounts counts = count_classes(s);
  const std::vector<std::size_t> order = descending_order(s);

  PrCurve curve;
  curve.points.push_back({0.0, 1.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double value = s.scores[order[i]];
    while (i < order.size() && s.scores[order[i]] == value) {
      if (s.is_member[order[i]]) ++tp;
      else ++fp;
      ++i;
    }
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(counts.members),
                            static_cast<double>(tp) / static_cast<double>(tp + fp),
                            value});
  }
  return curve;
}

double accuracy_at(const ScoreSet& s, double tau) {
  if (s.size() == 0) throw EvalError("accuracy over an empty score set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool predicted = s.scores[i] > tau;
    if (predicted == static_cast<bool>(s.is_member[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(s.size());
}

double select_threshold(const ScoreSet& sim) {
  require_both_classes(sim);

  std::vector<double> unique(sim.scores);
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  std::vector<double> candidates;
  candidates.reserve(unique.size() + 1);
  candidates.push_back(unique.front() - 1.0);
  for (std::size_t i = 0; i + 1 < unique.size(); ++i) {
    candidates.push_back(0.5 * (unique[i] + unique[i + 1]));
  }
  candidates.push_back(unique.back() + 1.0);

  double best_tau = candidates.front();
  double best_acc = -1.0;
  for (double tau : candidates) {
    const double acc = accuracy_at(sim, tau);
    if (acc >= best_acc) {  // >= keeps the largest tau among ties
      best_acc = acc;
      best_tau = tau;
    }
  }
  return best_tau;
}

PpvReport ppv_report(const ScoreSet& s) {
  require_both_classes(s);
  const std::vector<std::size_t> order = descending_order(s);

  PpvReport report;
  double top_nonmember = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.is_member[i]) top_nonmember = std::max(top_nonmember, s.scores[i]);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.is_member[i] && s.scores[i] > top_nonmember) ++report.zero_fpr_count;
  }

  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double value = s.scores[order[i]];
    while (i < order.size() && s.scores[order[i]] == value) {
      if (s.is_member[order[i]]) ++tp;
      else ++fp;
      ++i;
    }
    report.ppv = std::max(report.ppv,
                          static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  return report;
}

double ppv_threshold(const ScoreSet& s) {
  require_both_classes(s);
  const std::vector<std::size_t> order = descending_order(s);

  double best_precision = -1.0;
  double best_threshold = 0.0;
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double value = s.scores[order[i]];
    while (i < order.size() && s.scores[order[i]] == value) {
      if (s.is_member[order[i]]) ++tp;
      else ++fp;
      ++i;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (precision > best_precision) {  // strict keeps the largest threshold
      best_precision = precision;
      best_threshold = value;
    }
  }
  return best_threshold;
}

double tpr_at_fpr_from_curve(const RocCurve& curve, double fpr_level) {
  double best = 0.0;
  for (const RocPoint& p : curve.points) {
    if (p.fpr <= fpr_level) best = std::max(best, p.tpr);
  }
  return best;
}

double tpr_at_fpr(const ScoreSet& s, double fpr_level) {
  if (fpr_level < 0.0 || fpr_level > 1.0) {
    throw ConfigError("fpr level must lie in [0,1]");
  }
  return tpr_at_fpr_from_curve(roc_curve(s), fpr_level);
}

double precision_at_top_k(const ScoreSet& s, std::size_t k) {
  if (k < 1 || k > s.size()) {
    throw ConfigError("top-k precision needs 1 <= k <= set size");
  }
  const std::vector<std::size_t> order = descending_order(s);
  std::size_t members = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (s.is_member[order[i]]) ++members;
  }
  return static_cast<double>(members) / static_cast<double>(k);
}

AttackReport build_attack_report(const ScoreSet& eval, const ScoreSet* sim,
                                 std::span<const double> fpr_levels) {
  AttackReport report;
  report.roc = roc_curve(eval);
  report.auc = auc_from_curve(report.roc);
  report.pr = pr_curve(eval);

  if (sim != nullptr) {
    report.optimal_threshold = select_threshold(*sim);
  } else {
    report.optimal_threshold = eval.calibrated ? kDefaultCalibratedThreshold : 0.0;
  }
  report.accuracy = accuracy_at(eval, report.optimal_threshold);

  const PpvReport ppv = ppv_report(eval);
  report.ppv = ppv.ppv;
  report.ppv_zero_fpr_count = ppv.zero_fpr_count;

  report.tpr_at_fpr.reserve(fpr_levels.size());
  for (double level : fpr_levels) {
    report.tpr_at_fpr.emplace_back(level, tpr_at_fpr_from_curve(report.roc, level));
  }
  report.provenance = score_label(eval);
  return report;
}

}  // namespace mia
