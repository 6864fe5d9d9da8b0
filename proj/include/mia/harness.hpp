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
#include <iosfwd>
#include <string>
#include <vector>

#include "mia/calibration.hpp"
#include "mia/data.hpp"
#include "mia/evaluation.hpp"
#include "mia/model.hpp"
#include "mia/scores.hpp"

namespace mia {

struct DataSource {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SyntheticConfig synthetic{800, 20, 2, 0.9, 1};
  std::string csv_path;
  std::string csv_label_column;
};

/// Full description of one attack experiment: the data, the split protocol,
/// target and reference training, which scores to attack with, and how to
/// report. Nested seeds (target init/training, references, Merlin noise,
/// evaluation-time member subsampling) are derived per repetition from
/// base_seed + t, so a config fully determines its report.
struct ExperimentConfig {
  DataSource data;
  double member_fraction = 0.25;
  double shadow_fraction = 0.5;
  // Hidden layer widths; empty means one hidden layer of 2 * n_features.
  std::vector<std::size_t> hidden_widths;
  TrainConfig target;
  CalibrationConfig calibration;
  std::vector<ScoreKind> kinds{ScoreKind::kLoss, ScoreKind::kGradNorm,
                               ScoreKind::kConfidence};
  std::size_t repetitions = 5;
  std::vector<double> fpr_levels{0.01, 0.05, 0.1};
  // Member:non-member ratios at evaluation time; models are never retrained.
  std::vector<double> member_ratios{1.0};
  std::uint64_t base_seed = 1;
  // Merlin noise std = merlin_sigma_scale * mean per-feature std of the data.
  double merlin_sigma_scale = 0.01;
  int merlin_trials = 100;
};

struct ScalarAggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample std; 0 by convention for a single value
};

ScalarAggregate aggregate_scalar(std::span<const double> values);

struct CellKey {
  ScoreKind kind = ScoreKind::kLoss;
  bool calibrated = false;
  double member_ratio = 1.0;
};

struct CellAggregate {
  ScalarAggregate auc;
  ScalarAggregate accuracy;
  ScalarAggregate ppv;
  std::vector<std::pair<double, ScalarAggregate>> tpr_at_fpr;
};

/// One (score kind, calibrated?, member ratio) cell across repetitions.
struct CellResult {
  CellKey key;
  std::vector<std::size_t> rep_ids;  // t of each successful repetition
  std::vector<AttackReport> reps;    // aligned with rep_ids
  CellAggregate aggregate;
};

struct RepFailure {
  std::size_t t = 0;
  std::string stage;
  std::string message;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::size_t requested_t = 0;
  std::size_t effective_t = 0;  // repetitions that completed every stage
  std::vector<RepFailure> failures;
  std::vector<CellResult> cells;
};

/// Test instrumentation: which indices each stage consumed, the evaluation
/// scores behind each cell, and the simulation scores behind each threshold
/// selection. Filled only when a trace pointer is passed to run_experiment.
struct ThresholdSelection {
  CellKey cell;
  ScoreSet eval_scores;
  ScoreSet sim_scores;
  double selected_threshold = 0.0;
};

struct RepTrace {
  std::uint64_t rep_seed = 0;
  std::vector<std::size_t> target_train_idx;
  std::vector<std::vector<std::size_t>> reference_train_idx;
  std::vector<std::size_t> threshold_sim_idx;
  std::vector<ThresholdSelection> selections;
};

struct StageTrace {
  std::vector<RepTrace> reps;
};

Dataset load_dataset(const DataSource& source);

/// Runs the full protocol: per repetition t in [0, T), derive seed
/// base_seed + t, split, train the target on the member half, train
/// references on the shadow pool, score, calibrate, select thresholds on the
/// simulation halves, and measure. A failing stage aborts only its own
/// repetition and is recorded. Deterministic: identical configs produce
/// identical reports.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                StageTrace* trace = nullptr);

enum class SweepAxis { kTrainSize, kMemberRatio, kNReferences, kShadowFraction };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

/// One full run_experiment per axis value with everything else fixed.
/// kTrainSize values are member counts (the split fraction is re-derived),
/// kMemberRatio subsamples the evaluation member set only, kNReferences and
/// kShadowFraction vary the calibration configuration. All values are
/// validated before any training happens.
std::vector<ExperimentReport> run_sweep(const ExperimentConfig& cfg,
                                        SweepAxis axis,
                                        std::span<const double> values,
                                        std::vector<StageTrace>* traces = nullptr);

/// Versioned text serialization; write-then-read is lossless, and identical
/// reports serialize to identical bytes.
void write_report(const ExperimentReport& report, std::ostream& out);
void write_report(const ExperimentReport& report, const std::string& path);
ExperimentReport read_report(std::istream& in);
ExperimentReport read_report(const std::string& path);

}  // namespace mia
