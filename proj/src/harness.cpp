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

#include "mia/harness.hpp"

#include <algorithm>
#include <cmath>

#include "mia/config.hpp"
#include "mia/errors.hpp"
#include "mia/seed.hpp"

namespace mia {

namespace {

// Stage streams under each repetition seed. Mixed (not plain additive)
// derivation keeps stage streams of neighboring repetitions apart even
// though repetition seeds themselves are consecutive.
enum SeedStage : std::uint64_t {
  kSeedTargetInit = 1,
  kSeedTargetTrain = 2,
  kSeedReferences = 3,
  kSeedMerlinEval = 4,
  kSeedMerlinSim = 5,
  kSeedMemberSubsample = 6,
  kSeedSimSubsample = 7,
};

Architecture experiment_architecture(const ExperimentConfig& cfg, const Dataset& data) {
  Architecture arch;
  arch.layer_widths.push_back(data.n_features());
  if (cfg.hidden_widths.empty()) {
    arch.layer_widths.push_back(2 * data.n_features());
  } else {
    for (std::size_t w : cfg.hidden_widths) arch.layer_widths.push_back(w);
  }
  arch.layer_widths.push_back(static_cast<std::size_t>(data.n_classes));
  return arch;
}

std::vector<std::size_t> concat_indices(const std::vector<std::size_t>& a,
                                        const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<bool> membership_bits(std::size_t members, std::size_t nonmembers) {
  std::vector<bool> bits(members + nonmembers, false);
  std::fill(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(members), true);
  return bits;
}

struct CellBucket {
  CellKey key;
  std::vector<std::size_t> rep_ids;
  std::vector<AttackReport> reps;
};

// One repetition's reports in deterministic cell order.
struct RepOutput {
  std::vector<std::pair<CellKey, AttackReport>> entries;
};

RepOutput run_repetition(const Dataset& data, const ExperimentConfig& cfg,
                         std::size_t t, std::string& stage, RepTrace* trace) {
  const std::uint64_t rep_seed = cfg.base_seed + t;
  if (trace != nullptr) trace->rep_seed = rep_seed;

  stage = "split";
  const SplitPlan split =
      make_split(data, cfg.member_fraction, cfg.shadow_fraction, rep_seed);

  stage = "target_train";
  const Architecture arch = experiment_architecture(cfg, data);
  TrainConfig target_cfg = cfg.target;
  target_cfg.seed = derive_seed(rep_seed, kSeedTargetTrain);
  const Model target =
      train(init_mlp(arch, derive_seed(rep_seed, kSeedTargetInit)), data,
            split.member_idx, target_cfg);
  if (trace != nullptr) trace->target_train_idx = split.member_idx;

  stage = "reference_train";
  const std::uint64_t ref_base = derive_seed(rep_seed, kSeedReferences);
  const std::vector<Model> references =
      train_references(data, split.shadow_idx, cfg.calibration, target, ref_base);
  if (trace != nullptr) {
    for (std::size_t j = 0; j < references.size(); ++j) {
      trace->reference_train_idx.push_back(reference_subsample(
          split.shadow_idx, cfg.calibration.shadow_subsample_fraction,
          ref_base + j));
    }
  }

  const double merlin_sigma = cfg.merlin_sigma_scale * mean_feature_std(data);

  RepOutput out;
  for (std::size_t ri = 0; ri < cfg.member_ratios.size(); ++ri) {
    const double ratio = cfg.member_ratios[ri];

    stage = "member_subsample";
    const SplitPlan plan =
        ratio == 1.0
            ? split
            : subsample_members(
                  split, ratio,
                  derive_seed(derive_seed(rep_seed, kSeedMemberSubsample), ri));

    // The threshold simulation mirrors the evaluation-time member ratio so
    // the selected threshold is optimal for the deployment class balance.
    const std::vector<std::size_t> sim_members =
        ratio == 1.0
            ? split.sim_member_idx
            : subsample_indices(
                  split.sim_member_idx, ratio,
                  derive_seed(derive_seed(rep_seed, kSeedSimSubsample), ri));

    const std::vector<std::size_t> eval_idx =
        concat_indices(plan.member_idx, plan.nonmember_idx);
    const std::vector<bool> eval_bits =
        membership_bits(plan.member_idx.size(), plan.nonmember_idx.size());
    const std::vector<std::size_t> sim_idx =
        concat_indices(sim_members, split.sim_nonmember_idx);
    const std::vector<bool> sim_bits =
        membership_bits(sim_members.size(), split.sim_nonmember_idx.size());
    if (trace != nullptr) {
      trace->threshold_sim_idx.insert(trace->threshold_sim_idx.end(),
                                      sim_idx.begin(), sim_idx.end());
    }

    for (ScoreKind kind : cfg.kinds) {
      stage = "scoring";
      MerlinParams merlin_eval{merlin_sigma, cfg.merlin_trials,
                               derive_seed(rep_seed, kSeedMerlinEval)};
      MerlinParams merlin_sim{merlin_sigma, cfg.merlin_trials,
                              derive_seed(rep_seed, kSeedMerlinSim)};

      ScoreSet target_eval =
          score_batch(target, data, eval_idx, eval_bits, kind, &merlin_eval);
      ScoreSet target_sim =
          score_batch(target, data, sim_idx, sim_bits, kind, &merlin_sim);

      std::vector<ScoreSet> refs_eval;
      std::vector<ScoreSet> refs_sim;
      refs_eval.reserve(references.size());
      refs_sim.reserve(references.size());
      for (const Model& ref : references) {
        refs_eval.push_back(score_batch(ref, data, eval_idx, eval_bits, kind, &merlin_eval));
        refs_sim.push_back(score_batch(ref, data, sim_idx, sim_bits, kind, &merlin_sim));
      }
      ScoreSet cal_eval = calibrate_scores(target_eval, refs_eval);
      ScoreSet cal_sim = calibrate_scores(target_sim, refs_sim);

      stage = "evaluation";
      for (bool calibrated : {false, true}) {
        const ScoreSet& eval_scores = calibrated ? cal_eval : target_eval;
        const ScoreSet& sim_scores = calibrated ? cal_sim : target_sim;
        AttackReport report =
            build_attack_report(eval_scores, &sim_scores, cfg.fpr_levels);
        report.seed = rep_seed;
        report.provenance = score_label(eval_scores) + " t=" + std::to_string(t) +
                            " ratio=" + format_double(ratio);
        const CellKey key{kind, calibrated, ratio};
        if (trace != nullptr) {
          trace->selections.push_back(ThresholdSelection{
              key, eval_scores, sim_scores, report.optimal_threshold});
        }
        out.entries.emplace_back(key, std::move(report));
      }
    }
  }
  return out;
}

ExperimentReport run_experiment_on(const Dataset& data, const ExperimentConfig& cfg,
                                   StageTrace* trace) {
  ExperimentReport report;
  report.config = cfg;
  report.requested_t = cfg.repetitions;

  std::vector<CellBucket> buckets;
  auto bucket_for = [&buckets](const CellKey& key) -> CellBucket& {
    for (CellBucket& b : buckets) {
      if (b.key.kind == key.kind && b.key.calibrated == key.calibrated &&
          b.key.member_ratio == key.member_ratio) {
        return b;
      }
    }
    buckets.push_back(CellBucket{key, {}, {}});
    return buckets.back();
  };

  for (std::size_t t = 0; t < cfg.repetitions; ++t) {
    std::string stage = "split";
    RepTrace rep_trace;
    try {
      RepOutput rep = run_repetition(data, cfg, t, stage,
                                     trace != nullptr ? &rep_trace : nullptr);
      for (auto& [key, attack_report] : rep.entries) {
        CellBucket& bucket = bucket_for(key);
        bucket.rep_ids.push_back(t);
        bucket.reps.push_back(std::move(attack_report));
      }
      ++report.effective_t;
      if (trace != nullptr) trace->reps.push_back(std::move(rep_trace));
    } catch (const Error& e) {
      report.failures.push_back(RepFailure{t, stage, e.what()});
    }
  }

  for (CellBucket& bucket : buckets) {
    CellResult cell;
    cell.key = bucket.key;
    cell.rep_ids = std::move(bucket.rep_ids);
    cell.reps = std::move(bucket.reps);

    std::vector<double> aucs, accs, ppvs;
    for (const AttackReport& r : cell.reps) {
      aucs.push_back(r.auc);
      accs.push_back(r.accuracy);
      ppvs.push_back(r.ppv);
    }
    cell.aggregate.auc = aggregate_scalar(aucs);
    cell.aggregate.accuracy = aggregate_scalar(accs);
    cell.aggregate.ppv = aggregate_scalar(ppvs);
    for (std::size_t li = 0; li < cfg.fpr_levels.size(); ++li) {
      std::vector<double> tprs;
      for (const AttackReport& r : cell.reps) tprs.push_back(r.tpr_at_fpr[li].second);
      cell.aggregate.tpr_at_fpr.emplace_back(cfg.fpr_levels[li],
                                             aggregate_scalar(tprs));
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

}  // namespace

ScalarAggregate aggregate_scalar(std::span<const double> values) {
  ScalarAggregate agg;
  if (values.empty()) return agg;
  double sum = 0.0;
  for (double v : values) sum += v;
  agg.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) {
      const double d = v - agg.mean;
      sq += d * d;
    }
    agg.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return agg;
}

Dataset load_dataset(const DataSource& source) {
  if (source.kind == DataSource::Kind::kSynthetic) {
    return generate_synthetic(source.synthetic);
  }
  return load_csv(source.csv_path, source.csv_label_column);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, StageTrace* trace) {
  return run_experiment_on(load_dataset(cfg.data), cfg, trace);
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kTrainSize: return "train_size";
    case SweepAxis::kMemberRatio: return "member_ratio";
    case SweepAxis::kNReferences: return "n_references";
    case SweepAxis::kShadowFraction: return "shadow_fraction";
  }
  throw ConfigError("unknown sweep axis");
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "train_size") return SweepAxis::kTrainSize;
  if (name == "member_ratio") return SweepAxis::kMemberRatio;
  if (name == "n_references") return SweepAxis::kNReferences;
  if (name == "shadow_fraction") return SweepAxis::kShadowFraction;
  throw ConfigError("unknown sweep axis: " + name);
}

std::vector<ExperimentReport> run_sweep(const ExperimentConfig& cfg,
                                        SweepAxis axis,
                                        std::span<const double> values,
                                        std::vector<StageTrace>* traces) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (double v : values) {
    switch (axis) {
      case SweepAxis::kTrainSize:
        if (v < 2.0 || v != std::floor(v)) {
          throw ConfigError("train_size values must be integers >= 2");
        }
        break;
      case SweepAxis::kMemberRatio:
        if (!(v > 0.0) || v > 1.0) {
          throw ConfigError("member_ratio values must lie in (0,1]");
        }
        break;
      case SweepAxis::kNReferences:
        if (v < 1.0 || v != std::floor(v)) {
          throw ConfigError("n_references values must be integers >= 1");
        }
        break;
      case SweepAxis::kShadowFraction:
        if (!(v > 0.0) || v > 1.0) {
          throw ConfigError("shadow_fraction values must lie in (0,1]");
        }
        break;
    }
  }

  const Dataset data = load_dataset(cfg.data);
  if (axis == SweepAxis::kTrainSize) {
    for (double v : values) {
      const double fraction = 2.0 * v / static_cast<double>(data.n_samples());
      if (!(fraction > 0.0 && fraction < 1.0) ||
          fraction + cfg.shadow_fraction > 1.0 + 1e-12) {
        throw ConfigError("train_size " + format_double(v) +
                          " does not fit the dataset and shadow fraction");
      }
    }
  }

  std::vector<ExperimentReport> reports;
  reports.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig point = cfg;
    switch (axis) {
      case SweepAxis::kTrainSize:
        point.member_fraction =
            2.0 * values[i] / static_cast<double>(data.n_samples());
        break;
      case SweepAxis::kMemberRatio:
        point.member_ratios = {values[i]};
        break;
      case SweepAxis::kNReferences:
        point.calibration.n_reference_models = static_cast<std::size_t>(values[i]);
        break;
      case SweepAxis::kShadowFraction:
        point.calibration.shadow_subsample_fraction = values[i];
        break;
    }
    StageTrace* trace = nullptr;
    if (traces != nullptr) {
      traces->emplace_back();
      trace = &traces->back();
    }
    reports.push_back(run_experiment_on(data, point, trace));
  }
  return reports;
}

}  // namespace mia
