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

#include "mia/matrix.hpp"

namespace mia {

/// A classification dataset: one feature row per sample plus integer class
/// labels in [0, n_classes). All features must be finite.
struct Dataset {
  Matrix features;          // n_samples x n_features
  std::vector<int> labels;  // one per sample
  int n_classes = 0;

  std::size_t n_samples() const { return features.rows; }
  std::size_t n_features() const { return features.cols; }
  std::span<const double> row(std::size_t i) const { return features.row(i); }
};

/// Validates invariants and returns the assembled dataset.
/// Throws DataError on inconsistent shapes, out-of-range labels or
/// non-finite features.
Dataset make_dataset(Matrix features, std::vector<int> labels, int n_classes);

/// Parameters for the synthetic Gaussian-cluster generator.
struct SyntheticConfig {
  std::size_t n_samples = 0;
  std::size_t n_features = 0;
  int n_classes = 0;
  double cluster_spread = 0.0;  // per-class isotropic std
  std::uint64_t seed = 0;
};

/// Generates `n_classes` isotropic Gaussian clusters with unit-norm random
/// centers and std `cluster_spread`. Labels are assigned round-robin, so
/// class counts are balanced within one sample. Deterministic in the seed.
/// Throws ConfigError when sizes are non-positive, n_samples < 4 or
/// cluster_spread <= 0.
Dataset generate_synthetic(const SyntheticConfig& cfg);

/// Loads a headered CSV file. The named label column may hold arbitrary
/// strings; labels are densely re-indexed in first-occurrence order. All
/// other columns must be numeric and are standardized to zero mean / unit
/// variance per column (constant columns become all zeros; the std is
/// clamped at 1e-12 before dividing).
///
/// Errors: IoError (missing file), MissingColumnError, NonNumericCellError,
/// SingleClassError, DataError (no feature columns / no data rows).
Dataset load_csv(const std::string& path, const std::string& label_column);

/// One experiment trial's split of a dataset.
///
/// member/nonmember form the private pool (members train the target model,
/// non-members are the held-out half). shadow is the public pool available
/// to the attacker for reference-model training. sim_member/sim_nonmember
/// partition the shadow pool in half and are used only for threshold
/// selection, so they are a second view of shadow indices, never of private
/// ones.
struct SplitPlan {
  std::vector<std::size_t> member_idx;
  std::vector<std::size_t> nonmember_idx;
  std::vector<std::size_t> shadow_idx;
  std::vector<std::size_t> sim_member_idx;
  std::vector<std::size_t> sim_nonmember_idx;
  std::uint64_t seed = 0;
  // Set by subsample_members: waives the |member| == |nonmember| invariant.
  bool members_subsampled = false;
};

/// Draws a split plan: floor(member_fraction*n) private indices divided
/// evenly into member/nonmember halves, then floor(shadow_fraction*n) public
/// indices, themselves halved into the sim sets. Private counts are rounded
/// down to even so the halves match. Deterministic in the seed.
/// Throws ConfigError when fractions leave (0,1), their sum exceeds 1, or
/// any resulting set has fewer than 2 samples.
SplitPlan make_split(const Dataset& data, double member_fraction,
                     double shadow_fraction, std::uint64_t seed);

/// Returns a copy of `plan` whose member set is reduced to
/// ceil(ratio*|member|) uniformly chosen indices; everything else is
/// untouched. Used to evaluate attacks at member:non-member ratios below 1.
/// ratio == 1 returns the plan unchanged. Throws ConfigError unless
/// 0 < ratio <= 1.
SplitPlan subsample_members(const SplitPlan& plan, double ratio,
                            std::uint64_t seed);

/// ceil(ratio*|idx|) indices drawn uniformly without replacement, returned
/// in ascending order. ratio == 1 returns idx unchanged.
std::vector<std::size_t> subsample_indices(std::span<const std::size_t> idx,
                                           double ratio, std::uint64_t seed);

/// Mean over columns of the per-column population std. Used to scale
/// relative noise magnitudes to the data.
double mean_feature_std(const Dataset& data);

}  // namespace mia
