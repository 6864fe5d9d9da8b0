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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "mia/calibration.hpp"
#include "mia/errors.hpp"
#include "mia/evaluation.hpp"
#include "test_util.hpp"

using namespace mia;

TEST_CASE("a single from-scratch reference trains on the full shadow pool") {
  test::OverfitFixture fx = test::make_overfit_fixture(1);
  CalibrationConfig cfg;
  cfg.reference_train_config = fx.train_cfg;

  std::vector<Model> refs =
      train_references(fx.data, fx.split.shadow_idx, cfg, fx.target, 500);
  REQUIRE(refs.size() == 1);

  // With fraction 1 the subsample is a permutation of the shadow pool, and
  // the whole pipeline is reproducible from the seed arithmetic.
  std::vector<std::size_t> subsample =
      reference_subsample(fx.split.shadow_idx, 1.0, 500);
  CHECK(std::set<std::size_t>(subsample.begin(), subsample.end()) ==
        std::set<std::size_t>(fx.split.shadow_idx.begin(), fx.split.shadow_idx.end()));

  TrainConfig tc = fx.train_cfg;
  tc.seed = 500;
  CHECK(refs[0] == train(init_mlp(fx.target.arch, 500), fx.data, subsample, tc));
}

TEST_CASE("reference subsamples stay inside the shadow pool") {
  test::OverfitFixture fx = test::make_overfit_fixture(2);
  std::set<std::size_t> shadow(fx.split.shadow_idx.begin(), fx.split.shadow_idx.end());
  for (std::uint64_t seed : {1ull, 9ull, 77ull}) {
    std::vector<std::size_t> sub =
        reference_subsample(fx.split.shadow_idx, 0.35, seed);
    CHECK(sub.size() ==
          static_cast<std::size_t>(std::ceil(0.35 * fx.split.shadow_idx.size())));
    for (std::size_t i : sub) CHECK(shadow.contains(i));
  }
  CHECK_THROWS_AS(reference_subsample(fx.split.shadow_idx, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(reference_subsample(fx.split.shadow_idx, 1.2, 1), ConfigError);
}

TEST_CASE("forgetting with zero epochs returns the target itself") {
  test::OverfitFixture fx = test::make_overfit_fixture(3);
  CalibrationConfig cfg;
  cfg.mode = CalibrationMode::kForgetting;
  cfg.reference_train_config = fx.train_cfg;
  cfg.reference_train_config.epochs = 0;

  std::vector<Model> refs =
      train_references(fx.data, fx.split.shadow_idx, cfg, fx.target, 11);
  REQUIRE(refs.size() == 1);
  CHECK(refs[0] == fx.target);
}

TEST_CASE("distinct reference seeds give pairwise distinct models") {
  test::OverfitFixture fx = test::make_overfit_fixture(4);
  CalibrationConfig cfg;
  cfg.n_reference_models = 3;
  cfg.reference_train_config = fx.train_cfg;
  cfg.reference_train_config.epochs = 30;

  std::vector<Model> refs =
      train_references(fx.data, fx.split.shadow_idx, cfg, fx.target, 900);
  REQUIRE(refs.size() == 3);
  for (std::size_t a = 0; a < refs.size(); ++a) {
    for (std::size_t b = a + 1; b < refs.size(); ++b) {
      CHECK(flatten_params(refs[a]) != flatten_params(refs[b]));
    }
  }
  CHECK_THROWS_AS(
      train_references(fx.data, std::vector<std::size_t>{}, cfg, fx.target, 1),
      ConfigError);
}

TEST_CASE("calibrate_scores arithmetic and self-calibration") {
  ScoreSet target;
  target.kind = ScoreKind::kLoss;
  target.scores = {-1.0, -3.0};
  target.is_member = {true, false};
  target.sample_idx = {4, 9};

  ScoreSet ref = target;
  ref.scores = {-2.0, -2.0};
  ScoreSet cal = calibrate_scores(target, {ref});
  CHECK(cal.scores == std::vector<double>{1.0, -1.0});
  CHECK(cal.calibrated);
  CHECK(cal.kind == ScoreKind::kLoss);
  CHECK(cal.is_member == target.is_member);
  CHECK(cal.sample_idx == target.sample_idx);

  // Calibrating a set against itself cancels exactly.
  ScoreSet self = calibrate_scores(target, {target});
  for (double v : self.scores) CHECK(v == 0.0);
}

TEST_CASE("multi-reference calibration equals the brute-force mean") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ScoreSet target;
  target.kind = ScoreKind::kGradNorm;
  for (std::size_t i = 0; i < 37; ++i) {
    target.scores.push_back(gauss(rng));
    target.is_member.push_back(i % 2 == 0);
    target.sample_idx.push_back(i);
  }
  std::vector<ScoreSet> refs(4, target);
  for (ScoreSet& ref : refs) {
    for (double& v : ref.scores) v = gauss(rng);
  }

  ScoreSet cal = calibrate_scores(target, refs);
  for (std::size_t i = 0; i < target.size(); ++i) {
    double sum = 0.0;
    for (const ScoreSet& ref : refs) sum += ref.scores[i];
    CHECK(cal.scores[i] ==
          doctest::Approx(target.scores[i] - sum / 4.0).epsilon(1e-15));
  }
}

TEST_CASE("calibrate_scores rejects misaligned inputs") {
  ScoreSet target;
  target.kind = ScoreKind::kLoss;
  target.scores = {-1.0, -2.0};
  target.is_member = {true, false};
  target.sample_idx = {0, 1};

  CHECK_THROWS_AS(calibrate_scores(target, {}), ConfigError);

  ScoreSet wrong_kind = target;
  wrong_kind.kind = ScoreKind::kConfidence;
  CHECK_THROWS_AS(calibrate_scores(target, {wrong_kind}), ShapeError);

  ScoreSet wrong_samples = target;
  wrong_samples.sample_idx = {0, 2};
  CHECK_THROWS_AS(calibrate_scores(target, {wrong_samples}), ShapeError);

  ScoreSet wrong_len = target;
  wrong_len.scores.pop_back();
  wrong_len.is_member.pop_back();
  wrong_len.sample_idx.pop_back();
  CHECK_THROWS_AS(calibrate_scores(target, {wrong_len}), ShapeError);

  ScoreSet already = target;
  already.calibrated = true;
  CHECK_THROWS_AS(calibrate_scores(already, {target}), ShapeError);
  CHECK_THROWS_AS(calibrate_scores(target, {already}), ShapeError);
}

TEST_CASE("self-calibration forces AUC to one half") {
  test::OverfitFixture fx = test::make_overfit_fixture(5);
  ScoreSet target = score_batch(fx.target, fx.data, test::eval_indices(fx.split),
                                test::eval_bits(fx.split), ScoreKind::kLoss);
  ScoreSet cal = calibrate_scores(target, {target});
  CHECK(std::abs(auc(cal) - 0.5) <= 1e-12);
}

TEST_CASE("adding a constant to target scores shifts calibrated scores, not AUC") {
  std::mt19937_64 rng(66);
  ScoreSet target = test::random_score_set(rng, 50, false);
  ScoreSet ref = target;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : ref.scores) v = gauss(rng);

  ScoreSet cal = calibrate_scores(target, {ref});
  ScoreSet shifted_target = target;
  for (double& v : shifted_target.scores) v += 2.75;
  ScoreSet shifted_cal = calibrate_scores(shifted_target, {ref});

  for (std::size_t i = 0; i < cal.size(); ++i) {
    CHECK(shifted_cal.scores[i] == doctest::Approx(cal.scores[i] + 2.75).epsilon(1e-12));
  }
  CHECK(auc(shifted_cal) == auc(cal));
}

TEST_CASE("calibrated gap rule on crafted models") {
  // 1-d two-class models: `right` classifies positives as class 0, `wrong`
  // is its mirror image.
  Model right = init_mlp({{1, 2}}, 0);
  std::fill(right.layers[0].weights.data.begin(),
            right.layers[0].weights.data.end(), 0.0);
  right.layers[0].weights(0, 0) = 2.0;
  right.layers[0].weights(1, 0) = -2.0;
  Model wrong = right;
  wrong.layers[0].weights(0, 0) = -2.0;
  wrong.layers[0].weights(1, 0) = 2.0;

  Matrix features(2, 1);
  features(0, 0) = 1.0;
  features(1, 0) = -1.0;
  Dataset data = make_dataset(features, {0, 0}, 2);
  std::vector<std::size_t> idx{0, 1};

  // Reference identical to the target: the conjunction is contradictory.
  CHECK(calibrated_gap_decide(right, right, data, idx) ==
        std::vector<bool>{false, false});

  // Target right and reference wrong flags the sample.
  CHECK(calibrated_gap_decide(right, wrong, data, idx) ==
        std::vector<bool>{true, false});
}

TEST_CASE("calibrated gap accuracy identity on an overfit pair") {
  test::OverfitFixture fx = test::make_overfit_fixture(6);
  CalibrationConfig cfg;
  cfg.reference_train_config = fx.train_cfg;
  Model reference =
      train_references(fx.data, fx.split.shadow_idx, cfg, fx.target, 321)[0];

  std::vector<bool> member_hits =
      calibrated_gap_decide(fx.target, reference, fx.data, fx.split.member_idx);
  std::vector<bool> nonmember_hits =
      calibrated_gap_decide(fx.target, reference, fx.data, fx.split.nonmember_idx);

  double r_m = 0.0, f = 0.0;
  for (bool hit : member_hits) r_m += hit ? 1.0 : 0.0;
  for (bool hit : nonmember_hits) f += hit ? 1.0 : 0.0;
  r_m /= static_cast<double>(member_hits.size());
  f /= static_cast<double>(nonmember_hits.size());

  double correct = 0.0;
  for (bool hit : member_hits) correct += hit ? 1.0 : 0.0;
  for (bool hit : nonmember_hits) correct += hit ? 0.0 : 1.0;
  const double empirical =
      correct / static_cast<double>(member_hits.size() + nonmember_hits.size());

  CHECK(std::abs(empirical - 0.5 * (r_m + 1.0 - f)) < 1e-12);
}

TEST_CASE("calibrated gap accuracy formula") {
  CHECK(calibrated_gap_accuracy(1.0, 0.0, 0.0, 0.0) == 1.0);
  CHECK(calibrated_gap_accuracy(0.7, 0.7, 0.0, 0.0) == 0.5);

  // Agrees with an independently written expression everywhere.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int round = 0; round < 200; ++round) {
    const double pt = unit(rng), pe = unit(rng), e1 = unit(rng), e2 = unit(rng);
    const double expected = 0.5 * (1.0 - e2 + pt - pe + e1);
    CHECK(calibrated_gap_accuracy(pt, pe, e1, e2) == expected);
  }

  // In the regime where the reference rarely rescues target mistakes on
  // members but often matches it on non-members, the calibrated variant
  // sits below the plain gap accuracy (1 + p_train - p_test) / 2.
  std::uniform_real_distribution<double> eps1(0.0, 0.02), eps2(0.08, 0.12);
  for (int round = 0; round < 100; ++round) {
    const double pt = 0.95, pe = 0.75;
    const double e1 = eps1(rng), e2 = eps2(rng);
    CHECK(calibrated_gap_accuracy(pt, pe, e1, e2) < 0.5 * (1.0 + pt - pe));
  }

  CHECK_THROWS_AS(calibrated_gap_accuracy(-0.1, 0.5, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(calibrated_gap_accuracy(0.5, 1.1, 0.0, 0.0), ConfigError);
}

TEST_CASE("single-reference calibrated gap equals the thresholded gap score") {
  test::OverfitFixture fx = test::make_overfit_fixture(7);
  CalibrationConfig cfg;
  cfg.reference_train_config = fx.train_cfg;
  Model reference =
      train_references(fx.data, fx.split.shadow_idx, cfg, fx.target, 7777)[0];

  const std::vector<std::size_t> idx = test::eval_indices(fx.split);
  const std::vector<bool> bits = test::eval_bits(fx.split);
  ScoreSet target_gap = score_batch(fx.target, fx.data, idx, bits, ScoreKind::kGap);
  ScoreSet ref_gap = score_batch(reference, fx.data, idx, bits, ScoreKind::kGap);
  ScoreSet cal = calibrate_scores(target_gap, {ref_gap});

  // Calibrated gap score 1 means "target right and reference wrong" --
  // exactly the conjunction rule.
  std::vector<bool> rule = calibrated_gap_decide(fx.target, reference, fx.data, idx);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    CHECK(rule[i] == (cal.scores[i] == 1.0));
  }
}
