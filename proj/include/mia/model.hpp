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
#include <span>
#include <string>
#include <vector>

#include "mia/data.hpp"
#include "mia/matrix.hpp"

namespace mia {

/// Layer widths [n_inputs, hidden..., n_outputs]; at least two entries.
struct Architecture {
  std::vector<std::size_t> layer_widths;

  bool operator==(const Architecture&) const = default;
};

struct DenseLayer {
  Matrix weights;              // out x in
  std::vector<double> biases;  // out

  bool operator==(const DenseLayer&) const = default;
};

/// Feed-forward classifier: ReLU hidden layers, softmax output.
/// Immutable value type after construction; all operations below are pure.
struct Model {
  Architecture arch;
  std::vector<DenseLayer> layers;

  bool operator==(const Model&) const = default;
};

/// Probabilities are clamped to [kProbClamp, 1] before every logarithm so
/// losses and scores stay finite under underflow.
inline constexpr double kProbClamp = 1e-12;

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  double nesterov_momentum = 0.9;
  double weight_decay = 1e-4;
  bool cosine_schedule = true;
  std::uint64_t seed = 0;
};

/// Glorot-uniform initialization: weights ~ U(-a, a) with
/// a = sqrt(6 / (fan_in + fan_out)) per layer, biases zero.
/// Deterministic in the seed.
Model init_mlp(const Architecture& arch, std::uint64_t seed);

std::size_t param_count(const Architecture& arch);

/// Softmax class probabilities for input x (|x| must equal the input width).
std::vector<double> forward(const Model& model, std::span<const double> x);

/// Argmax class with ties broken toward the smallest class index.
int predict_class(const Model& model, std::span<const double> x);

/// Cross-entropy loss -log(p_y) with the probability clamp applied.
double per_example_loss(const Model& model, std::span<const double> x, int y);

/// Gradient of the cross-entropy loss w.r.t. every model parameter,
/// flattened layer by layer (weights row-major, then biases). Computed
/// analytically by backpropagation.
std::vector<double> per_example_gradient(const Model& model,
                                         std::span<const double> x, int y);

/// L2 norm of per_example_gradient.
double per_example_grad_norm(const Model& model, std::span<const double> x, int y);

/// Mini-batch SGD with Nesterov momentum (v <- mu*v - eta*g;
/// theta <- theta + mu*v - eta*g), optional L2 weight decay and optional
/// cosine-annealed learning rate eta_t = eta0 * (1 + cos(pi*t/T)) / 2 over
/// the total step count T. Shuffles per epoch, deterministically in
/// cfg.seed. Returns the trained model; the input model is untouched.
/// epochs == 0 returns a copy of the input. Throws TrainError (with epoch
/// and step) if the batch loss turns non-finite.
Model train(const Model& model, const Dataset& data,
            std::span<const std::size_t> idx, const TrainConfig& cfg);

/// Fraction of indexed samples with predict_class(x) == y.
double accuracy(const Model& model, const Dataset& data,
                std::span<const std::size_t> idx);

std::vector<double> flatten_params(const Model& model);
void unflatten_params(Model& model, std::span<const double> flat);

/// Text serialization (versioned, lossless for finite doubles).
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace mia
