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

#include "mia/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "mia/errors.hpp"

namespace mia {

namespace {

constexpr char kModelVersion[] = "miaudit.model.v1";

void check_architecture(const Architecture& arch) {
  if (arch.layer_widths.size() < 2) {
    throw ConfigError("architecture needs at least input and output widths");
  }
  for (std::size_t w : arch.layer_widths) {
    if (w == 0) throw ConfigError("architecture widths must be positive");
  }
}

void check_input(const Model& model, std::span<const double> x) {
  if (x.size() != model.arch.layer_widths.front()) {
    throw ShapeError("input has " + std::to_string(x.size()) +
                     " features, model expects " +
                     std::to_string(model.arch.layer_widths.front()));
  }
}

void check_label(const Model& model, int y) {
  const std::size_t c = model.arch.layer_widths.back();
  if (y < 0 || static_cast<std::size_t>(y) >= c) {
    throw ShapeError("label " + std::to_string(y) + " out of range for " +
                     std::to_string(c) + " classes");
  }
}

void softmax_inplace(std::vector<double>& logits) {
  double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - max_logit);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

struct ForwardTrace {
  // activations[0] is the input; activations[l+1] the output of layer l
  // (post-ReLU for hidden layers, softmax probabilities for the last).
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> pre_activations;  // one per layer
};

ForwardTrace forward_trace(const Model& model, std::span<const double> x) {
  ForwardTrace trace;
  trace.activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const DenseLayer& layer = model.layers[l];
    std::vector<double> z(layer.biases);
    const std::vector<double>& a = trace.activations.back();
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      double acc = z[r];
      for (std::size_t c = 0; c < layer.weights.cols; ++c) {
        acc += layer.weights(r, c) * a[c];
      }
      z[r] = acc;
    }
    trace.pre_activations.push_back(z);
    if (l + 1 < model.layers.size()) {
      for (double& v : z) v = std::max(v, 0.0);
    } else {
      softmax_inplace(z);
    }
    trace.activations.push_back(std::move(z));
  }
  return trace;
}

double clamped_log(double p) {
  return std::log(std::clamp(p, kProbClamp, 1.0));
}

// Backprop through softmax + cross-entropy; accumulates the flat gradient
// into `grad` (scaled by `scale`) and returns the clamped loss.
double backprop_accumulate(const Model& model, std::span<const double> x, int y,
                           double scale, std::vector<double>& grad) {
  ForwardTrace trace = forward_trace(model, x);
  const std::vector<double>& probs = trace.activations.back();
  const double loss = -clamped_log(probs[static_cast<std::size_t>(y)]);

  std::vector<double> delta = probs;
  delta[static_cast<std::size_t>(y)] -= 1.0;

  // Walk layers backwards; grad layout is layer-major (weights then biases).
  std::vector<std::size_t> offsets(model.layers.size());
  std::size_t off = 0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    offsets[l] = off;
    off += model.layers[l].weights.data.size() + model.layers[l].biases.size();
  }

  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const DenseLayer& layer = model.layers[li];
    const std::vector<double>& input = trace.activations[li];
    double* wg = grad.data() + offsets[li];
    double* bg = wg + layer.weights.data.size();
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      const double dr = delta[r] * scale;
      for (std::size_t c = 0; c < layer.weights.cols; ++c) {
        wg[r * layer.weights.cols + c] += dr * input[c];
      }
      bg[r] += dr;
    }
    if (li == 0) break;
    std::vector<double> prev(layer.weights.cols, 0.0);
    for (std::size_t c = 0; c < layer.weights.cols; ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r < layer.weights.rows; ++r) {
        acc += layer.weights(r, c) * delta[r];
      }
      // ReLU gate of the upstream hidden layer.
      prev[c] = trace.pre_activations[li - 1][c] > 0.0 ? acc : 0.0;
    }
    delta = std::move(prev);
  }
  return loss;
}

void format_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

double parse_double(const std::string& tok, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw IoError(std::string("cannot parse ") + what + ": '" + tok + "'");
  }
  return v;
}

}  // namespace

std::size_t param_count(const Architecture& arch) {
  check_architecture(arch);
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
    total += arch.layer_widths[l] * arch.layer_widths[l + 1] + arch.layer_widths[l + 1];
  }
  return total;
}

Model init_mlp(const Architecture& arch, std::uint64_t seed) {
  check_architecture(arch);
  Model model;
  model.arch = arch;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
    const std::size_t fan_in = arch.layer_widths[l];
    const std::size_t fan_out = arch.layer_widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0)};
    for (double& w : layer.weights.data) {
      do {
        w = dist(rng);
      } while (std::abs(w) >= bound);
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

std::vector<double> forward(const Model& model, std::span<const double> x) {
  check_input(model, x);
  return forward_trace(model, x).activations.back();
}

int predict_class(const Model& model, std::span<const double> x) {
  std::vector<double> probs = forward(model, x);
  int best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

double per_example_loss(const Model& model, std::span<const double> x, int y) {
  check_input(model, x);
  check_label(model, y);
  std::vector<double> probs = forward_trace(model, x).activations.back();
  return -clamped_log(probs[static_cast<std::size_t>(y)]);
}

std::vector<double> per_example_gradient(const Model& model,
                                         std::span<const double> x, int y) {
  check_input(model, x);
  check_label(model, y);
  std::vector<double> grad(param_count(model.arch), 0.0);
  backprop_accumulate(model, x, y, 1.0, grad);
  return grad;
}

double per_example_grad_norm(const Model& model, std::span<const double> x, int y) {
  std::vector<double> grad = per_example_gradient(model, x, y);
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  return std::sqrt(sq);
}

Model train(const Model& model, const Dataset& data,
            std::span<const std::size_t> idx, const TrainConfig& cfg) {
  if (idx.empty()) throw ConfigError("training index list is empty");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (cfg.nesterov_momentum < 0.0 || cfg.nesterov_momentum >= 1.0) {
    throw ConfigError("nesterov_momentum must lie in [0,1)");
  }
  if (cfg.weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");

  Model trained = model;
  if (cfg.epochs == 0) return trained;

  const std::size_t n = idx.size();
  const std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = cfg.epochs * batches;
  const std::size_t n_params = param_count(model.arch);

  std::vector<double> params = flatten_params(trained);
  std::vector<double> velocity(n_params, 0.0);
  std::vector<double> grad(n_params, 0.0);
  std::vector<std::size_t> order(idx.begin(), idx.end());
  std::mt19937_64 rng(cfg.seed);

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(begin + cfg.batch_size, n);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);

      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t sample = order[k];
        batch_loss += inv_batch *
                      backprop_accumulate(trained, data.row(sample),
                                          data.labels[sample], inv_batch, grad);
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainError("non-finite loss at epoch " + std::to_string(epoch) +
                         ", step " + std::to_string(step));
      }

      const double eta =
          cfg.cosine_schedule
              ? cfg.learning_rate * 0.5 *
                    (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) /
                                    static_cast<double>(total_steps)))
              : cfg.learning_rate;

      for (std::size_t p = 0; p < n_params; ++p) {
        const double g = grad[p] + cfg.weight_decay * params[p];
        velocity[p] = cfg.nesterov_momentum * velocity[p] - eta * g;
        params[p] += cfg.nesterov_momentum * velocity[p] - eta * g;
      }
      unflatten_params(trained, params);
      ++step;
    }
  }
  return trained;
}

double accuracy(const Model& model, const Dataset& data,
                std::span<const std::size_t> idx) {
  if (idx.empty()) throw ConfigError("accuracy over an empty index list");
  std::size_t correct = 0;
  for (std::size_t i : idx) {
    if (predict_class(model, data.row(i)) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

std::vector<double> flatten_params(const Model& model) {
  std::vector<double> flat;
  flat.reserve(param_count(model.arch));
  for (const DenseLayer& layer : model.layers) {
    flat.insert(flat.end(), layer.weights.data.begin(), layer.weights.data.end());
    flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
  }
  return flat;
}

void unflatten_params(Model& model, std::span<const double> flat) {
  if (flat.size() != param_count(model.arch)) {
    throw ShapeError("flat parameter vector has wrong length");
  }
  std::size_t off = 0;
  for (DenseLayer& layer : model.layers) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off),
                layer.weights.data.size(), layer.weights.data.begin());
    off += layer.weights.data.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off),
                layer.biases.size(), layer.biases.begin());
    off += layer.biases.size();
  }
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  std::string text = kModelVersion;
  text += "\narch=";
  for (std::size_t i = 0; i < model.arch.layer_widths.size(); ++i) {
    if (i) text += ' ';
    text += std::to_string(model.arch.layer_widths[i]);
  }
  text += '\n';
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const DenseLayer& layer = model.layers[l];
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      text += "layer." + std::to_string(l) + ".weight." + std::to_string(r) + "=";
      for (std::size_t c = 0; c < layer.weights.cols; ++c) {
        if (c) text += ' ';
        format_double(text, layer.weights(r, c));
      }
      text += '\n';
    }
    text += "layer." + std::to_string(l) + ".bias=";
    for (std::size_t r = 0; r < layer.biases.size(); ++r) {
      if (r) text += ' ';
      format_double(text, layer.biases[r]);
    }
    text += '\n';
  }
  out << text;
  if (!out) throw IoError("failed writing model file: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kModelVersion) {
    throw VersionError("unrecognized model file version in " + path);
  }
  if (!std::getline(in, line) || line.rfind("arch=", 0) != 0) {
    throw IoError("model file missing arch line: " + path);
  }
  Architecture arch;
  {
    std::istringstream widths(line.substr(5));
    std::size_t w = 0;
    while (widths >> w) arch.layer_widths.push_back(w);
  }
  check_architecture(arch);

  Model model = init_mlp(arch, 0);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    DenseLayer& layer = model.layers[l];
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      if (!std::getline(in, line)) throw IoError("truncated model file: " + path);
      const std::string key =
          "layer." + std::to_string(l) + ".weight." + std::to_string(r) + "=";
      if (line.rfind(key, 0) != 0) throw IoError("unexpected model line: " + line);
      std::istringstream vals(line.substr(key.size()));
      std::string tok;
      for (std::size_t c = 0; c < layer.weights.cols; ++c) {
        if (!(vals >> tok)) throw IoError("short weight row in model file: " + path);
        layer.weights(r, c) = parse_double(tok, "weight");
      }
    }
    if (!std::getline(in, line)) throw IoError("truncated model file: " + path);
    const std::string key = "layer." + std::to_string(l) + ".bias=";
    if (line.rfind(key, 0) != 0) throw IoError("unexpected model line: " + line);
    std::istringstream vals(line.substr(key.size()));
    std::string tok;
    for (std::size_t r = 0; r < layer.biases.size(); ++r) {
      if (!(vals >> tok)) throw IoError("short bias row in model file: " + path);
      layer.biases[r] = parse_double(tok, "bias");
    }
  }
  return model;
}

}  // namespace mia
