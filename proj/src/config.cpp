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

#include "mia/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mia/errors.hpp"

namespace mia {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cur = trim(cur);
  if (!cur.empty() || !items.empty()) items.push_back(cur);
  return items;
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("expected true/false for " + key + ", got '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : split_list(s)) {
    if (item.empty()) throw ConfigError("empty entry in list " + key);
    out.push_back(parse_double_str(item, key));
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double_str(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("cannot parse number for " + what + ": '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("cannot parse integer for " + what + ": '" + s + "'");
  }
  return v;
}

KeyValueList parse_config_text(std::istream& in) {
  KeyValueList entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not key=value: '" + line + "'");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

KeyValueList read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  return parse_config_text(in);
}

KeyValueList env_config_entries() {
  KeyValueList entries;
  if (const char* seed = std::getenv("MIAUDIT_BASE_SEED")) {
    entries.emplace_back("experiment.base_seed", seed);
  }
  return entries;
}

ExperimentConfig build_experiment_config(const KeyValueList& entries) {
  ExperimentConfig cfg;

  // Later entries win; remember which reference.* keys were set explicitly.
  std::map<std::string, std::string> merged;
  for (const auto& [key, value] : entries) merged[key] = value;

  auto take = [&merged](const std::string& key) -> const std::string* {
    auto it = merged.find(key);
    return it == merged.end() ? nullptr : &it->second;
  };

  std::set<std::string> known;
  auto handle = [&](const std::string& key, auto&& apply) {
    known.insert(key);
    if (const std::string* v = take(key)) apply(*v);
  };

  handle("data.source", [&](const std::string& v) {
    if (v == "synthetic") cfg.data.kind = DataSource::Kind::kSynthetic;
    else if (v == "csv") cfg.data.kind = DataSource::Kind::kCsv;
    else throw ConfigError("data.source must be synthetic or csv, got '" + v + "'");
  });
  handle("data.synthetic.n_samples", [&](const std::string& v) {
    cfg.data.synthetic.n_samples = parse_u64(v, "data.synthetic.n_samples");
  });
  handle("data.synthetic.n_features", [&](const std::string& v) {
    cfg.data.synthetic.n_features = parse_u64(v, "data.synthetic.n_features");
  });
  handle("data.synthetic.n_classes", [&](const std::string& v) {
    cfg.data.synthetic.n_classes =
        static_cast<int>(parse_u64(v, "data.synthetic.n_classes"));
  });
  handle("data.synthetic.cluster_spread", [&](const std::string& v) {
    cfg.data.synthetic.cluster_spread = parse_double_str(v, "data.synthetic.cluster_spread");
  });
  handle("data.synthetic.seed", [&](const std::string& v) {
    cfg.data.synthetic.seed = parse_u64(v, "data.synthetic.seed");
  });
  handle("data.csv.path", [&](const std::string& v) { cfg.data.csv_path = v; });
  handle("data.csv.label_column", [&](const std::string& v) {
    cfg.data.csv_label_column = v;
  });

  handle("split.member_fraction", [&](const std::string& v) {
    cfg.member_fraction = parse_double_str(v, "split.member_fraction");
  });
  handle("split.shadow_fraction", [&](const std::string& v) {
    cfg.shadow_fraction = parse_double_str(v, "split.shadow_fraction");
  });

  handle("model.hidden_widths", [&](const std::string& v) {
    cfg.hidden_widths.clear();
    if (v == "auto" || v.empty()) return;
    for (const std::string& item : split_list(v)) {
      cfg.hidden_widths.push_back(parse_u64(item, "model.hidden_widths"));
    }
  });

  auto handle_train = [&](const std::string& prefix, TrainConfig& tc) {
    handle(prefix + ".epochs", [&](const std::string& v) {
      tc.epochs = parse_u64(v, prefix + ".epochs");
    });
    handle(prefix + ".batch_size", [&](const std::string& v) {
      tc.batch_size = parse_u64(v, prefix + ".batch_size");
    });
    handle(prefix + ".learning_rate", [&](const std::string& v) {
      tc.learning_rate = parse_double_str(v, prefix + ".learning_rate");
    });
    handle(prefix + ".momentum", [&](const std::string& v) {
      tc.nesterov_momentum = parse_double_str(v, prefix + ".momentum");
    });
    handle(prefix + ".weight_decay", [&](const std::string& v) {
      tc.weight_decay = parse_double_str(v, prefix + ".weight_decay");
    });
    handle(prefix + ".cosine_schedule", [&](const std::string& v) {
      tc.cosine_schedule = parse_bool(v, prefix + ".cosine_schedule");
    });
  };
  handle_train("target", cfg.target);

  handle("calibration.mode", [&](const std::string& v) {
    if (v == "scratch") cfg.calibration.mode = CalibrationMode::kFromScratch;
    else if (v == "forgetting") cfg.calibration.mode = CalibrationMode::kForgetting;
    else throw ConfigError("calibration.mode must be scratch or forgetting, got '" + v + "'");
  });
  handle("calibration.n_reference_models", [&](const std::string& v) {
    cfg.calibration.n_reference_models = parse_u64(v, "calibration.n_reference_models");
  });
  handle("calibration.shadow_subsample_fraction", [&](const std::string& v) {
    cfg.calibration.shadow_subsample_fraction =
        parse_double_str(v, "calibration.shadow_subsample_fraction");
  });

  // Reference training follows the target's recipe unless overridden;
  // forgetting mode defaults to a quarter of the target's epoch budget.
  cfg.calibration.reference_train_config = cfg.target;
  if (cfg.calibration.mode == CalibrationMode::kForgetting) {
    cfg.calibration.reference_train_config.epochs =
        std::max<std::size_t>(1, cfg.target.epochs / 4);
  }
  handle_train("reference", cfg.calibration.reference_train_config);

  handle("merlin.sigma_scale", [&](const std::string& v) {
    cfg.merlin_sigma_scale = parse_double_str(v, "merlin.sigma_scale");
  });
  handle("merlin.trials", [&](const std::string& v) {
    cfg.merlin_trials = static_cast<int>(parse_u64(v, "merlin.trials"));
  });

  handle("scores.kinds", [&](const std::string& v) {
    cfg.kinds.clear();
    for (const std::string& item : split_list(v)) {
      cfg.kinds.push_back(score_kind_from_string(item));
    }
    if (cfg.kinds.empty()) throw ConfigError("scores.kinds must not be empty");
  });

  handle("eval.fpr_levels", [&](const std::string& v) {
    cfg.fpr_levels = parse_double_list(v, "eval.fpr_levels");
  });
  handle("eval.member_ratios", [&](const std::string& v) {
    cfg.member_ratios = parse_double_list(v, "eval.member_ratios");
  });

  handle("experiment.repetitions", [&](const std::string& v) {
    cfg.repetitions = parse_u64(v, "experiment.repetitions");
  });
  handle("experiment.base_seed", [&](const std::string& v) {
    cfg.base_seed = parse_u64(v, "experiment.base_seed");
  });

  for (const auto& [key, value] : merged) {
    if (!known.contains(key)) throw ConfigError("unknown config key: " + key);
  }

  // Field-level validation that does not need the dataset.
  if (cfg.repetitions < 1) throw ConfigError("experiment.repetitions must be >= 1");
  if (cfg.kinds.empty()) throw ConfigError("scores.kinds must not be empty");
  for (double level : cfg.fpr_levels) {
    if (level < 0.0 || level > 1.0) throw ConfigError("fpr levels must lie in [0,1]");
  }
  if (cfg.member_ratios.empty()) throw ConfigError("eval.member_ratios must not be empty");
  for (double ratio : cfg.member_ratios) {
    if (!(ratio > 0.0) || ratio > 1.0) {
      throw ConfigError("member ratios must lie in (0,1]");
    }
  }
  if (cfg.merlin_trials < 1) throw ConfigError("merlin.trials must be >= 1");
  if (!(cfg.merlin_sigma_scale > 0.0)) {
    throw ConfigError("merlin.sigma_scale must be positive");
  }
  if (cfg.data.kind == DataSource::Kind::kCsv && cfg.data.csv_path.empty()) {
    throw ConfigError("data.csv.path is required for CSV data");
  }
  return cfg;
}

KeyValueList config_to_key_values(const ExperimentConfig& cfg) {
  KeyValueList kv;
  auto add = [&kv](const std::string& key, const std::string& value) {
    kv.emplace_back(key, value);
  };

  add("data.source",
      cfg.data.kind == DataSource::Kind::kSynthetic ? "synthetic" : "csv");
  add("data.synthetic.n_samples", std::to_string(cfg.data.synthetic.n_samples));
  add("data.synthetic.n_features", std::to_string(cfg.data.synthetic.n_features));
  add("data.synthetic.n_classes", std::to_string(cfg.data.synthetic.n_classes));
  add("data.synthetic.cluster_spread", format_double(cfg.data.synthetic.cluster_spread));
  add("data.synthetic.seed", std::to_string(cfg.data.synthetic.seed));
  add("data.csv.path", cfg.data.csv_path);
  add("data.csv.label_column", cfg.data.csv_label_column);
  add("split.member_fraction", format_double(cfg.member_fraction));
  add("split.shadow_fraction", format_double(cfg.shadow_fraction));
  {
    std::string widths;
    for (std::size_t i = 0; i < cfg.hidden_widths.size(); ++i) {
      if (i) widths += ',';
      widths += std::to_string(cfg.hidden_widths[i]);
    }
    add("model.hidden_widths", cfg.hidden_widths.empty() ? "auto" : widths);
  }

  auto add_train = [&](const std::string& prefix, const TrainConfig& tc) {
    add(prefix + ".epochs", std::to_string(tc.epochs));
    add(prefix + ".batch_size", std::to_string(tc.batch_size));
    add(prefix + ".learning_rate", format_double(tc.learning_rate));
    add(prefix + ".momentum", format_double(tc.nesterov_momentum));
    add(prefix + ".weight_decay", format_double(tc.weight_decay));
    add(prefix + ".cosine_schedule", tc.cosine_schedule ? "true" : "false");
  };
  add_train("target", cfg.target);

  add("calibration.mode",
      cfg.calibration.mode == CalibrationMode::kFromScratch ? "scratch" : "forgetting");
  add("calibration.n_reference_models",
      std::to_string(cfg.calibration.n_reference_models));
  add("calibration.shadow_subsample_fraction",
      format_double(cfg.calibration.shadow_subsample_fraction));
  add_train("reference", cfg.calibration.reference_train_config);

  add("merlin.sigma_scale", format_double(cfg.merlin_sigma_scale));
  add("merlin.trials", std::to_string(cfg.merlin_trials));

  {
    std::string kinds;
    for (std::size_t i = 0; i < cfg.kinds.size(); ++i) {
      if (i) kinds += ',';
      kinds += to_string(cfg.kinds[i]);
    }
    add("scores.kinds", kinds);
  }
  {
    std::string levels;
    for (std::size_t i = 0; i < cfg.fpr_levels.size(); ++i) {
      if (i) levels += ',';
      levels += format_double(cfg.fpr_levels[i]);
    }
    add("eval.fpr_levels", levels);
  }
  {
    std::string ratios;
    for (std::size_t i = 0; i < cfg.member_ratios.size(); ++i) {
      if (i) ratios += ',';
      ratios += format_double(cfg.member_ratios[i]);
    }
    add("eval.member_ratios", ratios);
  }
  add("experiment.repetitions", std::to_string(cfg.repetitions));
  add("experiment.base_seed", std::to_string(cfg.base_seed));
  return kv;
}

}  // namespace mia
