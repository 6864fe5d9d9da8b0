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

// Reports persist as versioned dotted key=value text, the same shape as the
// config format, so they stay diffable and greppable. Doubles use the
// shortest round-trip representation; identical reports serialize to
// identical bytes.

#include <fstream>
#include <sstream>

#include "mia/config.hpp"
#include "mia/errors.hpp"
#include "mia/harness.hpp"

namespace mia {

namespace {

constexpr char kReportVersion[] = "miaudit.report.v1";

std::string sanitize_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(line);
    }
  }

  const std::string& raw(const char* what) {
    if (pos_ >= lines_.size()) {
      throw IoError(std::string("report truncated, expected ") + what);
    }
    return lines_[pos_++];
  }

  // Next line must be "<key>=..."; returns the value part.
  std::string expect(const std::string& key) {
    const std::string& line = raw(key.c_str());
    if (line.size() < key.size() + 1 || line.compare(0, key.size(), key) != 0 ||
        line[key.size()] != '=') {
      throw IoError("report line '" + line + "' does not match expected key '" +
                    key + "'");
    }
    return line.substr(key.size() + 1);
  }

  double expect_double(const std::string& key) {
    return parse_double_str(expect(key), key);
  }

  std::uint64_t expect_u64(const std::string& key) {
    return parse_u64(expect(key), key);
  }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

std::vector<double> parse_fields(const std::string& value, std::size_t count,
                                 const std::string& what) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double_str(tok, what));
  if (out.size() != count) {
    throw IoError("expected " + std::to_string(count) + " fields in " + what +
                  ", got " + std::to_string(out.size()));
  }
  return out;
}

void write_attack_report(std::string& out, const std::string& prefix,
                         std::size_t t, const AttackReport& r) {
  auto add = [&out, &prefix](const std::string& suffix, const std::string& value) {
    out += prefix;
    out += suffix;
    out += '=';
    out += value;
    out += '\n';
  };
  add("t", std::to_string(t));
  add("seed", std::to_string(r.seed));
  add("auc", format_double(r.auc));
  add("accuracy", format_double(r.accuracy));
  add("optimal_threshold", format_double(r.optimal_threshold));
  add("ppv", format_double(r.ppv));
  add("ppv_zero_fpr_count", std::to_string(r.ppv_zero_fpr_count));
  add("provenance", sanitize_line(r.provenance));
  add("tpr_count", std::to_string(r.tpr_at_fpr.size()));
  for (std::size_t j = 0; j < r.tpr_at_fpr.size(); ++j) {
    add("tpr." + std::to_string(j), format_double(r.tpr_at_fpr[j].first) + " " +
                                        format_double(r.tpr_at_fpr[j].second));
  }
  add("roc_count", std::to_string(r.roc.points.size()));
  for (std::size_t j = 0; j < r.roc.points.size(); ++j) {
    const RocPoint& p = r.roc.points[j];
    add("roc." + std::to_string(j), format_double(p.fpr) + " " +
                                        format_double(p.tpr) + " " +
                                        format_double(p.threshold));
  }
  add("pr_count", std::to_string(r.pr.points.size()));
  for (std::size_t j = 0; j < r.pr.points.size(); ++j) {
    const PrPoint& p = r.pr.points[j];
    add("pr." + std::to_string(j), format_double(p.recall) + " " +
                                       format_double(p.precision) + " " +
                                       format_double(p.threshold));
  }
}

AttackReport read_attack_report(LineReader& reader, const std::string& prefix,
                                std::size_t* t_out) {
  AttackReport r;
  *t_out = reader.expect_u64(prefix + "t");
  r.seed = reader.expect_u64(prefix + "seed");
  r.auc = reader.expect_double(prefix + "auc");
  r.accuracy = reader.expect_double(prefix + "accuracy");
  r.optimal_threshold = reader.expect_double(prefix + "optimal_threshold");
  r.ppv = reader.expect_double(prefix + "ppv");
  r.ppv_zero_fpr_count = reader.expect_u64(prefix + "ppv_zero_fpr_count");
  r.provenance = reader.expect(prefix + "provenance");
  const std::size_t tprs = reader.expect_u64(prefix + "tpr_count");
  for (std::size_t j = 0; j < tprs; ++j) {
    std::vector<double> f = parse_fields(
        reader.expect(prefix + "tpr." + std::to_string(j)), 2, "tpr point");
    r.tpr_at_fpr.emplace_back(f[0], f[1]);
  }
  const std::size_t rocs = reader.expect_u64(prefix + "roc_count");
  for (std::size_t j = 0; j < rocs; ++j) {
    std::vector<double> f = parse_fields(
        reader.expect(prefix + "roc." + std::to_string(j)), 3, "roc point");
    r.roc.points.push_back({f[0], f[1], f[2]});
  }
  const std::size_t prs = reader.expect_u64(prefix + "pr_count");
  for (std::size_t j = 0; j < prs; ++j) {
    std::vector<double> f = parse_fields(
        reader.expect(prefix + "pr." + std::to_string(j)), 3, "pr point");
    r.pr.points.push_back({f[0], f[1], f[2]});
  }
  return r;
}

}  // namespace

void write_report(const ExperimentReport& report, std::ostream& out) {
  std::string text = kReportVersion;
  text += '\n';
  auto add = [&text](const std::string& key, const std::string& value) {
    text += key;
    text += '=';
    text += value;
    text += '\n';
  };

  add("meta.requested_t", std::to_string(report.requested_t));
  add("meta.effective_t", std::to_string(report.effective_t));
  add("meta.failure_count", std::to_string(report.failures.size()));
  for (std::size_t i = 0; i < report.failures.size(); ++i) {
    const std::string p = "failure." + std::to_string(i) + ".";
    add(p + "rep", std::to_string(report.failures[i].t));
    add(p + "stage", sanitize_line(report.failures[i].stage));
    add(p + "message", sanitize_line(report.failures[i].message));
  }
  for (const auto& [key, value] : config_to_key_values(report.config)) {
    add("config." + key, value);
  }
  add("meta.cell_count", std::to_string(report.cells.size()));
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    const CellResult& cell = report.cells[c];
    const std::string p = "cell." + std::to_string(c) + ".";
    add(p + "kind", to_string(cell.key.kind));
    add(p + "calibrated", cell.key.calibrated ? "1" : "0");
    add(p + "member_ratio", format_double(cell.key.member_ratio));
    add(p + "rep_count", std::to_string(cell.reps.size()));
    add(p + "agg.auc", format_double(cell.aggregate.auc.mean) + " " +
                           format_double(cell.aggregate.auc.stddev));
    add(p + "agg.accuracy", format_double(cell.aggregate.accuracy.mean) + " " +
                                format_double(cell.aggregate.accuracy.stddev));
    add(p + "agg.ppv", format_double(cell.aggregate.ppv.mean) + " " +
                           format_double(cell.aggregate.ppv.stddev));
    add(p + "agg.tpr_count", std::to_string(cell.aggregate.tpr_at_fpr.size()));
    for (std::size_t j = 0; j < cell.aggregate.tpr_at_fpr.size(); ++j) {
      const auto& [level, agg] = cell.aggregate.tpr_at_fpr[j];
      add(p + "agg.tpr." + std::to_string(j),
          format_double(level) + " " + format_double(agg.mean) + " " +
              format_double(agg.stddev));
    }
    for (std::size_t r = 0; r < cell.reps.size(); ++r) {
      write_attack_report(text, p + "rep." + std::to_string(r) + ".",
                          cell.rep_ids[r], cell.reps[r]);
    }
  }
  out << text;
  if (!out) throw IoError("failed writing report stream");
}

void write_report(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open report file for writing: " + path);
  write_report(report, out);
}

ExperimentReport read_report(std::istream& in) {
  LineReader reader(in);
  if (reader.raw("version line") != kReportVersion) {
    throw VersionError("unrecognized report version tag");
  }

  ExperimentReport report;
  report.requested_t = reader.expect_u64("meta.requested_t");
  report.effective_t = reader.expect_u64("meta.effective_t");
  const std::size_t failures = reader.expect_u64("meta.failure_count");
  for (std::size_t i = 0; i < failures; ++i) {
    const std::string p = "failure." + std::to_string(i) + ".";
    RepFailure f;
    f.t = reader.expect_u64(p + "rep");
    f.stage = reader.expect(p + "stage");
    f.message = reader.expect(p + "message");
    report.failures.push_back(std::move(f));
  }

  KeyValueList config_entries;
  for (const auto& [key, value] : config_to_key_values(ExperimentConfig{})) {
    config_entries.emplace_back(key, reader.expect("config." + key));
  }
  report.config = build_experiment_config(config_entries);

  const std::size_t cells = reader.expect_u64("meta.cell_count");
  for (std::size_t c = 0; c < cells; ++c) {
    const std::string p = "cell." + std::to_string(c) + ".";
    CellResult cell;
    cell.key.kind = score_kind_from_string(reader.expect(p + "kind"));
    cell.key.calibrated = reader.expect(p + "calibrated") == "1";
    cell.key.member_ratio = reader.expect_double(p + "member_ratio");
    const std::size_t reps = reader.expect_u64(p + "rep_count");
    {
      std::vector<double> f = parse_fields(reader.expect(p + "agg.auc"), 2, "agg.auc");
      cell.aggregate.auc = {f[0], f[1]};
    }
    {
      std::vector<double> f =
          parse_fields(reader.expect(p + "agg.accuracy"), 2, "agg.accuracy");
      cell.aggregate.accuracy = {f[0], f[1]};
    }
    {
      std::vector<double> f = parse_fields(reader.expect(p + "agg.ppv"), 2, "agg.ppv");
      cell.aggregate.ppv = {f[0], f[1]};
    }
    const std::size_t tprs = reader.expect_u64(p + "agg.tpr_count");
    for (std::size_t j = 0; j < tprs; ++j) {
      std::vector<double> f = parse_fields(
          reader.expect(p + "agg.tpr." + std::to_string(j)), 3, "agg.tpr");
      cell.aggregate.tpr_at_fpr.emplace_back(f[0], ScalarAggregate{f[1], f[2]});
    }
    for (std::size_t r = 0; r < reps; ++r) {
      std::size_t t = 0;
      cell.reps.push_back(
          read_attack_report(reader, p + "rep." + std::to_string(r) + ".", &t));
      cell.rep_ids.push_back(t);
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

ExperimentReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report file: " + path);
  return read_report(in);
}

}  // namespace mia
