// Copyright 2026 The CWT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cwt/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "cwt/error.hpp"
#include "cwt/metrics.hpp"
#include "cwt/training.hpp"

namespace cwt {
namespace {

std::string fixed(double v, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string full(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? full(*v) : "NA"; }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

struct TableRow {
  std::string model;
  std::vector<std::string> cells;
};

std::string render(const std::vector<std::string>& sets, const std::vector<TableRow>& rows) {
  std::vector<std::string> header{"Model"};
  for (const std::string& s : sets) {
    header.push_back(s + " Dice");
    header.push_back(s + " Correlation");
  }
  header.push_back("Average Dice");
  header.push_back("Average Correlation");
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const TableRow& r : rows) {
    width[0] = std::max(width[0], r.model.size());
    for (std::size_t i = 0; i < r.cells.size(); ++i) width[i + 1] = std::max(width[i + 1], r.cells[i].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << (i ? " | " : "") << cells[i] << std::string(width[i] - cells[i].size(), ' ');
    }
    out << "\n";
  };
  line(header);
  std::size_t total = 0;
  for (const std::size_t w : width) total += w;
  out << std::string(total + 3 * (width.size() - 1), '-') << "\n";
  for (const TableRow& r : rows) {
    std::vector<std::string> cells{r.model};
    cells.insert(cells.end(), r.cells.begin(), r.cells.end());
    line(cells);
  }
  return out.str();
}

std::string short_opt(const std::optional<double>& v) { return v ? fixed(*v) : "NA"; }

}  // namespace

const SetSummary& EvaluationReport::summary(const std::string& model, const std::string& test_set) const {
  for (const SetSummary& s : summaries) {
    if (s.model == model && s.test_set == test_set) return s;
  }
  throw ContractViolation("report has no summary for " + model + " on " + test_set);
}

const PooledSummary& EvaluationReport::pooled_for(const std::string& model) const {
  for (const PooledSummary& p : pooled) {
    if (p.model == model) return p;
  }
  throw ContractViolation("report has no pooled summary for " + model);
}

EvaluationReport evaluate_models(const std::vector<NamedModel>& models, const std::vector<TestSet>& sets,
                                 double threshold, const MaskSink& sink) {
  if (models.empty()) throw ContractViolation("evaluate_models: no models");
  if (sets.empty()) throw ContractViolation("evaluate_models: no test sets");
  const Digest& arch = models.front().network.architecture_hash();
  std::set<std::string> names;
  for (const NamedModel& m : models) {
    if (m.network.architecture_hash() != arch) {
      throw IncompatibleError("evaluate_models: model " + m.name + " uses a different architecture");
    }
    if (!names.insert(m.name).second) throw ContractViolation("evaluate_models: duplicate model " + m.name);
  }
  std::vector<std::string> missing;
  std::vector<TestSet> sorted = sets;
  for (TestSet& s : sorted) {
    std::set<std::string> ids;
    for (const TestCase& c : s.cases) {
      if (!c.truth || !c.image) missing.push_back(s.name + "/" + c.case_id);
      if (!ids.insert(c.case_id).second) {
        throw ContractViolation("evaluate_models: duplicate case " + c.case_id + " in " + s.name);
      }
    }
    std::sort(s.cases.begin(), s.cases.end(),
              [](const TestCase& a, const TestCase& b) { return a.case_id < b.case_id; });
  }
  if (!missing.empty()) {
    std::string list;
    for (const std::string& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ValidationError("evaluate_models: missing truth mask or image for cases: " + list);
  }

  EvaluationReport r;
  for (const NamedModel& m : models) r.models.push_back(m.name);
  for (const TestSet& s : sorted) r.test_sets.push_back(s.name);

  // scores[set][model] -> per-case dice in case-id order.
  std::map<std::string, std::map<std::string, std::vector<double>>> scores;
  for (const NamedModel& m : models) {
    PooledSummary pooled{m.name, 0.0, std::nullopt};
    double r_sum = 0.0;
    std::size_t r_count = 0;
    for (const TestSet& s : sorted) {
      SetSummary summary{m.name, s.name, s.cases.size(), 0.0, std::nullopt};
      std::vector<double> predicted, truth;
      for (const TestCase& c : s.cases) {
        const SegmentationMask mask = predict_volume(m.network, *c.image, threshold);
        if (sink) sink(m.name, s.name, c.case_id, mask);
        CaseScore cs{m.name, s.name, c.case_id, dice(mask, *c.truth), lesion_volume_mm3(mask),
                     lesion_volume_mm3(*c.truth)};
        summary.mean_dice += cs.dice;
        predicted.push_back(cs.predicted_mm3);
        truth.push_back(cs.true_mm3);
        scores[s.name][m.name].push_back(cs.dice);
        r.cases.push_back(std::move(cs));
      }
      if (!s.cases.empty()) summary.mean_dice /= static_cast<double>(s.cases.size());
      try {
        summary.pearson = pearson(predicted, truth);
        r_sum += *summary.pearson;
        ++r_count;
      } catch (const Error&) {
        summary.pearson = std::nullopt;
      }
      pooled.mean_dice += summary.mean_dice;
      r.summaries.push_back(summary);
    }
    pooled.mean_dice /= static_cast<double>(sorted.size());
    if (r_count > 0) pooled.pearson = r_sum / static_cast<double>(r_count);
    r.pooled.push_back(pooled);
  }

  for (const TestSet& s : sorted) {
    for (std::size_t i = 0; i < models.size(); ++i) {
      for (std::size_t j = i + 1; j < models.size(); ++j) {
        PairwiseComparison pc{s.name, models[i].name, models[j].name, std::nullopt, std::nullopt, ""};
        const auto& a = scores[s.name][models[i].name];
        const auto& b = scores[s.name][models[j].name];
        std::vector<PairedScore> pairs;
        for (std::size_t k = 0; k < s.cases.size(); ++k) pairs.push_back({s.cases[k].case_id, a[k], b[k]});
        try {
          const WilcoxonResult w = wilcoxon_signed_rank(pairs);
          pc.statistic = w.statistic;
          pc.p_value = w.p_value;
          pc.note = w.exact ? "exact" : "normal";
        } catch (const DegenerateSampleError&) {
          pc.note = "degenerate";
        }
        r.pairwise.push_back(pc);
      }
    }
  }
  return r;
}

std::string report_csv(const EvaluationReport& r) {
  std::string out = "model,test_set,cases,mean_dice,pearson_r\n";
  for (const SetSummary& s : r.summaries) {
    out += s.model + "," + s.test_set + "," + std::to_string(s.cases) + "," + full(s.mean_dice) + "," +
           opt(s.pearson) + "\n";
  }
  return out;
}

std::string cases_csv(const EvaluationReport& r) {
  std::string out = "model,test_set,case_id,dice,predicted_mm3,true_mm3\n";
  for (const CaseScore& c : r.cases) {
    out += c.model + "," + c.test_set + "," + c.case_id + "," + full(c.dice) + "," + full(c.predicted_mm3) +
           "," + full(c.true_mm3) + "\n";
  }
  return out;
}

std::string pvalue_matrix_csv(const EvaluationReport& r) {
  std::string out = "test_set,model";
  for (const std::string& m : r.models) out += "," + m;
  out += "\n";
  for (const std::string& s : r.test_sets) {
    for (const std::string& a : r.models) {
      out += s + "," + a;
      for (const std::string& b : r.models) {
        std::string cell = "-";
        for (const PairwiseComparison& pc : r.pairwise) {
          if (pc.test_set == s && ((pc.model_a == a && pc.model_b == b) || (pc.model_a == b && pc.model_b == a))) {
            cell = pc.p_value ? full(*pc.p_value) : "degenerate";
          }
        }
        out += "," + cell;
      }
      out += "\n";
    }
  }
  return out;
}

std::string report_table(const EvaluationReport& r) {
  std::vector<TableRow> rows;
  for (const std::string& m : r.models) {
    TableRow row{m, {}};
    for (const std::string& s : r.test_sets) {
      const SetSummary& sum = r.summary(m, s);
      row.cells.push_back(fixed(sum.mean_dice));
      row.cells.push_back(short_opt(sum.pearson));
    }
    const PooledSummary& p = r.pooled_for(m);
    row.cells.push_back(fixed(p.mean_dice));
    row.cells.push_back(short_opt(p.pearson));
    rows.push_back(std::move(row));
  }
  return render(r.test_sets, rows);
}

std::string table_from_report_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "model,test_set,cases,mean_dice,pearson_r") {
    throw ParseError("report csv", "header", 0, "unexpected header");
  }
  std::vector<std::string> models, sets;
  std::map<std::pair<std::string, std::string>, std::pair<double, std::optional<double>>> cells;
  std::size_t offset = csv.find('\n') + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw ParseError("report csv", "row", offset, "expected 5 columns");
    try {
      const double d = std::stod(f[3]);
      const std::optional<double> p = f[4] == "NA" ? std::nullopt : std::optional<double>(std::stod(f[4]));
      cells[{f[0], f[1]}] = {d, p};
    } catch (const std::logic_error&) {
      throw ParseError("report csv", "mean_dice", offset, "not a number");
    }
    if (std::find(models.begin(), models.end(), f[0]) == models.end()) models.push_back(f[0]);
    if (std::find(sets.begin(), sets.end(), f[1]) == sets.end()) sets.push_back(f[1]);
    offset += line.size() + 1;
  }
  std::vector<TableRow> rows;
  for (const std::string& m : models) {
    TableRow row{m, {}};
    double dsum = 0.0, rsum = 0.0;
    std::size_t rn = 0;
    for (const std::string& s : sets) {
      const auto it = cells.find({m, s});
      if (it == cells.end()) throw ParseError("report csv", "row", offset, "missing " + m + "/" + s);
      row.cells.push_back(fixed(it->second.first));
      row.cells.push_back(short_opt(it->second.second));
      dsum += it->second.first;
      if (it->second.second) {
        rsum += *it->second.second;
        ++rn;
      }
    }
    row.cells.push_back(fixed(dsum / static_cast<double>(sets.size())));
    row.cells.push_back(rn ? fixed(rsum / static_cast<double>(rn)) : "NA");
    rows.push_back(std::move(row));
  }
  return render(sets, rows);
}

}  // namespace cwt
