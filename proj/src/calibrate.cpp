#include "fuzzcare/calibrate.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "fuzzcare/diagnosis.hpp"
#include "fuzzcare/error.hpp"

namespace fuzzcare {

namespace {

// rows x variables x terms
using DegreeTables = std::vector<std::vector<std::vector<double>>>;

std::vector<double> degrees_at(const std::vector<FuzzySet>& terms, double x) {
  std::vector<double> d;
  d.reserve(terms.size());
  for (const auto& t : terms) d.push_back(t.degree(x));
  return d;
}

double spacing_penalty(const Universe& u, const std::vector<double>& centers) {
  const double n = static_cast<double>(centers.size());
  double penalty = 0.0;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    const double even = u.lo + u.width() * static_cast<double>(j + 1) / (n + 1.0);
    const double dev = (centers[j] - even) / u.width();
    penalty += dev * dev;
  }
  return penalty;
}

std::vector<double> grid_points(const LinguisticVariable& v) {
  const auto& u = v.universe();
  const double step = calibration_step(v);
  std::vector<double> pts;
  for (int k = 1;; ++k) {
    const double x = u.lo + step * k;
    if (!(x < u.hi)) break;
    pts.push_back(x);
  }
  return pts;
}

// Calls visit(centres) for every strictly increasing n-subset of grid, in
// lexicographic order.
void for_each_combination(const std::vector<double>& grid, std::size_t n,
                          const std::function<void(const std::vector<double>&)>& visit) {
  if (n > grid.size()) return;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::vector<double> centers(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) centers[i] = grid[idx[i]];
    visit(centers);
    std::size_t i = n;
    while (i > 0 && idx[i - 1] == grid.size() - n + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t k = i; k < n; ++k) idx[k] = idx[k - 1] + 1;
  }
}

std::size_t matches(const RuleBase& base, const DegreeTables& tables, const std::vector<LabeledRecord>& rows,
                    std::size_t resolution) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (infer(base, tables[r], resolution).label == rows[r].expected_label) ++n;
  }
  return n;
}

}  // namespace

double calibration_step(const LinguisticVariable& variable) {
  const std::string& name = variable.name();
  if (name == "ecg" || name == "chest_pain") return 0.25;
  if (name == "blood_sugar") return 20.0;
  if (name == "age" || name == "heart_rate") return 10.0;
  return variable.universe().width() / 16.0;
}

std::size_t count_agreement(const KnowledgeBase& kb, const std::vector<LabeledRecord>& rows,
                            std::size_t resolution) {
  const RuleBase base = build_rule_base(kb);
  std::size_t n = 0;
  for (const auto& row : rows) {
    if (evaluate_crisp(base, kb, row.record, resolution).label == row.expected_label) ++n;
  }
  return n;
}

KnowledgeBase calibrate(const KnowledgeBase& kb, const std::vector<LabeledRecord>& rows,
                        const CalibrationOptions& options) {
  if (rows.empty()) return kb;

  // Consequents depend only on the policy and pinned rules, so one rule base
  // serves every candidate; only the degree tables change.
  const RuleBase base = build_rule_base(kb);
  const std::size_t nvars = kb.inputs.size();

  std::vector<std::vector<double>> values(rows.size(), std::vector<double>(nvars));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t v = 0; v < nvars; ++v) {
      const auto& var = kb.inputs[v];
      const double x = rows[r].record.value(var.name());
      if (!var.universe().contains(x)) throw OutOfUniverse(var.name(), x, var.universe().lo, var.universe().hi);
      values[r][v] = x;
    }
  }

  std::vector<std::vector<FuzzySet>> terms(nvars);
  std::vector<std::vector<std::string>> labels(nvars);
  std::vector<std::vector<double>> centers(nvars);
  for (std::size_t v = 0; v < nvars; ++v) {
    terms[v] = kb.inputs[v].terms();
    for (const auto& t : terms[v]) labels[v].push_back(t.term);
    centers[v] = partition_centers(kb.inputs[v]);
  }

  DegreeTables tables(rows.size(), std::vector<std::vector<double>>(nvars));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t v = 0; v < nvars; ++v) tables[r][v] = degrees_at(terms[v], values[r][v]);
  }

  std::size_t best_matches = matches(base, tables, rows, options.resolution);
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t v = 0; v < nvars; ++v) {
      const auto& var = kb.inputs[v];
      if (kb.is_anchored(var.name())) continue;

      const auto& u = var.universe();
      std::vector<double> best_centers = centers[v];
      std::vector<FuzzySet> best_terms = terms[v];
      double best_penalty = spacing_penalty(u, centers[v]);
      std::size_t var_best = best_matches;

      for_each_combination(grid_points(var), labels[v].size(), [&](const std::vector<double>& cand) {
        auto cand_terms = shouldered_partition(u, labels[v], cand);
        for (std::size_t r = 0; r < rows.size(); ++r) tables[r][v] = degrees_at(cand_terms, values[r][v]);
        const std::size_t m = matches(base, tables, rows, options.resolution);
        const double penalty = spacing_penalty(u, cand);
        if (m > var_best || (m == var_best && penalty < best_penalty)) {
          var_best = m;
          best_penalty = penalty;
          best_centers = cand;
          best_terms = std::move(cand_terms);
        }
      });

      if (best_centers != centers[v]) changed = true;
      centers[v] = best_centers;
      terms[v] = std::move(best_terms);
      best_matches = var_best;
      for (std::size_t r = 0; r < rows.size(); ++r) tables[r][v] = degrees_at(terms[v], values[r][v]);
    }
    if (!changed) break;
  }

  const auto required = static_cast<std::size_t>(std::ceil(options.min_agreement * static_cast<double>(rows.size())));
  if (best_matches < required) {
    throw CalibrationFailed("calibration reached " + std::to_string(best_matches) + "/" +
                            std::to_string(rows.size()) + " agreeing rows, need " + std::to_string(required));
  }

  KnowledgeBase out = kb;
  for (std::size_t v = 0; v < nvars; ++v) {
    if (kb.is_anchored(kb.inputs[v].name())) continue;
    out.inputs[v] = LinguisticVariable::make(kb.inputs[v].name(), kb.inputs[v].universe(), terms[v]);
  }
  out.calibration = CalibrationRecord{kCalibrationProcedure, rows.size(), best_matches};
  return out;
}

}  // namespace fuzzcare
