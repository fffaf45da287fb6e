#include "fuzzcare/eval.hpp"

#include "fuzzcare/diagnosis.hpp"

namespace fuzzcare {

std::string binary_decision(std::string_view label) {
  return label == "Low" ? "Normal" : "Heart Disease found";
}

EvalResult run_eval(const RuleBase& base, const KnowledgeBase& kb, const std::vector<LabeledRecord>& rows,
                    std::size_t resolution) {
  EvalResult result;
  double probability_sum = 0.0;
  for (const auto& row : rows) {
    const DiagnosisReport report = evaluate_crisp(base, kb, row.record, resolution);
    EvalRow out;
    out.record = row.record;
    out.expected = row.expected_label;
    out.produced = report.label;
    out.score = report.score;
    out.match = out.produced == out.expected;
    out.probability = row.probability;
    out.expected_binary = row.human_decision ? *row.human_decision : binary_decision(row.expected_label);
    out.binary_match = binary_decision(out.produced) == out.expected_binary;

    result.summary.matches += out.match ? 1 : 0;
    result.summary.binary_matches += out.binary_match ? 1 : 0;
    if (out.probability) {
      probability_sum += *out.probability;
      ++result.summary.probability_rows;
    }
    result.rows.push_back(std::move(out));
  }
  auto& s = result.summary;
  s.n = result.rows.size();
  if (s.n > 0) {
    s.agreement = static_cast<double>(s.matches) / static_cast<double>(s.n);
    s.binary_agreement = static_cast<double>(s.binary_matches) / static_cast<double>(s.n);
  }
  if (s.probability_rows > 0) s.mean_probability = probability_sum / static_cast<double>(s.probability_rows);
  return result;
}

Json eval_to_json(const EvalResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    Json row = {{"record", {}},
                {"expected", r.expected},
                {"produced", r.produced},
                {"score", r.score},
                {"match", r.match},
                {"probability", nullptr},
                {"expected_binary", r.expected_binary},
                {"binary_match", r.binary_match}};
    const auto vals = r.record.values();
    for (std::size_t i = 0; i < vals.size(); ++i) row["record"][std::string(kCardioInputs[i])] = vals[i];
    row["record"]["gender"] = to_string(r.record.gender);
    if (r.probability) row["probability"] = *r.probability;
    rows.push_back(std::move(row));
  }
  const auto& s = result.summary;
  Json summary = {{"n", s.n},
                  {"matches", s.matches},
                  {"agreement", s.agreement},
                  {"binary_matches", s.binary_matches},
                  {"binary_agreement", s.binary_agreement},
                  {"probability_rows", s.probability_rows},
                  {"mean_probability", nullptr}};
  if (s.mean_probability) summary["mean_probability"] = *s.mean_probability;
  return {{"rows", std::move(rows)}, {"summary", std::move(summary)}};
}

}  // namespace fuzzcare
