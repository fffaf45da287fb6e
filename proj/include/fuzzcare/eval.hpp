#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fuzzcare/cardio_kb.hpp"
#include "fuzzcare/kb_json.hpp"

namespace fuzzcare {

struct EvalRow {
  PatientRecord record;
  std::string expected;
  std::string produced;
  double score = 0.0;
  bool match = false;
  std::optional<double> probability;
  /// Normal / Heart Disease found, given or derived from the expected label.
  std::string expected_binary;
  bool binary_match = false;
};

struct EvalSummary {
  std::size_t n = 0;
  std::size_t matches = 0;
  double agreement = 0.0;  // matches / n, 0 when n == 0
  std::size_t binary_matches = 0;
  double binary_agreement = 0.0;
  std::size_t probability_rows = 0;
  std::optional<double> mean_probability;  // over rows that supply one
};

struct EvalResult {
  std::vector<EvalRow> rows;
  EvalSummary summary;
};

/// Low -> "Normal", Medium/High -> "Heart Disease found".
std::string binary_decision(std::string_view label);

/// Diagnoses every row and compares against its expected label. The
/// probability column is reference data and is only averaged, never derived.
EvalResult run_eval(const RuleBase& base, const KnowledgeBase& kb, const std::vector<LabeledRecord>& rows,
                    std::size_t resolution = kDefaultResolution);

Json eval_to_json(const EvalResult& result);

}  // namespace fuzzcare
