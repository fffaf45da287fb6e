#pragma once

// Comma-separated patient tables. No quoting: fields may not contain commas.
//
// Record tables: header exactly
//   ecg,chest_pain,blood_sugar,cholesterol,blood_pressure,age,heart_rate[,gender]
// Labelled tables: the seven inputs in that order, then any of
//   gender, expected_label (required), probability, human_decision

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fuzzcare/cardio_kb.hpp"
#include "fuzzcare/error.hpp"

namespace fuzzcare {

struct CsvFinding {
  std::size_t row;  // 1-based data row; 0 for the header
  std::string field;
  std::string message;
};

class CsvError : public Error {
 public:
  explicit CsvError(std::vector<CsvFinding> findings);
  const std::vector<CsvFinding>& findings() const noexcept { return findings_; }

 private:
  std::vector<CsvFinding> findings_;
};

/// Collects every malformed row before throwing, so callers can report them all.
std::vector<PatientRecord> parse_patient_csv(std::string_view text);
std::vector<LabeledRecord> parse_labeled_csv(std::string_view text);

std::string labeled_to_csv(const std::vector<LabeledRecord>& rows);

}  // namespace fuzzcare
