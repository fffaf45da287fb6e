#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fuzzcare/cardio_kb.hpp"
#include "fuzzcare/error.hpp"
#include "fuzzcare/kb_json.hpp"
#include "fuzzcare/rules.hpp"

namespace fuzzcare {

struct FiredRuleView {
  std::string id;
  double strength = 0.0;
  std::string consequent;
  Provenance provenance = Provenance::generated;
  std::string text;  // IF ... THEN ...
};

struct DiagnosisReport {
  PatientRecord record;
  std::string label;
  double score = 0.0;
  std::vector<FiredRuleView> fired;                           // strongest first, ties in rule order
  std::vector<std::pair<std::string, double>> clip_heights;  // per output term that fired
  DosageRecommendation dosage;
  std::string kb_version;
};

/// Throws OutOfUniverse naming the first offending field in input order.
DiagnosisReport evaluate_crisp(const RuleBase& base, const KnowledgeBase& kb, const PatientRecord& record,
                               std::size_t resolution = kDefaultResolution, Clamp clamp = Clamp::no);

/// Rejects non-finite values and a non-positive age. Returns the offending
/// field name and message, or nullopt when the record is well-formed.
struct FieldProblem {
  std::string field;
  std::string message;
};
std::optional<FieldProblem> check_record(const PatientRecord& record);

Json record_to_json(const PatientRecord& record);
/// Requires all seven numeric fields; gender is optional. Throws FieldError.
PatientRecord record_from_json(const Json& j);

class FieldError : public Error {
 public:
  FieldError(std::string field, const std::string& message) : Error(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

Json trace_to_json(const DiagnosisReport& report);
Json report_to_json(const DiagnosisReport& report);

/// Session flow for one patient: inputs are collected, the diagnosis runs,
/// a dosage level is recommended, and the session closes. The result flag
/// only turns true once a recommendation has been made.
class DiagnosisSession {
 public:
  enum class State { init, collecting_inputs, diagnosed, recommended, closed };

  DiagnosisSession() = default;

  State state() const noexcept { return state_; }
  bool result() const noexcept { return result_; }

  /// Moves Init -> CollectingInputs on first use. Throws UnknownVariable.
  void set_input(std::string_view field, double value);
  void set_gender(Gender gender);
  /// Names of inputs still missing, in input order.
  std::vector<std::string> missing_inputs() const;

  /// CollectingInputs -> Diagnosed. Throws FieldError naming a missing input,
  /// OutOfUniverse from fuzzification, std::logic_error on a wrong state.
  const DiagnosisReport& diagnose(const RuleBase& base, const KnowledgeBase& kb,
                                  std::size_t resolution = kDefaultResolution, Clamp clamp = Clamp::no);
  /// Diagnosed -> Recommended; sets the result flag.
  const DosageRecommendation& recommend();
  /// Recommended -> Closed.
  void close();

  const std::optional<DiagnosisReport>& report() const noexcept { return report_; }

 private:
  void require(State expected, const char* action) const;

  State state_ = State::init;
  bool result_ = false;
  std::array<std::optional<double>, 7> values_{};
  Gender gender_ = Gender::unspecified;
  std::optional<DiagnosisReport> report_;
};

const char* to_string(DiagnosisSession::State s) noexcept;

}  // namespace fuzzcare
