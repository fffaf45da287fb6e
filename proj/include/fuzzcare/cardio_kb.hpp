#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fuzzcare/fuzzy.hpp"
#include "fuzzcare/rules.hpp"

namespace fuzzcare {

/// Declared input order of the cardiology knowledge base.
inline constexpr std::array<std::string_view, 7> kCardioInputs = {
    "ecg", "chest_pain", "blood_sugar", "cholesterol", "blood_pressure", "age", "heart_rate"};
inline constexpr std::string_view kDiseaseLevel = "disease_level";

/// Number of membership functions each clinical input must carry, or
/// nullopt for a variable outside the cardiology set.
std::optional<std::size_t> expected_term_count(std::string_view variable) noexcept;

/// Weighted mean of normalised clause severities, cut by two thresholds into
/// the three output terms.
struct SeverityPolicy {
  std::string id = "severity-mean/v1";
  std::vector<double> weights;  // one per input; empty means uniform
  std::array<double, 2> thresholds{1.0 / 3.0, 2.0 / 3.0};

  friend bool operator==(const SeverityPolicy&, const SeverityPolicy&) = default;
};

struct CalibrationRecord {
  std::string procedure;
  std::size_t rows = 0;
  std::size_t matches = 0;

  friend bool operator==(const CalibrationRecord&, const CalibrationRecord&) = default;
};

struct KnowledgeBase {
  std::string version;
  std::vector<LinguisticVariable> inputs;
  LinguisticVariable output;
  std::vector<Rule> pinned_rules;
  SeverityPolicy policy;
  /// Inputs whose breakpoints are fixed by clinical bands; calibrate leaves them alone.
  std::vector<std::string> anchored;
  std::optional<CalibrationRecord> calibration;

  const LinguisticVariable& input(std::string_view name) const;
  bool is_anchored(std::string_view name) const;
  std::vector<std::size_t> term_counts() const;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;
};

/// Shouldered partition: the first term is a left-shoulder trapezoid
/// plateauing up to centers[0], interior terms are triangles peaking at their
/// centre with feet on the neighbouring centres, the last term a right
/// shoulder from centers.back(). Adjacent degrees always sum to 1.
std::vector<FuzzySet> shouldered_partition(const Universe& universe, const std::vector<std::string>& labels,
                                           const std::vector<double>& centers);

/// Inverse of shouldered_partition for terms built that way.
std::vector<double> partition_centers(const LinguisticVariable& variable);

/// The uncalibrated knowledge base: clinical anchors placed for cholesterol
/// and blood pressure, every other input evenly spaced over its universe.
KnowledgeBase anchored_kb();

/// The shipped calibrated knowledge base (compiled in from data/default_kb.json).
KnowledgeBase load_default_kb();
std::string_view default_kb_document() noexcept;

/// The seven expert rules that override generated consequents.
std::vector<Rule> expert_rules();

std::string severity_policy(const Antecedent& antecedent, const std::vector<LinguisticVariable>& inputs,
                            const LinguisticVariable& output, const SeverityPolicy& policy);

ConsequentPolicy make_policy(const KnowledgeBase& kb);

/// All rules of the cartesian product with the pinned rules as overrides.
RuleBase build_rule_base(const KnowledgeBase& kb);

struct DosageRecommendation {
  std::string level;
  std::string guidance;
  std::string disclaimer;
};

/// Throws std::invalid_argument for a label that is not Low, Medium or High.
DosageRecommendation recommend_dosage(std::string_view label);

enum class Gender { unspecified, male, female };
const char* to_string(Gender g) noexcept;
std::optional<Gender> gender_from_string(std::string_view s) noexcept;

struct PatientRecord {
  double ecg = 0.0;             // mm/sec
  double chest_pain = 0.0;      // ETT grade, abstract 0-4 scale
  double blood_sugar = 0.0;     // stored as given; column unit unverified
  double cholesterol = 0.0;     // mg/dL
  double blood_pressure = 0.0;  // systolic mmHg
  double age = 0.0;             // years
  double heart_rate = 0.0;      // bpm
  Gender gender = Gender::unspecified;

  /// Value of the named input; throws UnknownVariable.
  double value(std::string_view field) const;
  /// The seven inputs in kCardioInputs order.
  std::array<double, 7> values() const;

  friend bool operator==(const PatientRecord&, const PatientRecord&) = default;
};

/// A record with the label it should receive and optional reference data.
struct LabeledRecord {
  PatientRecord record;
  std::string expected_label;
  std::optional<double> probability;
  std::optional<std::string> human_decision;
};

/// The ten-patient reference cohort with expert-system decisions.
std::vector<LabeledRecord> reference_cohort();

struct ValidationFinding {
  std::string check;
  bool ok = true;
  std::string message;
};

struct ValidationReport {
  bool passed = true;
  std::vector<ValidationFinding> findings;
  /// Pinned rules whose consequent differs from what the policy would choose.
  std::size_t policy_disagreements = 0;
};

ValidationReport validate_kb(const KnowledgeBase& kb);

}  // namespace fuzzcare
