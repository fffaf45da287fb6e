#include "fuzzcare/cardio_kb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fuzzcare/error.hpp"
#include "fuzzcare/kb_json.hpp"
#include "fuzzcare/rule_dsl.hpp"

namespace fuzzcare {

namespace {

struct InputSpec {
  std::string_view name;
  std::string_view units;
  double lo;
  double hi;
  std::vector<std::string> labels;
};

const std::vector<InputSpec>& input_specs() {
  static const std::vector<InputSpec> specs = {
      {"ecg", "mm/sec", 0.0, 4.0, {"Normal", "Medium", "High"}},
      {"chest_pain", "ETT", 0.0, 4.0, {"Normal", "AtypicalAngina", "TypicalAngina"}},
      {"blood_sugar", "mmol/L (unverified; mg/dL scale)", 40.0, 400.0, {"Low", "Normal", "Medium", "High"}},
      {"cholesterol", "mg/dL", 50.0, 400.0, {"Normal", "Medium", "High"}},
      {"blood_pressure", "mmHg", 50.0, 220.0, {"Normal", "Medium", "High"}},
      {"age", "year", 0.0, 120.0, {"Young", "Adult", "Aged", "Old"}},
      {"heart_rate", "bpm", 30.0, 220.0, {"Low", "Medium", "High"}},
  };
  return specs;
}

// Midpoints of the 100-129 / 130-159 / 160-189 mg/dL bands.
const std::vector<double> kCholesterolAnchors = {114.5, 144.5, 174.5};
// Systolic 90 and 120 bound the normal range; above 140 is high.
const std::vector<double> kBloodPressureAnchors = {90.0, 120.0, 140.0};

LinguisticVariable make_variable(const InputSpec& spec, const std::vector<double>& centers) {
  Universe u = Universe::make(spec.lo, spec.hi, std::string(spec.units));
  return LinguisticVariable::make(std::string(spec.name), u, shouldered_partition(u, spec.labels, centers));
}

std::vector<double> even_centers(double lo, double hi, std::size_t n) {
  std::vector<double> c(n);
  for (std::size_t j = 0; j < n; ++j) c[j] = lo + (hi - lo) * static_cast<double>(j + 1) / static_cast<double>(n + 1);
  return c;
}

}  // namespace

std::optional<std::size_t> expected_term_count(std::string_view variable) noexcept {
  if (variable == "ecg" || variable == "chest_pain" || variable == "cholesterol" || variable == "blood_pressure" ||
      variable == "heart_rate") {
    return 3;
  }
  if (variable == "blood_sugar" || variable == "age") return 4;
  return std::nullopt;
}

const LinguisticVariable& KnowledgeBase::input(std::string_view name) const {
  for (const auto& v : inputs) {
    if (v.name() == name) return v;
  }
  throw UnknownVariable(std::string(name));
}

bool KnowledgeBase::is_anchored(std::string_view name) const {
  return std::find(anchored.begin(), anchored.end(), name) != anchored.end();
}

std::vector<std::size_t> KnowledgeBase::term_counts() const {
  std::vector<std::size_t> counts;
  counts.reserve(inputs.size());
  for (const auto& v : inputs) counts.push_back(v.term_count());
  return counts;
}

std::vector<FuzzySet> shouldered_partition(const Universe& u, const std::vector<std::string>& labels,
                                           const std::vector<double>& centers) {
  if (labels.size() != centers.size() || labels.empty()) {
    throw KbError("shouldered partition needs one centre per label");
  }
  for (std::size_t j = 0; j < centers.size(); ++j) {
    if (!u.contains(centers[j]) || (j > 0 && !(centers[j - 1] < centers[j]))) {
      throw KbError("partition centres must increase strictly inside the universe");
    }
  }
  const std::size_t n = centers.size();
  std::vector<FuzzySet> terms;
  terms.reserve(n);
  if (n == 1) {
    terms.push_back(FuzzySet::make(labels[0], MembershipFunction::trapezoidal(u.lo, u.lo, u.hi, u.hi), u));
    return terms;
  }
  terms.push_back(FuzzySet::make(labels[0], MembershipFunction::trapezoidal(u.lo, u.lo, centers[0], centers[1]), u));
  for (std::size_t j = 1; j + 1 < n; ++j) {
    terms.push_back(
        FuzzySet::make(labels[j], MembershipFunction::triangular(centers[j - 1], centers[j], centers[j + 1]), u));
  }
  terms.push_back(
      FuzzySet::make(labels[n - 1], MembershipFunction::trapezoidal(centers[n - 2], centers[n - 1], u.hi, u.hi), u));
  return terms;
}

std::vector<double> partition_centers(const LinguisticVariable& variable) {
  const auto& terms = variable.terms();
  std::vector<double> centers;
  centers.reserve(terms.size());
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const auto& mf = terms[j].mf;
    if (terms.size() > 1 && j == 0) {
      centers.push_back(mf.plateau_hi());
    } else if (terms.size() > 1 && j + 1 == terms.size()) {
      centers.push_back(mf.plateau_lo());
    } else {
      centers.push_back(mf.peak());
    }
  }
  return centers;
}

std::vector<Rule> expert_rules() {
  static constexpr std::string_view kExpertRules = R"(# Expert rules; columns ecg, chest_pain, blood_sugar, cholesterol, blood_pressure, age, heart_rate
RULE expert-1 PINNED: IF ecg IS Medium AND chest_pain IS TypicalAngina AND blood_sugar IS Normal AND cholesterol IS Medium AND blood_pressure IS High AND age IS Young AND heart_rate IS Medium THEN disease_level IS High
RULE expert-2 PINNED: IF ecg IS Normal AND chest_pain IS Normal AND blood_sugar IS Medium AND cholesterol IS Medium AND blood_pressure IS Medium AND age IS Young AND heart_rate IS Medium THEN disease_level IS Medium
RULE expert-3 PINNED: IF ecg IS Medium AND chest_pain IS Normal AND blood_sugar IS Medium AND cholesterol IS Medium AND blood_pressure IS Medium AND age IS Young AND heart_rate IS Medium THEN disease_level IS Medium
RULE expert-4 PINNED: IF ecg IS Normal AND chest_pain IS Normal AND blood_sugar IS Normal AND cholesterol IS Normal AND blood_pressure IS High AND age IS Young AND heart_rate IS Medium THEN disease_level IS Low
RULE expert-5 PINNED: IF ecg IS Medium AND chest_pain IS AtypicalAngina AND blood_sugar IS Normal AND cholesterol IS Medium AND blood_pressure IS High AND age IS Aged AND heart_rate IS Medium THEN disease_level IS High
RULE expert-6 PINNED: IF ecg IS High AND chest_pain IS AtypicalAngina AND blood_sugar IS Normal AND cholesterol IS Medium AND blood_pressure IS High AND age IS Aged AND heart_rate IS Medium THEN disease_level IS High
RULE expert-7 PINNED: IF ecg IS Medium AND chest_pain IS Normal AND blood_sugar IS Medium AND cholesterol IS Medium AND blood_pressure IS High AND age IS Aged AND heart_rate IS Medium THEN disease_level IS Medium
)";
  return parse_rules(kExpertRules);
}

KnowledgeBase anchored_kb() {
  std::vector<LinguisticVariable> inputs;
  std::vector<std::string> anchored;
  for (const auto& spec : input_specs()) {
    if (spec.name == "cholesterol") {
      inputs.push_back(make_variable(spec, kCholesterolAnchors));
      anchored.emplace_back(spec.name);
    } else if (spec.name == "blood_pressure") {
      inputs.push_back(make_variable(spec, kBloodPressureAnchors));
      anchored.emplace_back(spec.name);
    } else {
      inputs.push_back(make_variable(spec, even_centers(spec.lo, spec.hi, spec.labels.size())));
    }
  }
  const Universe risk = Universe::make(0.0, 10.0, "risk");
  auto output = LinguisticVariable::make(std::string(kDiseaseLevel), risk,
                                         shouldered_partition(risk, {"Low", "Medium", "High"}, {2.0, 5.0, 8.0}));
  SeverityPolicy policy;
  policy.weights.assign(inputs.size(), 1.0);
  return KnowledgeBase{"1.0.0",    std::move(inputs), std::move(output), expert_rules(),
                       std::move(policy), std::move(anchored), std::nullopt};
}

KnowledgeBase load_default_kb() { return kb_from_document(default_kb_document()); }

std::string severity_policy(const Antecedent& antecedent, const std::vector<LinguisticVariable>& inputs,
                            const LinguisticVariable& output, const SeverityPolicy& policy) {
  double weighted = 0.0;
  double total_weight = 0.0;
  for (std::size_t v = 0; v < inputs.size(); ++v) {
    const auto& var = inputs[v];
    auto clause = std::find_if(antecedent.clauses.begin(), antecedent.clauses.end(),
                               [&](const Clause& c) { return c.variable == var.name(); });
    if (clause == antecedent.clauses.end()) throw MissingVariable(var.name());
    auto idx = var.term_index(clause->term);
    if (!idx) throw UnknownTerm(var.name(), clause->term);
    const double severity =
        var.term_count() > 1 ? static_cast<double>(*idx) / static_cast<double>(var.term_count() - 1) : 0.0;
    const double w = policy.weights.empty() ? 1.0 : policy.weights.at(v);
    weighted += w * severity;
    total_weight += w;
  }
  const double mean = total_weight > 0.0 ? weighted / total_weight : 0.0;
  std::size_t level = 0;
  for (double t : policy.thresholds) {
    if (mean >= t) ++level;
  }
  level = std::min(level, output.term_count() - 1);
  return output.term(level).term;
}

ConsequentPolicy make_policy(const KnowledgeBase& kb) {
  return [&kb](const Antecedent& a) { return severity_policy(a, kb.inputs, kb.output, kb.policy); };
}

RuleBase build_rule_base(const KnowledgeBase& kb) {
  return generate_rule_base(kb.inputs, kb.output, make_policy(kb), kb.pinned_rules);
}

DosageRecommendation recommend_dosage(std::string_view label) {
  static const std::string kDisclaimer =
      "Decision support only: the treating physician sets any prescription and dose.";
  if (label == "Low") {
    return {"Low",
            "Routine monitoring: repeat the panel at the next scheduled visit and reinforce lifestyle measures "
            "(heart-healthy diet, regular exercise, weight management, no smoking). No dosage escalation indicated.",
            kDisclaimer};
  }
  if (label == "Medium") {
    return {"Medium",
            "Moderate risk: consider starting or adjusting therapy at a low-to-moderate dosage level as judged by "
            "the physician, with follow-up testing of lipids, blood pressure and blood sugar.",
            kDisclaimer};
  }
  if (label == "High") {
    return {"High",
            "High risk: refer to a cardiology specialist; treatment and dosage at the intensity determined by the "
            "treating physician, with close follow-up.",
            kDisclaimer};
  }
  throw std::invalid_argument("recommend_dosage: unknown disease level '" + std::string(label) + "'");
}

const char* to_string(Gender g) noexcept {
  switch (g) {
    case Gender::male:
      return "male";
    case Gender::female:
      return "female";
    case Gender::unspecified:
      break;
  }
  return "unspecified";
}

std::optional<Gender> gender_from_string(std::string_view s) noexcept {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  if (s == "unspecified" || s.empty()) return Gender::unspecified;
  return std::nullopt;
}

double PatientRecord::value(std::string_view field) const {
  const auto vals = values();
  for (std::size_t i = 0; i < kCardioInputs.size(); ++i) {
    if (kCardioInputs[i] == field) return vals[i];
  }
  throw UnknownVariable(std::string(field));
}

std::array<double, 7> PatientRecord::values() const {
  return {ecg, chest_pain, blood_sugar, cholesterol, blood_pressure, age, heart_rate};
}

std::vector<LabeledRecord> reference_cohort() {
  auto row = [](double ecg, double cp, double sugar, double chol, double bp, double age, double hr, const char* human,
                const char* label, double p) {
    return LabeledRecord{PatientRecord{ecg, cp, sugar, chol, bp, age, hr, Gender::unspecified}, label, p,
                         std::string(human)};
  };
  return {
      row(1.2, 1.1, 96, 160, 110, 33, 131, "Normal", "Low", 0.95),
      row(1.0, 1.0, 102, 130, 115, 30, 136, "Normal", "Low", 0.96),
      row(1.5, 2.0, 140, 140, 140, 40, 140, "Heart Disease found", "Medium", 0.94),
      row(2.2, 2.4, 200, 170, 160, 48, 160, "Heart Disease found", "High", 0.97),
      row(1.3, 1.2, 110, 133, 125, 25, 131, "Normal", "Low", 0.95),
      row(1.4, 1.0, 109, 117, 126, 23, 127, "Normal", "Low", 0.96),
      row(1.9, 2.2, 118, 170, 149, 36, 137, "Heart Disease found", "Medium", 0.94),
      row(2.3, 2.4, 190, 160, 150, 38, 180, "Heart Disease found", "High", 0.97),
      row(1.1, 1.1, 112, 120, 131, 29, 128, "Normal", "Low", 0.95),
      row(1.3, 1.0, 115, 109, 121, 35, 119, "Normal", "Low", 0.96),
  };
}

ValidationReport validate_kb(const KnowledgeBase& kb) {
  ValidationReport report;
  auto add = [&report](std::string check, bool ok, std::string message) {
    report.passed = report.passed && ok;
    report.findings.push_back({std::move(check), ok, std::move(message)});
  };

  // Input set and per-variable term counts.
  std::vector<std::string> names;
  for (const auto& v : kb.inputs) names.push_back(v.name());
  const bool order_ok = names.size() == kCardioInputs.size() &&
                        std::equal(names.begin(), names.end(), kCardioInputs.begin());
  add("inputs", order_ok, order_ok ? "7 inputs in declared order" : "inputs differ from the cardiology input set");
  for (const auto& v : kb.inputs) {
    const auto expected = expected_term_count(v.name());
    const bool ok = expected && *expected == v.term_count();
    std::ostringstream msg;
    msg << v.name() << ": " << v.term_count() << " terms";
    if (expected && !ok) msg << " (expected " << *expected << ")";
    add("term-count", ok, msg.str());
  }
  {
    const auto counts = kb.term_counts();
    const auto total = rule_space_size(counts);
    add("rule-space", total == 3888, "rule space " + std::to_string(total) + " (expected 3888)");
  }

  // Output variable.
  {
    const auto& out = kb.output;
    const bool ok = out.name() == kDiseaseLevel && out.term_count() == 3 && out.term(0).term == "Low" &&
                    out.term(1).term == "Medium" && out.term(2).term == "High" && out.universe().lo == 0.0 &&
                    out.universe().hi == 10.0;
    add("output", ok, ok ? "disease_level Low < Medium < High over [0, 10]" : "output must be disease_level "
                                                                               "{Low, Medium, High} over [0, 10]");
  }

  // Coverage.
  auto check_coverage = [&add](const LinguisticVariable& v) {
    std::ostringstream msg;
    msg << v.name();
    const auto gap = v.first_coverage_gap();
    if (gap) {
      msg << ": no term covers " << *gap;
    } else {
      msg << ": covered";
    }
    add("coverage", !gap, msg.str());
  };
  for (const auto& v : kb.inputs) check_coverage(v);
  check_coverage(kb.output);

  // Reference cohort inside the universes.
  if (order_ok) {
    std::size_t row_no = 0;
    bool all_inside = true;
    for (const auto& row : reference_cohort()) {
      ++row_no;
      const auto vals = row.record.values();
      for (std::size_t i = 0; i < kb.inputs.size(); ++i) {
        if (!kb.inputs[i].universe().contains(vals[i])) {
          all_inside = false;
          std::ostringstream msg;
          msg << "cohort row " << row_no << ": " << kb.inputs[i].name() << " = " << vals[i] << " outside universe";
          add("cohort-universe", false, msg.str());
        }
      }
    }
    if (all_inside) add("cohort-universe", true, "all reference cohort values inside their universes");
  }

  // Pinned rules bind and are complete points of the rule space.
  try {
    const RuleBase base = RuleBase::make(kb.inputs, kb.output, kb.pinned_rules);
    bool complete = true;
    for (const auto& b : base.bound()) complete = complete && b.clauses.size() == kb.inputs.size();
    add("pinned-rules", complete,
        std::to_string(kb.pinned_rules.size()) + " pinned rules" + (complete ? " bind" : " do not cover every input"));
    for (const auto& rule : kb.pinned_rules) {
      if (complete && severity_policy(rule.antecedent, kb.inputs, kb.output, kb.policy) != rule.consequent.term) {
        ++report.policy_disagreements;
      }
    }
  } catch (const Error& e) {
    add("pinned-rules", false, e.what());
  }

  const bool weights_ok = kb.policy.weights.empty() || kb.policy.weights.size() == kb.inputs.size();
  const bool thresholds_ok = kb.policy.thresholds[0] < kb.policy.thresholds[1];
  add("policy", weights_ok && thresholds_ok,
      kb.policy.id + (weights_ok && thresholds_ok ? "" : ": weights or thresholds malformed"));
  return report;
}

}  // namespace fuzzcare
