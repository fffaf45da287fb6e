#include "fuzzcare/diagnosis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fuzzcare/error.hpp"
#include "fuzzcare/rule_dsl.hpp"

namespace fuzzcare {

DiagnosisReport evaluate_crisp(const RuleBase& base, const KnowledgeBase& kb, const PatientRecord& record,
                               std::size_t resolution, Clamp clamp) {
  FuzzyInputs inputs;
  for (const auto& var : base.inputs()) {
    inputs.emplace(var.name(), fuzzify(var, record.value(var.name()), clamp));
  }
  const InferenceTrace trace = infer(base, inputs, resolution);

  DiagnosisReport report;
  report.record = record;
  report.label = trace.label;
  report.score = trace.score;
  report.kb_version = kb.version;
  report.fired.reserve(trace.fired.size());
  for (const auto& f : trace.fired) {
    const Rule& rule = base.rules()[f.rule_index];
    report.fired.push_back({rule.id, f.strength, rule.consequent.term, rule.provenance, render_condition(rule)});
  }
  std::stable_sort(report.fired.begin(), report.fired.end(),
                   [](const FiredRuleView& a, const FiredRuleView& b) { return a.strength > b.strength; });
  for (const auto& c : trace.aggregated.clipped) report.clip_heights.emplace_back(c.term, c.height);
  report.dosage = recommend_dosage(report.label);
  return report;
}

std::optional<FieldProblem> check_record(const PatientRecord& record) {
  const auto vals = record.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (!std::isfinite(vals[i])) return FieldProblem{std::string(kCardioInputs[i]), "value must be a finite number"};
  }
  if (!(record.age > 0.0)) return FieldProblem{"age", "age must be positive"};
  return std::nullopt;
}

Json record_to_json(const PatientRecord& record) {
  Json j;
  const auto vals = record.values();
  for (std::size_t i = 0; i < vals.size(); ++i) j[std::string(kCardioInputs[i])] = vals[i];
  j["gender"] = to_string(record.gender);
  return j;
}

PatientRecord record_from_json(const Json& j) {
  if (!j.is_object()) throw FieldError("", "patient record must be a JSON object");
  std::array<double, 7> vals{};
  for (std::size_t i = 0; i < kCardioInputs.size(); ++i) {
    const std::string name(kCardioInputs[i]);
    if (!j.contains(name)) throw FieldError(name, "missing field '" + name + "'");
    if (!j.at(name).is_number()) throw FieldError(name, "field '" + name + "' must be a number");
    vals[i] = j.at(name).get<double>();
  }
  PatientRecord r{vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], Gender::unspecified};
  if (j.contains("gender") && !j.at("gender").is_null()) {
    if (!j.at("gender").is_string()) throw FieldError("gender", "field 'gender' must be a string");
    auto g = gender_from_string(j.at("gender").get<std::string>());
    if (!g) throw FieldError("gender", "gender must be male, female or unspecified");
    r.gender = *g;
  }
  if (auto problem = check_record(r)) throw FieldError(problem->field, problem->field + ": " + problem->message);
  return r;
}

Json trace_to_json(const DiagnosisReport& report) {
  Json fired = Json::array();
  for (const auto& f : report.fired) {
    fired.push_back({{"id", f.id},
                     {"strength", f.strength},
                     {"consequent", f.consequent},
                     {"provenance", to_string(f.provenance)},
                     {"rule", f.text}});
  }
  Json heights = Json::object();
  for (const auto& [term, h] : report.clip_heights) heights[term] = h;
  return {{"fired_rules", std::move(fired)}, {"clip_heights", std::move(heights)}, {"score", report.score},
          {"label", report.label}};
}

Json report_to_json(const DiagnosisReport& report) {
  return {{"label", report.label},
          {"score", report.score},
          {"kb_version", report.kb_version},
          {"record", record_to_json(report.record)},
          {"dosage",
           {{"level", report.dosage.level}, {"guidance", report.dosage.guidance},
            {"disclaimer", report.dosage.disclaimer}}},
          {"trace", trace_to_json(report)}};
}

const char* to_string(DiagnosisSession::State s) noexcept {
  switch (s) {
    case DiagnosisSession::State::init:
      return "Init";
    case DiagnosisSession::State::collecting_inputs:
      return "CollectingInputs";
    case DiagnosisSession::State::diagnosed:
      return "Diagnosed";
    case DiagnosisSession::State::recommended:
      return "Recommended";
    case DiagnosisSession::State::closed:
      return "Closed";
  }
  return "?";
}

void DiagnosisSession::require(State expected, const char* action) const {
  if (state_ != expected) {
    throw std::logic_error(std::string("session: cannot ") + action + " in state " + to_string(state_));
  }
}

void DiagnosisSession::set_input(std::string_view field, double value) {
  if (state_ == State::init) state_ = State::collecting_inputs;
  require(State::collecting_inputs, "set an input");
  for (std::size_t i = 0; i < kCardioInputs.size(); ++i) {
    if (kCardioInputs[i] == field) {
      values_[i] = value;
      return;
    }
  }
  throw UnknownVariable(std::string(field));
}

void DiagnosisSession::set_gender(Gender gender) {
  if (state_ == State::init) state_ = State::collecting_inputs;
  require(State::collecting_inputs, "set gender");
  gender_ = gender;
}

std::vector<std::string> DiagnosisSession::missing_inputs() const {
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < kCardioInputs.size(); ++i) {
    if (!values_[i]) missing.emplace_back(kCardioInputs[i]);
  }
  return missing;
}

const DiagnosisReport& DiagnosisSession::diagnose(const RuleBase& base, const KnowledgeBase& kb,
                                                  std::size_t resolution, Clamp clamp) {
  require(State::collecting_inputs, "diagnose");
  if (auto missing = missing_inputs(); !missing.empty()) {
    throw FieldError(missing.front(), "missing input '" + missing.front() + "'");
  }
  PatientRecord record{*values_[0], *values_[1], *values_[2], *values_[3], *values_[4], *values_[5], *values_[6],
                       gender_};
  if (auto problem = check_record(record)) throw FieldError(problem->field, problem->field + ": " + problem->message);
  report_ = evaluate_crisp(base, kb, record, resolution, clamp);
  state_ = State::diagnosed;
  return *report_;
}

const DosageRecommendation& DiagnosisSession::recommend() {
  require(State::diagnosed, "recommend");
  state_ = State::recommended;
  result_ = true;
  return report_->dosage;
}

void DiagnosisSession::close() {
  require(State::recommended, "close");
  state_ = State::closed;
}

}  // namespace fuzzcare
