#include "fuzzcare/kb_json.hpp"

#include <fstream>
#include <sstream>

#include "fuzzcare/error.hpp"
#include "fuzzcare/rule_dsl.hpp"

namespace fuzzcare {

namespace {

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw KbError(where + ": missing '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw KbError(where + ": expected a number");
  return j.get<double>();
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) throw KbError(where + ": expected a string");
  return j.get<std::string>();
}

}  // namespace

Json variable_to_json(const LinguisticVariable& variable) {
  Json terms = Json::array();
  for (const auto& t : variable.terms()) {
    terms.push_back({{"label", t.term}, {"kind", to_string(t.mf.kind())}, {"params", t.mf.params()}});
  }
  return {{"name", variable.name()},
          {"units", variable.universe().units},
          {"universe", {variable.universe().lo, variable.universe().hi}},
          {"terms", std::move(terms)}};
}

LinguisticVariable variable_from_json(const Json& j) {
  const std::string name = text(require(j, "name", "variable"), "variable name");
  const std::string where = "variable '" + name + "'";
  const auto& range = require(j, "universe", where);
  if (!range.is_array() || range.size() != 2) throw KbError(where + ": universe must be [lo, hi]");
  Universe u = Universe::make(number(range[0], where), number(range[1], where),
                              text(require(j, "units", where), where + " units"));
  const auto& terms_json = require(j, "terms", where);
  if (!terms_json.is_array()) throw KbError(where + ": terms must be an array");
  std::vector<FuzzySet> terms;
  for (const auto& tj : terms_json) {
    std::string label = text(require(tj, "label", where), where + " term label");
    const std::string kind_name = text(require(tj, "kind", where), where + " term kind");
    const auto kind = shape_kind_from_string(kind_name);
    if (!kind) throw KbError(where + ": unknown membership kind '" + kind_name + "'");
    const auto& params_json = require(tj, "params", where);
    if (!params_json.is_array()) throw KbError(where + ": params must be an array");
    std::vector<double> params;
    for (const auto& p : params_json) params.push_back(number(p, where + " params"));
    terms.push_back(FuzzySet::make(std::move(label), MembershipFunction::from_params(*kind, params), u));
  }
  return LinguisticVariable::make(name, std::move(u), std::move(terms));
}

Json kb_to_json(const KnowledgeBase& kb) {
  Json doc;
  doc["version"] = kb.version;
  if (kb.calibration) {
    doc["calibration"] = {{"procedure", kb.calibration->procedure},
                          {"rows", kb.calibration->rows},
                          {"matches", kb.calibration->matches}};
  }
  Json vars = Json::array();
  for (const auto& v : kb.inputs) {
    Json vj = variable_to_json(v);
    // keep "anchored" next to the universe for readability
    Json ordered;
    for (auto it = vj.begin(); it != vj.end(); ++it) {
      ordered[it.key()] = it.value();
      if (it.key() == "universe") ordered["anchored"] = kb.is_anchored(v.name());
    }
    vars.push_back(std::move(ordered));
  }
  doc["variables"] = std::move(vars);
  doc["output"] = variable_to_json(kb.output);
  doc["pinned_rules"] = render_rules(kb.pinned_rules);
  doc["policy"] = {{"id", kb.policy.id}, {"weights", kb.policy.weights}, {"thresholds", kb.policy.thresholds}};
  return doc;
}

KnowledgeBase kb_from_json(const Json& j) {
  if (!j.is_object()) throw KbError("knowledge base must be a JSON object");
  std::string version = text(require(j, "version", "kb"), "kb version");

  std::optional<CalibrationRecord> calibration;
  if (j.contains("calibration")) {
    const auto& cj = j.at("calibration");
    calibration = CalibrationRecord{text(require(cj, "procedure", "calibration"), "calibration procedure"),
                                    static_cast<std::size_t>(number(require(cj, "rows", "calibration"), "rows")),
                                    static_cast<std::size_t>(number(require(cj, "matches", "calibration"), "matches"))};
  }

  std::vector<LinguisticVariable> inputs;
  std::vector<std::string> anchored;
  const auto& vars = require(j, "variables", "kb");
  if (!vars.is_array()) throw KbError("kb: variables must be an array");
  for (const auto& vj : vars) {
    inputs.push_back(variable_from_json(vj));
    if (vj.contains("anchored")) {
      if (!vj.at("anchored").is_boolean()) throw KbError("variable '" + inputs.back().name() + "': anchored must be boolean");
      if (vj.at("anchored").get<bool>()) anchored.push_back(inputs.back().name());
    }
  }
  LinguisticVariable output = variable_from_json(require(j, "output", "kb"));

  std::vector<Rule> pinned = parse_rules(text(require(j, "pinned_rules", "kb"), "pinned_rules"));
  for (auto& rule : pinned) rule.provenance = Provenance::pinned;

  SeverityPolicy policy;
  const auto& pj = require(j, "policy", "kb");
  policy.id = text(require(pj, "id", "policy"), "policy id");
  policy.weights.clear();
  for (const auto& w : require(pj, "weights", "policy")) policy.weights.push_back(number(w, "policy weights"));
  const auto& th = require(pj, "thresholds", "policy");
  if (!th.is_array() || th.size() != 2) throw KbError("policy: thresholds must be [low, high]");
  policy.thresholds = {number(th[0], "policy thresholds"), number(th[1], "policy thresholds")};

  return KnowledgeBase{std::move(version), std::move(inputs), std::move(output), std::move(pinned),
                       std::move(policy),  std::move(anchored), std::move(calibration)};
}

std::string dump_kb(const KnowledgeBase& kb) { return kb_to_json(kb).dump(2) + "\n"; }

KnowledgeBase kb_from_document(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw KbError(std::string("kb document is not valid JSON: ") + e.what());
  }
  return kb_from_json(j);
}

KnowledgeBase load_kb_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw KbError("cannot open knowledge base '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return kb_from_document(buf.str());
}

void save_kb_file(const KnowledgeBase& kb, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << dump_kb(kb);
  if (!out.flush()) throw std::runtime_error("cannot write '" + path.string() + "'");
}

}  // namespace fuzzcare
