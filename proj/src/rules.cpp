#include "fuzzcare/rules.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "fuzzcare/error.hpp"

namespace fuzzcare {

const char* to_string(Provenance p) noexcept { return p == Provenance::pinned ? "pinned" : "generated"; }

namespace {

std::size_t find_variable(const std::vector<LinguisticVariable>& vars, const std::string& name) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name() == name) return i;
  }
  throw UnknownVariable(name);
}

std::size_t find_term(const LinguisticVariable& var, const std::string& label) {
  if (auto idx = var.term_index(label)) return *idx;
  throw UnknownTerm(var.name(), label);
}

RuleBase::BoundRule bind_rule(const Rule& rule, const std::vector<LinguisticVariable>& inputs,
                         const LinguisticVariable& output) {
  RuleBase::BoundRule bound;
  bound.clauses.reserve(rule.antecedent.clauses.size());
  for (const auto& clause : rule.antecedent.clauses) {
    const std::size_t v = find_variable(inputs, clause.variable);
    bound.clauses.push_back({v, find_term(inputs[v], clause.term)});
  }
  std::sort(bound.clauses.begin(), bound.clauses.end(),
            [](const auto& l, const auto& r) { return l.variable < r.variable; });
  for (std::size_t i = 1; i < bound.clauses.size(); ++i) {
    if (bound.clauses[i].variable == bound.clauses[i - 1].variable) {
      throw KbError("rule '" + rule.id + "' constrains '" + inputs[bound.clauses[i].variable].name() + "' twice");
    }
  }
  if (rule.consequent.variable != output.name()) throw UnknownVariable(rule.consequent.variable);
  bound.consequent = find_term(output, rule.consequent.term);
  return bound;
}

using AntecedentKey = std::vector<std::pair<std::size_t, std::size_t>>;

AntecedentKey key_of(const RuleBase::BoundRule& rule) {
  AntecedentKey key;
  key.reserve(rule.clauses.size());
  for (const auto& c : rule.clauses) key.emplace_back(c.variable, c.term);
  return key;
}

}  // namespace

RuleBase RuleBase::make(std::vector<LinguisticVariable> inputs, LinguisticVariable output, std::vector<Rule> rules) {
  std::vector<BoundRule> bound;
  bound.reserve(rules.size());
  std::set<AntecedentKey> antecedents;
  std::set<std::string, std::less<>> ids;
  for (const auto& rule : rules) {
    if (rule.id.empty()) throw KbError("rule without an id");
    if (!ids.insert(rule.id).second) throw KbError("duplicate rule id '" + rule.id + "'");
    bound.push_back(bind_rule(rule, inputs, output));
    if (!antecedents.insert(key_of(bound.back())).second) {
      throw KbError("rule '" + rule.id + "' repeats the antecedent of an earlier rule");
    }
  }
  return RuleBase(std::move(inputs), std::move(output), std::move(rules), std::move(bound));
}

std::vector<std::string> RuleBase::input_ids() const {
  std::vector<std::string> ids;
  ids.reserve(inputs_.size());
  for (const auto& v : inputs_) ids.push_back(v.name());
  return ids;
}

std::uint64_t rule_space_size(std::span<const std::size_t> term_counts) {
  std::uint64_t total = 1;
  for (std::size_t m : term_counts) {
    if (m == 0) throw std::invalid_argument("rule_space_size: term counts must be positive");
    if (total > std::numeric_limits<std::uint64_t>::max() / m) throw std::overflow_error("rule_space_size overflow");
    total *= m;
  }
  return total;
}

RuleBase generate_rule_base(const std::vector<LinguisticVariable>& inputs, const LinguisticVariable& output,
                            const ConsequentPolicy& policy, const std::vector<Rule>& overrides) {
  std::vector<std::size_t> counts;
  counts.reserve(inputs.size());
  for (const auto& v : inputs) counts.push_back(v.term_count());
  const std::uint64_t total = rule_space_size(counts);

  // Index overrides by their position in the product.
  std::map<std::uint64_t, const Rule*> pinned;
  for (const auto& rule : overrides) {
    const RuleBase::BoundRule b = bind_rule(rule, inputs, output);
    if (b.clauses.size() != inputs.size()) {
      throw KbError("override '" + rule.id + "' does not constrain every input variable");
    }
    std::uint64_t ordinal = 0;
    for (const auto& c : b.clauses) ordinal = ordinal * counts[c.variable] + c.term;
    if (!pinned.emplace(ordinal, &rule).second) {
      throw DuplicateOverride("override '" + rule.id + "' repeats the antecedent of another override");
    }
  }

  const std::size_t width = std::max<std::size_t>(4, std::to_string(total).size());
  std::vector<Rule> rules;
  rules.reserve(total);
  std::vector<std::size_t> odometer(inputs.size(), 0);
  for (std::uint64_t ordinal = 0; ordinal < total; ++ordinal) {
    if (auto it = pinned.find(ordinal); it != pinned.end()) {
      Rule rule = *it->second;
      rule.provenance = Provenance::pinned;
      rules.push_back(std::move(rule));
    } else {
      Rule rule;
      std::string digits = std::to_string(ordinal + 1);
      rule.id = "R" + std::string(width - digits.size(), '0') + digits;
      rule.antecedent.clauses.reserve(inputs.size());
      for (std::size_t v = 0; v < inputs.size(); ++v) {
        rule.antecedent.clauses.push_back({inputs[v].name(), inputs[v].term(odometer[v]).term});
      }
      rule.consequent = {output.name(), policy(rule.antecedent)};
      rule.provenance = Provenance::generated;
      rules.push_back(std::move(rule));
    }
    for (std::size_t v = inputs.size(); v-- > 0;) {
      if (++odometer[v] < counts[v]) break;
      odometer[v] = 0;
    }
  }
  return RuleBase::make(inputs, output, std::move(rules));
}

double firing_strength(const Rule& rule, const FuzzyInputs& inputs) {
  double strength = 1.0;
  for (const auto& clause : rule.antecedent.clauses) {
    auto it = inputs.find(clause.variable);
    if (it == inputs.end()) throw MissingVariable(clause.variable);
    auto mu = it->second.degree(clause.term);
    if (!mu) throw UnknownTerm(clause.variable, clause.term);
    strength = t_norm_min(strength, *mu);
  }
  return strength;
}

std::size_t select_label(const LinguisticVariable& output, double x) {
  std::size_t best = 0;
  double best_mu = -1.0;
  for (std::size_t i = 0; i < output.term_count(); ++i) {
    const double mu = output.term(i).degree(x);
    if (mu >= best_mu) {
      best = i;
      best_mu = mu;
    }
  }
  return best;
}

InferenceTrace infer(const RuleBase& base, const FuzzyInputs& inputs, std::size_t resolution) {
  const auto& vars = base.inputs();
  std::vector<std::vector<double>> degrees(vars.size());
  for (std::size_t v = 0; v < vars.size(); ++v) {
    auto it = inputs.find(vars[v].name());
    if (it == inputs.end()) throw MissingVariable(vars[v].name());
    degrees[v].reserve(vars[v].term_count());
    for (const auto& t : vars[v].terms()) {
      auto mu = it->second.degree(t.term);
      if (!mu) throw UnknownTerm(vars[v].name(), t.term);
      degrees[v].push_back(*mu);
    }
  }
  return infer(base, degrees, resolution);
}

InferenceTrace infer(const RuleBase& base, const std::vector<std::vector<double>>& degrees, std::size_t resolution) {
  if (degrees.size() != base.inputs().size()) throw std::invalid_argument("infer: degree table shape mismatch");
  InferenceTrace trace;
  std::vector<double> heights(base.output().term_count(), 0.0);
  const auto& bound = base.bound();
  for (std::size_t r = 0; r < bound.size(); ++r) {
    double strength = 1.0;
    for (const auto& c : bound[r].clauses) {
      strength = t_norm_min(strength, degrees[c.variable][c.term]);
      if (strength == 0.0) break;
    }
    if (strength > 0.0) {
      trace.fired.push_back({r, base.rules()[r].id, strength});
      heights[bound[r].consequent] = s_norm_max(heights[bound[r].consequent], strength);
    }
  }
  if (trace.fired.empty()) throw NoRuleFired();

  // Clipping each output term once at its max strength gives the same
  // envelope as clipping every fired rule separately.
  std::vector<ClippedSet> clipped;
  for (std::size_t t = 0; t < heights.size(); ++t) {
    if (heights[t] > 0.0) clipped.push_back(clip_implication(base.output().term(t), heights[t]));
  }
  trace.aggregated = aggregate(std::move(clipped));
  trace.score = defuzzify_centroid(trace.aggregated, resolution);
  trace.label = base.output().term(select_label(base.output(), trace.score)).term;
  return trace;
}

}  // namespace fuzzcare
