#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fuzzcare/fuzzy.hpp"

namespace fuzzcare {

struct Clause {
  std::string variable;
  std::string term;

  friend bool operator==(const Clause&, const Clause&) = default;
};

/// Conjunction of clauses, at most one per variable.
struct Antecedent {
  std::vector<Clause> clauses;

  friend bool operator==(const Antecedent&, const Antecedent&) = default;
};

struct Consequent {
  std::string variable;
  std::string term;

  friend bool operator==(const Consequent&, const Consequent&) = default;
};

enum class Provenance { generated, pinned };

const char* to_string(Provenance p) noexcept;

struct Rule {
  std::string id;
  Antecedent antecedent;
  Consequent consequent;
  Provenance provenance = Provenance::generated;

  friend bool operator==(const Rule&, const Rule&) = default;
};

/// An immutable rule set bound to its variables. Construction resolves every
/// clause to term indices, so inference never does string lookups.
class RuleBase {
 public:
  /// Throws UnknownVariable / UnknownTerm for unbindable clauses, KbError for
  /// repeated variables within a rule, repeated ids or duplicate antecedents.
  static RuleBase make(std::vector<LinguisticVariable> inputs, LinguisticVariable output, std::vector<Rule> rules);

  const std::vector<LinguisticVariable>& inputs() const noexcept { return inputs_; }
  const LinguisticVariable& output() const noexcept { return output_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }

  std::vector<std::string> input_ids() const;
  const std::string& output_id() const noexcept { return output_.name(); }

  struct BoundClause {
    std::size_t variable;
    std::size_t term;
  };
  struct BoundRule {
    std::vector<BoundClause> clauses;  // sorted by variable index
    std::size_t consequent;
  };
  const std::vector<BoundRule>& bound() const noexcept { return bound_; }

 private:
  RuleBase(std::vector<LinguisticVariable> inputs, LinguisticVariable output, std::vector<Rule> rules,
           std::vector<BoundRule> bound)
      : inputs_(std::move(inputs)), output_(std::move(output)), rules_(std::move(rules)), bound_(std::move(bound)) {}

  std::vector<LinguisticVariable> inputs_;
  LinguisticVariable output_;
  std::vector<Rule> rules_;
  std::vector<BoundRule> bound_;
};

/// Product of the per-variable term counts: the size of the complete
/// cartesian rule space (each variable contributes m^1 = m).
std::uint64_t rule_space_size(std::span<const std::size_t> term_counts);

/// Maps a complete antecedent to an output term label.
using ConsequentPolicy = std::function<std::string(const Antecedent&)>;

/// Enumerates the full cartesian product of input terms, declared variable
/// order outermost, severity order within each variable, the last variable
/// varying fastest. Rules get ids R0001, R0002, ... in that order; an
/// override replaces the generated rule at its antecedent verbatim and is
/// marked pinned. Throws DuplicateOverride, or KbError for an override that
/// is not a point of the product.
RuleBase generate_rule_base(const std::vector<LinguisticVariable>& inputs, const LinguisticVariable& output,
                            const ConsequentPolicy& policy, const std::vector<Rule>& overrides);

using FuzzyInputs = std::map<std::string, FuzzifiedValue, std::less<>>;

/// Min of the clause degrees. Throws MissingVariable / UnknownTerm.
double firing_strength(const Rule& rule, const FuzzyInputs& inputs);

struct FiredRule {
  std::size_t rule_index;
  std::string rule_id;
  double strength;
};

struct InferenceTrace {
  std::vector<FiredRule> fired;  // base order, strength > 0 only
  AggregatedOutput aggregated;
  double score = 0.0;
  std::string label;
};

/// Output term with the highest degree at x; ties go to the more severe term.
std::size_t select_label(const LinguisticVariable& output, double x);

/// Mamdani pass: min conjunction, clip, max aggregation, centroid, then
/// select_label at the centroid. Throws MissingVariable when an input is
/// absent and NoRuleFired when every strength is 0.
InferenceTrace infer(const RuleBase& base, const FuzzyInputs& inputs, std::size_t resolution = kDefaultResolution);

/// Same pass over a pre-bound degree table: degrees[v][t] is the degree of
/// term t of base.inputs()[v].
InferenceTrace infer(const RuleBase& base, const std::vector<std::vector<double>>& degrees,
                     std::size_t resolution = kDefaultResolution);

}  // namespace fuzzcare
