#include <set>

#include "doctest.h"
#include "fuzzcare/cardio_kb.hpp"
#include "fuzzcare/error.hpp"
#include "fuzzcare/rules.hpp"
#include "oracle.hpp"

using namespace fuzzcare;

namespace {

const Universe kU = Universe::make(0, 10, "u");

LinguisticVariable var2(const std::string& name) {
  return LinguisticVariable::make(name, kU,
                                  {FuzzySet::make("Lo", MembershipFunction::trapezoidal(0, 0, 3, 7), kU),
                                   FuzzySet::make("Hi", MembershipFunction::trapezoidal(3, 7, 10, 10), kU)});
}

LinguisticVariable out3() {
  return LinguisticVariable::make("out", kU,
                                  {FuzzySet::make("Low", MembershipFunction::trapezoidal(0, 0, 2, 5), kU),
                                   FuzzySet::make("Medium", MembershipFunction::triangular(2, 5, 8), kU),
                                   FuzzySet::make("High", MembershipFunction::trapezoidal(5, 8, 10, 10), kU)});
}

Rule rule(std::string id, std::vector<Clause> clauses, std::string term) {
  return Rule{std::move(id), Antecedent{std::move(clauses)}, Consequent{"out", std::move(term)}, Provenance::generated};
}

FuzzyInputs inputs_for(const std::vector<LinguisticVariable>& vars, const std::vector<double>& xs) {
  FuzzyInputs in;
  for (std::size_t i = 0; i < vars.size(); ++i) in.emplace(vars[i].name(), fuzzify(vars[i], xs[i]));
  return in;
}

}  // namespace

TEST_SUITE("rule-engine") {
  TEST_CASE("rule space size examples") {
    const std::vector<std::size_t> one{3};
    const std::vector<std::size_t> cardio{3, 3, 4, 3, 3, 3, 4};
    const std::vector<std::size_t> ones{1, 1, 1};
    CHECK(rule_space_size(one) == 3);
    CHECK(rule_space_size(cardio) == 3888);
    CHECK(rule_space_size(ones) == 1);
    const std::vector<std::size_t> zero{3, 0};
    CHECK_THROWS_AS(rule_space_size(zero), std::invalid_argument);
  }

  TEST_CASE("rule space size is the product for random counts") {
    oracle::Rng rng(21);
    for (int i = 0; i < 500; ++i) {
      std::vector<std::size_t> counts(1 + rng.index(8));
      std::uint64_t product = 1;
      for (auto& c : counts) {
        c = 1 + rng.index(6);
        product *= c;
      }
      REQUIRE(rule_space_size(counts) == product);
    }
  }

  TEST_CASE("generation enumerates the product in order") {
    const std::vector<LinguisticVariable> in{var2("a"), var2("b")};
    const auto base = generate_rule_base(in, out3(), [](const Antecedent&) { return std::string("Low"); }, {});
    REQUIRE(base.size() == 4);
    CHECK(base.rules()[0].id == "R0001");
    CHECK(base.rules()[0].antecedent.clauses == std::vector<Clause>{{"a", "Lo"}, {"b", "Lo"}});
    CHECK(base.rules()[1].antecedent.clauses == std::vector<Clause>{{"a", "Lo"}, {"b", "Hi"}});
    CHECK(base.rules()[3].antecedent.clauses == std::vector<Clause>{{"a", "Hi"}, {"b", "Hi"}});
    CHECK(base.input_ids() == std::vector<std::string>{"a", "b"});
    CHECK(base.output_id() == "out");
  }

  TEST_CASE("one-term variables give a single rule") {
    const auto single = LinguisticVariable::make(
        "s", kU, {FuzzySet::make("Only", MembershipFunction::trapezoidal(0, 0, 10, 10), kU)});
    auto s2 = LinguisticVariable::make("t", kU, single.terms());
    const auto base = generate_rule_base({single, s2}, out3(), [](const Antecedent&) { return std::string("Medium"); }, {});
    CHECK(base.size() == 1);
  }

  TEST_CASE("cardio generation covers the product exactly once") {
    const KnowledgeBase kb = load_default_kb();
    const RuleBase base = build_rule_base(kb);
    REQUIRE(base.size() == 3888);
    std::set<std::vector<std::string>> seen;
    for (const auto& r : base.rules()) {
      std::vector<std::string> key;
      for (const auto& c : r.antecedent.clauses) key.push_back(c.term);
      REQUIRE(r.antecedent.clauses.size() == 7);
      seen.insert(key);
    }
    CHECK(seen.size() == 3888);
    std::size_t expected = 1;
    for (const auto& v : kb.inputs) expected *= v.term_count();
    CHECK(seen.size() == expected);
  }

  TEST_CASE("overrides are pinned verbatim") {
    const KnowledgeBase kb = load_default_kb();
    const RuleBase base = build_rule_base(kb);
    const auto expert = expert_rules();
    for (const auto& pin : expert) {
      std::size_t hits = 0;
      for (const auto& r : base.rules()) {
        if (r.antecedent == pin.antecedent) {
          ++hits;
          CHECK(r == pin);
          CHECK(r.provenance == Provenance::pinned);
        }
      }
      CHECK(hits == 1);
    }
    // row 4 of the expert table is the one Low rule
    CHECK(expert[3].consequent.term == "Low");
    std::size_t pinned = 0;
    for (const auto& r : base.rules()) pinned += r.provenance == Provenance::pinned ? 1 : 0;
    CHECK(pinned == 7);
  }

  TEST_CASE("duplicate or partial overrides are rejected") {
    const std::vector<LinguisticVariable> in{var2("a"), var2("b")};
    auto policy = [](const Antecedent&) { return std::string("Low"); };
    const auto r1 = rule("x", {{"a", "Hi"}, {"b", "Lo"}}, "High");
    const auto r2 = rule("y", {{"b", "Lo"}, {"a", "Hi"}}, "Medium");
    CHECK_THROWS_AS(generate_rule_base(in, out3(), policy, {r1, r2}), DuplicateOverride);
    CHECK_THROWS_AS(generate_rule_base(in, out3(), policy, {rule("z", {{"a", "Hi"}}, "High")}), KbError);
    CHECK_THROWS_AS(generate_rule_base(in, out3(), policy, {rule("w", {{"a", "Mid"}, {"b", "Lo"}}, "High")}),
                    UnknownTerm);
  }

  TEST_CASE("rule base rejects duplicate antecedents and ids") {
    const std::vector<LinguisticVariable> in{var2("a"), var2("b")};
    CHECK_THROWS_AS(RuleBase::make(in, out3(),
                                   {rule("p", {{"a", "Hi"}, {"b", "Lo"}}, "High"),
                                    rule("q", {{"a", "Hi"}, {"b", "Lo"}}, "Low")}),
                    KbError);
    CHECK_THROWS_AS(RuleBase::make(in, out3(),
                                   {rule("p", {{"a", "Hi"}, {"b", "Lo"}}, "High"),
                                    rule("p", {{"a", "Lo"}, {"b", "Lo"}}, "Low")}),
                    KbError);
    CHECK_THROWS_AS(RuleBase::make(in, out3(), {rule("p", {{"c", "Hi"}}, "High")}), UnknownVariable);
    CHECK_THROWS_AS(RuleBase::make(in, out3(), {rule("p", {{"a", "Hi"}}, "Extreme")}), UnknownTerm);
  }

  TEST_CASE("firing strength is the minimum clause degree") {
    std::vector<LinguisticVariable> vars;
    std::vector<Clause> clauses;
    for (int i = 0; i < 7; ++i) {
      vars.push_back(var2("v" + std::to_string(i)));
      clauses.push_back({"v" + std::to_string(i), "Lo"});
    }
    const Rule r = rule("r", clauses, "Low");
    // Lo ramps from 1 at x=3 to 0 at x=7, so degree d sits at x = 7 - 4d.
    const std::vector<double> degrees{0.9, 0.4, 1.0, 0.7, 0.6, 0.8, 0.5};
    std::vector<double> xs;
    for (double d : degrees) xs.push_back(7 - 4 * d);
    CHECK(firing_strength(r, inputs_for(vars, xs)) == doctest::Approx(0.4));
    CHECK(firing_strength(r, inputs_for(vars, std::vector<double>(7, 1.0))) == 1.0);
    xs[3] = 9.0;
    CHECK(firing_strength(r, inputs_for(vars, xs)) == 0.0);
    FuzzyInputs partial = inputs_for(vars, std::vector<double>(7, 1.0));
    partial.erase("v6");
    CHECK_THROWS_AS(firing_strength(r, partial), MissingVariable);
  }

  TEST_CASE("firing strength is monotone in each clause degree") {
    const std::vector<LinguisticVariable> vars{var2("a"), var2("b"), var2("c")};
    const Rule r = rule("r", {{"a", "Lo"}, {"b", "Hi"}, {"c", "Lo"}}, "Low");
    oracle::Rng rng(22);
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> xs{rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10)};
      const double before = firing_strength(r, inputs_for(vars, xs));
      // moving a toward 0 and b toward 10 can only raise those clause degrees
      xs[0] = rng.uniform(0, xs[0]);
      xs[1] = rng.uniform(xs[1], 10);
      REQUIRE(firing_strength(r, inputs_for(vars, xs)) >= before);
    }
  }

  TEST_CASE("single fully satisfied rule defuzzifies to its consequent centroid") {
    const std::vector<LinguisticVariable> in{var2("a")};
    const auto base = RuleBase::make(in, out3(), {rule("only", {{"a", "Lo"}}, "High")});
    const auto trace = infer(base, inputs_for(in, {1.0}));
    REQUIRE(trace.fired.size() == 1);
    CHECK(trace.fired[0].strength == 1.0);
    CHECK(trace.score == doctest::Approx(oracle::trapezoid_centroid(5, 8, 10, 10)).epsilon(1e-12));
    CHECK(trace.label == "High");
  }

  TEST_CASE("toy system envelope equals the hand-computed pointwise max") {
    const std::vector<LinguisticVariable> in{var2("a"), var2("b")};
    const auto base = RuleBase::make(in, out3(),
                                     {rule("r1", {{"a", "Lo"}, {"b", "Lo"}}, "Low"),
                                      rule("r2", {{"a", "Lo"}, {"b", "Hi"}}, "Medium"),
                                      rule("r3", {{"a", "Hi"}, {"b", "Lo"}}, "Medium"),
                                      rule("r4", {{"a", "Hi"}, {"b", "Hi"}}, "High")});
    oracle::Rng rng(23);
    for (int i = 0; i < 200; ++i) {
      const double xa = rng.uniform(0, 10), xb = rng.uniform(0, 10);
      const auto trace = infer(base, inputs_for(in, {xa, xb}));
      const double alo = oracle::trapezoid(0, 0, 3, 7, xa), ahi = oracle::trapezoid(3, 7, 10, 10, xa);
      const double blo = oracle::trapezoid(0, 0, 3, 7, xb), bhi = oracle::trapezoid(3, 7, 10, 10, xb);
      const double hl = std::min(alo, blo);
      const double hm = std::max(std::min(alo, bhi), std::min(ahi, blo));
      const double hh = std::min(ahi, bhi);
      auto hand = [&](double y) {
        return std::max({std::min(hl, oracle::trapezoid(0, 0, 2, 5, y)), std::min(hm, oracle::trapezoid(2, 5, 5, 8, y)),
                         std::min(hh, oracle::trapezoid(5, 8, 10, 10, y))});
      };
      for (double y : centroid_grid(kU, kDefaultResolution)) REQUIRE(trace.aggregated.degree(y) == hand(y));
      CHECK(std::abs(trace.score - oracle::centroid(hand, 0, 10, 10 * kDefaultResolution)) < 1e-5);
    }
  }

  TEST_CASE("label selection picks argmax with the severe tie-break") {
    const auto out = out3();
    CHECK(out.term(select_label(out, 1.0)).term == "Low");
    CHECK(out.term(select_label(out, 5.0)).term == "Medium");
    CHECK(out.term(select_label(out, 9.0)).term == "High");
    // Low and Medium cross at 3.5, Medium and High at 6.5
    CHECK(out.term(select_label(out, 3.5)).term == "Medium");
    CHECK(out.term(select_label(out, 6.5)).term == "High");
  }

  TEST_CASE("no rule fired") {
    const std::vector<LinguisticVariable> in{var2("a")};
    const auto base = RuleBase::make(in, out3(), {rule("only", {{"a", "Lo"}}, "High")});
    CHECK_THROWS_AS(infer(base, inputs_for(in, {9.0})), NoRuleFired);
  }

  TEST_CASE("both infer overloads agree") {
    const KnowledgeBase kb = load_default_kb();
    const RuleBase base = build_rule_base(kb);
    oracle::Rng rng(24);
    for (int i = 0; i < 50; ++i) {
      FuzzyInputs fi;
      std::vector<std::vector<double>> table;
      for (const auto& v : kb.inputs) {
        const double x = rng.uniform(v.universe().lo, v.universe().hi);
        auto f = fuzzify(v, x);
        std::vector<double> row;
        for (const auto& [t, d] : f.degrees) row.push_back(d);
        table.push_back(row);
        fi.emplace(v.name(), std::move(f));
      }
      const auto a = infer(base, fi);
      const auto b = infer(base, table);
      REQUIRE(a.score == b.score);
      REQUIRE(a.label == b.label);
      REQUIRE(a.fired.size() == b.fired.size());
    }
  }

  TEST_CASE("completeness over random in-universe tuples") {
    const KnowledgeBase kb = load_default_kb();
    const RuleBase base = build_rule_base(kb);
    oracle::Rng rng(25);
    for (int i = 0; i < 2000; ++i) {
      FuzzyInputs fi;
      for (const auto& v : kb.inputs) fi.emplace(v.name(), fuzzify(v, rng.uniform(v.universe().lo, v.universe().hi)));
      const auto trace = infer(base, fi);
      REQUIRE_FALSE(trace.fired.empty());
      for (const auto& f : trace.fired) {
        REQUIRE(f.strength > 0.0);
        REQUIRE(f.strength <= 1.0);
      }
      REQUIRE(kb.output.term_index(trace.label).has_value());
    }
  }
}
