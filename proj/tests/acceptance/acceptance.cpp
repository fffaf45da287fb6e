// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "fuzzcare/diagnosis.hpp"
#include "fuzzcare/rule_dsl.hpp"
#include "fuzzcare/service.hpp"
#include "oracle.hpp"
#include "run_cli.hpp"
#include "temp_dir.hpp"

using namespace fuzzcare;

namespace {

using Clock = std::chrono::steady_clock;

const std::string kData = FUZZCARE_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

Outcome gen_rules_count() {
  TempDir dir;
  const std::string out = (dir / "rules.dsl").string();
  const auto start = Clock::now();
  const auto r = run_cli("gen-rules --out '" + out + "'");
  const double elapsed = seconds_since(start);
  const std::string text = slurp(out);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  const std::size_t parsed = parse_rules(text).size();
  const bool ok = r.status == 0 && r.output == "3888\n" && lines == 3888 && parsed == 3888 && elapsed < 1.0;
  return {ok, std::to_string(parsed) + " rules written, reported " + r.output.substr(0, r.output.find('\n')) +
                  fmt(", %.3f s", elapsed)};
}

Outcome expert_rule_apexes() {
  const KnowledgeBase kb = load_default_kb();
  const RuleBase base = build_rule_base(kb);
  // Disease level column of the expert rule table.
  const char* expected[] = {"High", "Medium", "Medium", "Low", "High", "High", "Medium"};
  const auto pins = expert_rules();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pins.size(); ++i) {
    FuzzyInputs in;
    for (const auto& c : pins[i].antecedent.clauses) {
      const auto& v = kb.input(c.variable);
      in.emplace(v.name(), fuzzify(v, partition_centers(v)[*v.term_index(c.term)]));
    }
    hits += infer(base, in).label == expected[i] ? 1 : 0;
  }
  return {pins.size() == 7 && hits == 7, std::to_string(hits) + "/7 labels reproduced"};
}

Outcome reference_replay() {
  const char* expected[] = {"Low", "Low", "Medium", "High", "Low", "Low", "Medium", "High", "Low", "Low"};
  const std::string csv = slurp(kData + "/table2_batch.csv");
  const auto start = Clock::now();
  DiagnosisService service(load_default_kb(), nullptr);
  const auto first = service.batch(csv);
  const auto second = service.batch(csv);
  const double elapsed = seconds_since(start);
  if (first.status != 200) return {false, "batch returned " + std::to_string(first.status)};
  const Json reports = Json::parse(first.body);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < reports.size() && i < 10; ++i) matches += reports[i]["label"] == expected[i] ? 1 : 0;
  const bool deterministic = first.body == second.body;
  const bool ok = reports.size() == 10 && matches >= 9 && deterministic && elapsed < 1.0;
  return {ok, std::to_string(matches) + "/10 rows agree" + (deterministic ? ", deterministic" : ", NOT deterministic") +
                  fmt(", %.3f s for two passes", elapsed)};
}

Outcome eval_mean_probability() {
  const auto r = run_cli("--format json eval --csv '" + kData + "/table2.csv'");
  if (r.status != 0) return {false, "eval exited " + std::to_string(r.status)};
  const Json j = Json::parse(r.output);
  const double mean = j["summary"]["mean_probability"].get<double>();
  return {std::abs(mean - 0.9550) <= 0.0001, fmt("mean probability %.6f", mean)};
}

Outcome centroid_oracle() {
  oracle::Rng rng(20240501);
  std::size_t ok = 0;
  double worst = 0.0;
  const std::size_t n = 1000;
  for (std::size_t i = 0; i < n; ++i) {
    // unit universes, plus wider ones with the tolerance scaled by width
    const double lo = i % 2 == 0 ? 0.0 : rng.uniform(-500, 500);
    const double width = i % 2 == 0 ? 1.0 : rng.uniform(1, 500);
    const Universe u = Universe::make(lo, lo + width, "x");
    const auto terms = oracle::random_envelope(rng, u.lo, u.hi);
    std::vector<ClippedSet> clipped;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const auto& t = terms[k];
      clipped.push_back(clip_implication(
          FuzzySet::make("t" + std::to_string(k), MembershipFunction::trapezoidal(t.a, t.b, t.c, t.d), u), t.height));
    }
    const double got = defuzzify_centroid(aggregate(std::move(clipped)), kDefaultResolution);
    const double want = oracle::centroid([&](double x) { return oracle::envelope_degree(terms, x); }, u.lo, u.hi,
                                         10 * kDefaultResolution);
    const double err = std::abs(got - want) / width;
    worst = std::max(worst, err);
    ok += err <= 1e-6 ? 1 : 0;
  }
  return {ok == n, std::to_string(ok) + "/1000 within 1e-6 x width" + fmt(", worst %.2e", worst)};
}

Outcome completeness() {
  const KnowledgeBase kb = load_default_kb();
  const RuleBase base = build_rule_base(kb);
  oracle::Rng rng(7);
  std::size_t ok = 0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    FuzzyInputs in;
    for (const auto& v : kb.inputs) in.emplace(v.name(), fuzzify(v, rng.uniform(v.universe().lo, v.universe().hi)));
    try {
      const auto trace = infer(base, in);
      ok += !trace.fired.empty() && kb.output.term_index(trace.label) ? 1 : 0;
    } catch (const Error&) {
    }
  }
  return {ok == n, std::to_string(ok) + "/10000 tuples labelled with at least one fired rule"};
}

Outcome dsl_round_trip() {
  const auto base = build_rule_base(load_default_kb());
  const bool full = parse_rules(render_rules(base.rules())) == base.rules();
  const auto pins = expert_rules();
  const bool expert = pins.size() == 7 && parse_rules(render_rules(pins)) == pins;
  return {full && expert, std::string("3888-rule base ") + (full ? "identical" : "DIFFERS") + ", expert rules " +
                              (expert ? "identical" : "DIFFER")};
}

Outcome calibration_reproducible() {
  TempDir dir;
  const std::string out = (dir / "kb.json").string();
  const auto r = run_cli("calibrate --table2 '" + kData + "/table2.csv' --out '" + out + "'");
  if (r.status != 0) return {false, "calibrate exited " + std::to_string(r.status)};
  const std::string regenerated = slurp(out);
  const std::string shipped = slurp(kData + "/default_kb.json");
  return {regenerated == shipped, regenerated == shipped ? "byte-identical to data/default_kb.json"
                                                         : "differs from data/default_kb.json"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"gen-rules emits 3888 rules in under 1 s", gen_rules_count},
      {"expert rules at their apexes give their labels", expert_rule_apexes},
      {"reference cohort batch replay agrees on at least 9/10", reference_replay},
      {"eval mean probability is 0.9550", eval_mean_probability},
      {"centroid matches the 10x dense oracle on 1000 envelopes", centroid_oracle},
      {"10000 random tuples each fire a rule and get a label", completeness},
      {"rule DSL round trip", dsl_round_trip},
      {"calibrate regenerates the shipped kb", calibration_reproducible},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
