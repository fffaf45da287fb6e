#include "fuzzcare/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fuzzcare/error.hpp"

namespace fuzzcare {

namespace {

std::string describe(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

}  // namespace

OutOfUniverse::OutOfUniverse(std::string variable, double value, double lo, double hi)
    : Error(variable + " = " + describe(value) + " is outside its universe [" + describe(lo) + ", " + describe(hi) +
            "]"),
      variable_(std::move(variable)),
      value_(value) {}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

Universe Universe::make(double lo, double hi, std::string units) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw KbError("universe requires finite lo < hi, got [" + describe(lo) + ", " + describe(hi) + "]");
  }
  if (units.empty()) throw KbError("universe units must be non-empty");
  return Universe{lo, hi, std::move(units)};
}

const char* to_string(ShapeKind kind) noexcept {
  switch (kind) {
    case ShapeKind::triangular:
      return "triangular";
    case ShapeKind::trapezoidal:
      return "trapezoidal";
  }
  return "?";
}

std::optional<ShapeKind> shape_kind_from_string(std::string_view name) noexcept {
  if (name == "triangular") return ShapeKind::triangular;
  if (name == "trapezoidal") return ShapeKind::trapezoidal;
  return std::nullopt;
}

MembershipFunction MembershipFunction::triangular(double a, double b, double c) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !(a <= b && b <= c)) {
    throw KbError("triangular membership requires a <= b <= c");
  }
  return MembershipFunction(ShapeKind::triangular, {a, b, b, c});
}

MembershipFunction MembershipFunction::trapezoidal(double a, double b, double c, double d) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d) ||
      !(a <= b && b <= c && c <= d)) {
    throw KbError("trapezoidal membership requires a <= b <= c <= d");
  }
  return MembershipFunction(ShapeKind::trapezoidal, {a, b, c, d});
}

MembershipFunction MembershipFunction::from_params(ShapeKind kind, std::span<const double> params) {
  if (kind == ShapeKind::triangular) {
    if (params.size() != 3) throw KbError("triangular membership takes 3 parameters");
    return triangular(params[0], params[1], params[2]);
  }
  if (params.size() != 4) throw KbError("trapezoidal membership takes 4 parameters");
  return trapezoidal(params[0], params[1], params[2], params[3]);
}

std::vector<double> MembershipFunction::params() const {
  if (kind_ == ShapeKind::triangular) return {pts_[0], pts_[1], pts_[3]};
  return {pts_[0], pts_[1], pts_[2], pts_[3]};
}

double MembershipFunction::degree(double x) const noexcept {
  const auto [a, b, c, d] = pts_;
  if (x < a || x > d) return 0.0;
  if (x >= b && x <= c) return 1.0;
  if (x < b) return (x - a) / (b - a);  // b > a here, since a <= x < b
  return (d - x) / (d - c);
}

MembershipFunction MembershipFunction::shifted(double delta) const {
  return MembershipFunction(kind_, {pts_[0] + delta, pts_[1] + delta, pts_[2] + delta, pts_[3] + delta});
}

double membership_degree(const MembershipFunction& mf, double x) noexcept { return mf.degree(x); }

FuzzySet FuzzySet::make(std::string term, MembershipFunction mf, Universe universe) {
  if (term.empty()) throw KbError("term label must be non-empty");
  if (mf.support_lo() < universe.lo || mf.support_hi() > universe.hi) {
    throw KbError("term '" + term + "' has support outside its universe");
  }
  return FuzzySet{std::move(term), mf, std::move(universe)};
}

LinguisticVariable LinguisticVariable::make(std::string name, Universe universe, std::vector<FuzzySet> terms) {
  if (name.empty()) throw KbError("variable name must be non-empty");
  if (terms.empty()) throw KbError("variable '" + name + "' has no terms");
  std::set<std::string, std::less<>> seen;
  for (const auto& t : terms) {
    if (!seen.insert(t.term).second) throw KbError("variable '" + name + "' repeats term '" + t.term + "'");
    if (t.universe != universe) throw KbError("term '" + t.term + "' is not defined over the universe of '" + name + "'");
  }
  return LinguisticVariable(std::move(name), std::move(universe), std::move(terms));
}

std::optional<std::size_t> LinguisticVariable::term_index(std::string_view label) const noexcept {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].term == label) return i;
  }
  return std::nullopt;
}

std::optional<double> LinguisticVariable::first_coverage_gap() const {
  // Each term is positive on an interval whose ends are breakpoints, so any
  // gap in the union either is a breakpoint or contains a midpoint.
  std::vector<double> points{universe_.lo, universe_.hi};
  for (const auto& t : terms_) {
    for (double p : t.mf.params()) {
      if (universe_.contains(p)) points.push_back(p);
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  auto covered = [this](double x) {
    return std::any_of(terms_.begin(), terms_.end(), [x](const FuzzySet& t) { return t.degree(x) > 0.0; });
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!covered(points[i])) return points[i];
    if (i + 1 < points.size()) {
      const double mid = 0.5 * (points[i] + points[i + 1]);
      if (!covered(mid)) return mid;
    }
  }
  return std::nullopt;
}

std::optional<double> FuzzifiedValue::degree(std::string_view term) const noexcept {
  for (const auto& [label, mu] : degrees) {
    if (label == term) return mu;
  }
  return std::nullopt;
}

FuzzifiedValue fuzzify(const LinguisticVariable& variable, double x, Clamp clamp) {
  const auto& u = variable.universe();
  if (!std::isfinite(x)) throw OutOfUniverse(variable.name(), x, u.lo, u.hi);
  if (!u.contains(x)) {
    if (clamp == Clamp::no) throw OutOfUniverse(variable.name(), x, u.lo, u.hi);
    x = std::clamp(x, u.lo, u.hi);
  }
  FuzzifiedValue out{variable.name(), {}};
  out.degrees.reserve(variable.term_count());
  for (const auto& t : variable.terms()) out.degrees.emplace_back(t.term, t.degree(x));
  return out;
}

double t_norm_min(double a, double b) noexcept { return a < b ? a : b; }

double s_norm_max(double a, double b) noexcept { return a > b ? a : b; }

ClippedSet clip_implication(const FuzzySet& set, double strength) {
  if (!(strength >= 0.0 && strength <= 1.0)) throw std::invalid_argument("clip strength must lie in [0, 1]");
  return ClippedSet{set.term, strength, set};
}

double AggregatedOutput::degree(double x) const noexcept {
  double mu = 0.0;
  for (const auto& c : clipped) mu = s_norm_max(mu, c.degree(x));
  return mu;
}

AggregatedOutput aggregate(std::vector<ClippedSet> clipped) {
  if (clipped.empty()) throw EmptyAggregate();
  Universe universe = clipped.front().set.universe;
  for (const auto& c : clipped) {
    if (c.set.universe != universe) throw std::invalid_argument("aggregate: clipped sets span different universes");
  }
  return AggregatedOutput{std::move(universe), std::move(clipped)};
}

std::vector<double> centroid_grid(const Universe& universe, std::size_t resolution) {
  if (resolution < kMinResolution) throw std::invalid_argument("resolution must be at least 100");
  const double step = universe.width() / static_cast<double>(resolution);
  std::vector<double> xs(resolution);
  for (std::size_t i = 0; i < resolution; ++i) xs[i] = universe.lo + (static_cast<double>(i) + 0.5) * step;
  return xs;
}

namespace {

// One-sided limits of a clipped set, so vertical edges are handled: the value
// just right of x and just left of x.
double right_limit(const ClippedSet& c, double x) {
  const MembershipFunction& m = c.set.mf;
  const double a = m.support_lo(), b = m.plateau_lo(), p = m.plateau_hi(), d = m.support_hi();
  double g = 0.0;
  if (x < a || x >= d) {
    g = 0.0;
  } else if (x < b) {
    g = (x - a) / (b - a);
  } else if (x < p) {
    g = 1.0;
  } else {
    g = (d - x) / (d - p);
  }
  return std::min(c.height, g);
}

double left_limit(const ClippedSet& c, double x) {
  const MembershipFunction& m = c.set.mf;
  const double a = m.support_lo(), b = m.plateau_lo(), p = m.plateau_hi(), d = m.support_hi();
  double g = 0.0;
  if (x <= a || x > d) {
    g = 0.0;
  } else if (x <= b) {
    g = (x - a) / (b - a);
  } else if (x <= p) {
    g = 1.0;
  } else {
    g = (d - x) / (d - p);
  }
  return std::min(c.height, g);
}

}  // namespace

double defuzzify_centroid(const AggregatedOutput& agg, std::size_t resolution) {
  if (resolution < kMinResolution) throw std::invalid_argument("resolution must be at least 100");
  const Universe& u = agg.universe;

  // Every point where some clipped set can change slope: the uniform cell
  // edges, each set's breakpoints, and where its ramps meet the clip height.
  std::vector<double> cuts;
  cuts.reserve(resolution + 1 + 6 * agg.clipped.size());
  for (std::size_t i = 0; i <= resolution; ++i) {
    cuts.push_back(u.lo + u.width() * static_cast<double>(i) / static_cast<double>(resolution));
  }
  for (const auto& c : agg.clipped) {
    const MembershipFunction& m = c.set.mf;
    const double a = m.support_lo(), b = m.plateau_lo(), p = m.plateau_hi(), d = m.support_hi();
    for (double x : {a, b, p, d}) cuts.push_back(x);
    if (b > a) cuts.push_back(a + c.height * (b - a));
    if (d > p) cuts.push_back(d - c.height * (d - p));
  }
  for (double& x : cuts) x = std::clamp(x, u.lo, u.hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Between cuts each clipped set is linear and the envelope is their max,
  // which is linear again between pairwise crossings. Both integrals are
  // then exact; moments are taken about lo.
  const std::size_t n = agg.clipped.size();
  std::vector<double> y0(n), y1(n);
  std::vector<double> ts;
  double mass = 0.0;
  double moment = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double x0 = cuts[k], x1 = cuts[k + 1];
    for (std::size_t i = 0; i < n; ++i) {
      y0[i] = right_limit(agg.clipped[i], x0);
      y1[i] = left_limit(agg.clipped[i], x1);
    }
    ts.assign({0.0, 1.0});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d0 = y0[i] - y0[j], d1 = y1[i] - y1[j];
        if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) ts.push_back(d0 / (d0 - d1));
      }
    }
    std::sort(ts.begin(), ts.end());
    auto envelope = [&](double t) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m = std::max(m, y0[i] + t * (y1[i] - y0[i]));
      return m;
    };
    double prev_t = ts.front();
    double prev_y = envelope(prev_t);
    for (std::size_t q = 1; q < ts.size(); ++q) {
      const double t = ts[q];
      const double y = envelope(t);
      const double s0 = (x0 - u.lo) + prev_t * (x1 - x0);
      const double s1 = (x0 - u.lo) + t * (x1 - x0);
      const double h = s1 - s0;
      mass += 0.5 * h * (prev_y + y);
      moment += h * (s0 * (2.0 * prev_y + y) + s1 * (prev_y + 2.0 * y)) / 6.0;
      prev_t = t;
      prev_y = y;
    }
  }
  if (!(mass > 0.0)) throw ZeroMass();
  return u.lo + moment / mass;
}

}  // namespace fuzzcare
