#pragma once

// Fuzzy-set primitives for Mamdani inference: piecewise-linear membership
// functions, linguistic variables, min/max norms, clipping, max aggregation
// and grid centroid defuzzification. All types are immutable values.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fuzzcare {

inline constexpr std::size_t kDefaultResolution = 1001;
inline constexpr std::size_t kMinResolution = 100;

struct Universe {
  double lo = 0.0;
  double hi = 1.0;
  std::string units;

  /// Throws KbError unless lo < hi (both finite) and units is non-empty.
  static Universe make(double lo, double hi, std::string units);

  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  double width() const noexcept { return hi - lo; }

  friend bool operator==(const Universe&, const Universe&) = default;
};

enum class ShapeKind { triangular, trapezoidal };

const char* to_string(ShapeKind kind) noexcept;
std::optional<ShapeKind> shape_kind_from_string(std::string_view name) noexcept;

/// Triangular (a, b, c) or trapezoidal (a, b, c, d) membership function.
/// Equal neighbouring breakpoints are allowed and produce vertical edges,
/// which is how shouldered terms at a universe edge are expressed.
class MembershipFunction {
 public:
  static MembershipFunction triangular(double a, double b, double c);
  static MembershipFunction trapezoidal(double a, double b, double c, double d);
  /// Builds from a kind and its parameter list (3 or 4 values).
  static MembershipFunction from_params(ShapeKind kind, std::span<const double> params);

  ShapeKind kind() const noexcept { return kind_; }
  /// The declared parameters: 3 for triangular, 4 for trapezoidal.
  std::vector<double> params() const;

  double degree(double x) const noexcept;

  double support_lo() const noexcept { return pts_[0]; }
  double support_hi() const noexcept { return pts_[3]; }
  double plateau_lo() const noexcept { return pts_[1]; }
  double plateau_hi() const noexcept { return pts_[2]; }
  /// Midpoint of the degree-1 region (the apex of a triangle).
  double peak() const noexcept { return 0.5 * (pts_[1] + pts_[2]); }

  /// Same shape with every breakpoint moved by delta.
  MembershipFunction shifted(double delta) const;

  friend bool operator==(const MembershipFunction&, const MembershipFunction&) = default;

 private:
  MembershipFunction(ShapeKind kind, std::array<double, 4> pts) : kind_(kind), pts_(pts) {}

  ShapeKind kind_;
  std::array<double, 4> pts_;  // triangles stored as (a, b, b, c)
};

double membership_degree(const MembershipFunction& mf, double x) noexcept;

struct FuzzySet {
  std::string term;
  MembershipFunction mf;
  Universe universe;

  /// Throws KbError if the support of mf leaves the universe or term is empty.
  static FuzzySet make(std::string term, MembershipFunction mf, Universe universe);

  double degree(double x) const noexcept { return mf.degree(x); }

  friend bool operator==(const FuzzySet&, const FuzzySet&) = default;
};

class LinguisticVariable {
 public:
  /// Terms are listed in increasing severity. Throws KbError on an empty
  /// term list, duplicate labels, or a term defined over another universe.
  static LinguisticVariable make(std::string name, Universe universe, std::vector<FuzzySet> terms);

  const std::string& name() const noexcept { return name_; }
  const Universe& universe() const noexcept { return universe_; }
  const std::vector<FuzzySet>& terms() const noexcept { return terms_; }
  std::size_t term_count() const noexcept { return terms_.size(); }

  std::optional<std::size_t> term_index(std::string_view label) const noexcept;
  const FuzzySet& term(std::size_t index) const { return terms_.at(index); }

  /// First point of the universe where every term has degree 0, if any.
  /// Exact for piecewise-linear terms: checks every breakpoint and every
  /// midpoint between consecutive breakpoints.
  std::optional<double> first_coverage_gap() const;

  friend bool operator==(const LinguisticVariable&, const LinguisticVariable&) = default;

 private:
  LinguisticVariable(std::string name, Universe universe, std::vector<FuzzySet> terms)
      : name_(std::move(name)), universe_(std::move(universe)), terms_(std::move(terms)) {}

  std::string name_;
  Universe universe_;
  std::vector<FuzzySet> terms_;
};

struct FuzzifiedValue {
  std::string variable;
  /// One entry per term of the variable, in term order.
  std::vector<std::pair<std::string, double>> degrees;

  std::optional<double> degree(std::string_view term) const noexcept;
};

enum class Clamp { no, yes };

/// Throws OutOfUniverse when x is outside the universe (or not finite),
/// unless clamp is Clamp::yes, in which case finite x is clamped first.
FuzzifiedValue fuzzify(const LinguisticVariable& variable, double x, Clamp clamp = Clamp::no);

double t_norm_min(double a, double b) noexcept;
double s_norm_max(double a, double b) noexcept;

struct ClippedSet {
  std::string term;
  double height = 0.0;
  FuzzySet set;

  double degree(double x) const noexcept { return t_norm_min(height, set.degree(x)); }
};

/// Mamdani implication: the consequent set cut at the rule's firing strength.
ClippedSet clip_implication(const FuzzySet& set, double strength);

struct AggregatedOutput {
  Universe universe;
  std::vector<ClippedSet> clipped;

  /// Max-envelope of the clipped sets at x.
  double degree(double x) const noexcept;
};

/// Throws EmptyAggregate on an empty list; all sets must share one universe.
AggregatedOutput aggregate(std::vector<ClippedSet> clipped);

/// `resolution` cell centres spanning the universe uniformly; a convenient
/// sampling of an envelope for display and for checking against oracles.
std::vector<double> centroid_grid(const Universe& universe, std::size_t resolution);

/// Centroid of the max-envelope. The universe is split into `resolution`
/// uniform cells (at least kMinResolution) and each cell is further split at
/// the breakpoints, clip points and crossings of the clipped sets, so every
/// piece is linear and integrated exactly. The result therefore does not
/// depend on resolution beyond rounding. Throws ZeroMass when the envelope
/// vanishes everywhere.
double defuzzify_centroid(const AggregatedOutput& agg, std::size_t resolution = kDefaultResolution);

}  // namespace fuzzcare
