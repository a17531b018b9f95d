#ifndef CCWB_GEOMETRY_HPP
#define CCWB_GEOMETRY_HPP

// Causal regions of 1+1 Minkowski space in null coordinates u = t - x,
// v = t + x. All regions are open; intervals may be unbounded.

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ccwb/tolerances.hpp"

namespace ccwb::geo {

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct Point {
  double t = 0, x = 0;
  double u() const { return t - x; }
  double v() const { return t + x; }
  static Point from_null(double u, double v) { return {(u + v) / 2.0, (v - u) / 2.0}; }
};

enum class CausalRelation { Timelike, Null, Spacelike };
const char* to_string(CausalRelation r);
CausalRelation causal_relation(const Point& p, const Point& q, double tol = Tolerances{}.geo_tol);

// Open interval (lo, hi); empty when lo >= hi.
struct Interval {
  double lo = 0, hi = 0;
  bool empty() const { return !(lo < hi); }
  bool contains(double s) const { return lo < s && s < hi; }
  bool operator==(const Interval&) const = default;
};

// Finite union of disjoint open intervals, sorted. Differences drop boundary
// points, so results agree with the exact set up to finitely many points.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(Interval i);
  const std::vector<Interval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  bool contains(double s) const;
  double measure() const;
  // [i.lo, i.hi] lies in the closure of the set.
  bool closure_covers(Interval i) const;
  IntervalSet unite(const IntervalSet& o) const;
  IntervalSet intersect(const IntervalSet& o) const;
  IntervalSet subtract(const IntervalSet& o) const;
  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<Interval> parts_;
};

// u in (u.lo, u.hi), v in (v.lo, v.hi). Bounded ones are double cones;
// unbounded ones are wedges or backward cones.
struct NullBox {
  Interval u, v;
  bool bounded() const;
  bool operator==(const NullBox&) const = default;
};

// t in (t.lo, t.hi), x in (x.lo, x.hi).
struct Rect {
  Interval t, x;
  bool operator==(const Rect&) const = default;
};

// {u < u_max, v < v_max, t < t_max}: the causal past of a rectangle.
struct Past {
  double u_max = inf, v_max = inf, t_max = inf;
  bool operator==(const Past&) const = default;
};

class Region;

struct Composite {
  enum class Op { Union, Intersection, Difference } op = Op::Union;
  std::vector<Region> parts;  // Difference: parts[0] minus parts[1]
};

class Region {
 public:
  using Shape = std::variant<NullBox, Rect, Past, Composite>;

  Region(NullBox b);
  Region(Rect r);
  Region(Past p);
  static Region double_cone(Interval u, Interval v);
  // Double cone with the given center and half-height.
  static Region diamond(double t, double x, double half);
  static Region rect(Interval t, Interval x);
  static Region unite(std::vector<Region> parts);
  static Region intersect(std::vector<Region> parts);
  static Region difference(Region a, Region b);

  const Shape& shape() const { return shape_; }
  // "double_cone", "null_box", "rect", "past", "union", "intersection", "difference".
  std::string kind() const;
  bool contains(const Point& p) const;
  // x-slice at time t.
  IntervalSet slice(double t) const;
  bool is_empty() const;
  // Smallest null box containing the region (may be unbounded).
  NullBox null_hull() const;
  bool bounded() const;
  // Connected pieces of a union of convex members; a convex region is one piece.
  std::vector<Region> components() const;

 private:
  explicit Region(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

// Causal past. Exact for double cones, rectangles, pasts and unions of them.
Region blc(const Region& v);
Region blc(const Point& p);

// Points spacelike to every point of V. Unbounded hulls give empty wedges.
Region causal_complement(const Region& v);

// Null hull of a connected region. Throws PreconditionError for disconnected
// regions; the message lists the completion of every component.
Region causal_completion(const Region& v);
std::vector<Region> component_completions(const Region& v);

bool spacelike_separated(const Region& a, const Region& b, double tol = Tolerances{}.geo_tol);

struct WeakCauseRegion {
  Region region;       // the slab rectangle
  Region completion;   // its causal completion
  double overlap_time; // the two backward-cone slices overlap strictly below this time
  bool inside_pasts = false;    // region in (BLC(V1) \ V1) u (BLC(V2) \ V2)
  bool completion_covers = false;  // V1 u V2 in the completion
  bool disjoint = false;           // region misses V1 u V2
};

// Slab rectangle of height `margin` whose top edge is at `top` (default: one
// unit below both the overlap time and the earliest point of V1 u V2).
WeakCauseRegion weak_cc_region(const Region& v1, const Region& v2, double margin = 0.5,
                               std::optional<double> top = std::nullopt, double tol = Tolerances{}.geo_tol);

struct TildeRegions {
  Region first;   // parts of V in the past of V1 only
  Region second;  // parts of V in the past of V2 only
  Region common;  // parts of V in both pasts
};
TildeRegions tilde_regions(const Region& v1, const Region& v2, const Region& v);

// V1 lies in the causal completion of V2.
bool causal_shadow_check(const Region& v1, const Region& v2, double tol = Tolerances{}.geo_tol);

// Earliest time reached by the region (infimum of t).
double min_time(const Region& v);

bool hull_contains(const NullBox& outer, const NullBox& inner, double tol);

}  // namespace ccwb::geo

#endif  // CCWB_GEOMETRY_HPP
