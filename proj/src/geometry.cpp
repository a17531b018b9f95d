#include "ccwb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ccwb/error.hpp"

namespace ccwb::geo {

namespace {

// x = slope * t + intercept
struct Line {
  double slope, intercept;
  double at(double t) const { return slope * t + intercept; }
};

// Convex region: t in (t_lo, t_hi), max(lower) < x < min(upper).
struct Convex {
  double t_lo = -inf, t_hi = inf;
  std::vector<Line> lower, upper;
};

Convex convex_of(const NullBox& b) {
  Convex c;
  if (std::isfinite(b.u.hi)) c.lower.push_back({1, -b.u.hi});
  if (std::isfinite(b.v.lo)) c.lower.push_back({-1, b.v.lo});
  if (std::isfinite(b.u.lo)) c.upper.push_back({1, -b.u.lo});
  if (std::isfinite(b.v.hi)) c.upper.push_back({-1, b.v.hi});
  return c;
}

Convex convex_of(const Rect& r) {
  Convex c;
  c.t_lo = r.t.lo;
  c.t_hi = r.t.hi;
  if (std::isfinite(r.x.lo)) c.lower.push_back({0, r.x.lo});
  if (std::isfinite(r.x.hi)) c.upper.push_back({0, r.x.hi});
  return c;
}

Convex convex_of(const Past& p) {
  Convex c;
  c.t_hi = p.t_max;
  if (std::isfinite(p.u_max)) c.lower.push_back({1, -p.u_max});
  if (std::isfinite(p.v_max)) c.upper.push_back({-1, p.v_max});
  return c;
}

Interval convex_slice(const Convex& c, double t) {
  if (!(c.t_lo < t && t < c.t_hi)) return {0, 0};
  double lo = -inf, hi = inf;
  for (const Line& l : c.lower) lo = std::max(lo, l.at(t));
  for (const Line& l : c.upper) hi = std::min(hi, l.at(t));
  return {lo, hi};
}

// Every convex leaf of the region tree.
void collect_leaves(const Region& r, std::vector<Convex>& out) {
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Composite>) {
          for (const Region& p : s.parts) collect_leaves(p, out);
        } else {
          out.push_back(convex_of(s));
        }
      },
      r.shape());
}

// Times at which the combinatorics of the slices can change: t-bounds and
// crossings of any two boundary lines. Between consecutive critical times
// every slice endpoint is a fixed line, so one probe per strip suffices.
std::vector<double> strip_probes(const Region& r) {
  std::vector<Convex> leaves;
  collect_leaves(r, leaves);
  std::vector<double> critical;
  std::vector<Line> lines;
  for (const Convex& c : leaves) {
    if (std::isfinite(c.t_lo)) critical.push_back(c.t_lo);
    if (std::isfinite(c.t_hi)) critical.push_back(c.t_hi);
    lines.insert(lines.end(), c.lower.begin(), c.lower.end());
    lines.insert(lines.end(), c.upper.begin(), c.upper.end());
  }
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j)
      if (lines[i].slope != lines[j].slope)
        critical.push_back((lines[j].intercept - lines[i].intercept) / (lines[i].slope - lines[j].slope));
  std::sort(critical.begin(), critical.end());
  critical.erase(std::unique(critical.begin(), critical.end()), critical.end());

  std::vector<double> probes;
  if (critical.empty()) return {0.0};
  probes.push_back(critical.front() - 1.0);
  for (std::size_t k = 0; k + 1 < critical.size(); ++k) probes.push_back(0.5 * (critical[k] + critical[k + 1]));
  probes.push_back(critical.back() + 1.0);
  return probes;
}

std::vector<Region> flatten_union(const Region& r) {
  if (const auto* c = std::get_if<Composite>(&r.shape()); c && c->op == Composite::Op::Union) {
    std::vector<Region> out;
    for (const Region& p : c->parts) {
      auto sub = flatten_union(p);
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }
  return {r};
}

// Null boxes of a region built only from null boxes and unions; nullopt otherwise.
std::optional<std::vector<NullBox>> as_null_boxes(const Region& r) {
  std::vector<NullBox> out;
  for (const Region& p : flatten_union(r)) {
    const auto* b = std::get_if<NullBox>(&p.shape());
    if (!b) return std::nullopt;
    out.push_back(*b);
  }
  return out;
}

NullBox box_intersection(const NullBox& a, const NullBox& b) {
  return {{std::max(a.u.lo, b.u.lo), std::min(a.u.hi, b.u.hi)}, {std::max(a.v.lo, b.v.lo), std::min(a.v.hi, b.v.hi)}};
}

bool box_empty(const NullBox& b) { return b.u.empty() || b.v.empty(); }

NullBox hull_union(const NullBox& a, const NullBox& b) {
  return {{std::min(a.u.lo, b.u.lo), std::max(a.u.hi, b.u.hi)}, {std::min(a.v.lo, b.v.lo), std::max(a.v.hi, b.v.hi)}};
}

std::string describe(const NullBox& b) {
  std::ostringstream os;
  os << "u in (" << b.u.lo << ", " << b.u.hi << "), v in (" << b.v.lo << ", " << b.v.hi << ")";
  return os.str();
}

Region empty_region() { return Region(NullBox{{0, 0}, {0, 0}}); }

}  // namespace

const char* to_string(CausalRelation r) {
  switch (r) {
    case CausalRelation::Timelike: return "timelike";
    case CausalRelation::Null: return "null";
    case CausalRelation::Spacelike: return "spacelike";
  }
  return "unknown";
}

CausalRelation causal_relation(const Point& p, const Point& q, double tol) {
  const double du = q.u() - p.u();
  const double dv = q.v() - p.v();
  if (std::abs(du) <= tol || std::abs(dv) <= tol) return CausalRelation::Null;
  return du * dv > 0 ? CausalRelation::Timelike : CausalRelation::Spacelike;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Interval> normalized(std::vector<Interval> parts) {
  parts.erase(std::remove_if(parts.begin(), parts.end(), [](const Interval& i) { return i.empty(); }), parts.end());
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const Interval& i : parts) {
    if (!out.empty() && i.lo < out.back().hi)
      out.back().hi = std::max(out.back().hi, i.hi);
    else
      out.push_back(i);
  }
  return out;
}

}  // namespace

IntervalSet::IntervalSet(Interval i) : parts_(normalized({i})) {}

bool IntervalSet::contains(double s) const {
  return std::any_of(parts_.begin(), parts_.end(), [&](const Interval& i) { return i.contains(s); });
}

double IntervalSet::measure() const {
  double m = 0;
  for (const Interval& i : parts_) m += i.hi - i.lo;
  return m;
}

bool IntervalSet::closure_covers(Interval target) const {
  if (target.empty()) return true;
  std::vector<Interval> closed;
  for (const Interval& i : parts_) {
    if (!closed.empty() && i.lo <= closed.back().hi)
      closed.back().hi = std::max(closed.back().hi, i.hi);
    else
      closed.push_back(i);
  }
  return std::any_of(closed.begin(), closed.end(),
                     [&](const Interval& i) { return i.lo <= target.lo && target.hi <= i.hi; });
}

IntervalSet IntervalSet::unite(const IntervalSet& o) const {
  IntervalSet out;
  std::vector<Interval> all = parts_;
  all.insert(all.end(), o.parts_.begin(), o.parts_.end());
  out.parts_ = normalized(std::move(all));
  return out;
}

IntervalSet IntervalSet::intersect(const IntervalSet& o) const {
  std::vector<Interval> all;
  for (const Interval& a : parts_)
    for (const Interval& b : o.parts_) all.push_back({std::max(a.lo, b.lo), std::min(a.hi, b.hi)});
  IntervalSet out;
  out.parts_ = normalized(std::move(all));
  return out;
}

IntervalSet IntervalSet::subtract(const IntervalSet& o) const {
  std::vector<Interval> current = parts_;
  for (const Interval& cut : o.parts_) {
    std::vector<Interval> next;
    for (const Interval& i : current) {
      next.push_back({i.lo, std::min(i.hi, cut.lo)});
      next.push_back({std::max(i.lo, cut.hi), i.hi});
    }
    current = normalized(std::move(next));
  }
  IntervalSet out;
  out.parts_ = std::move(current);
  return out;
}

// ---------------------------------------------------------------------------

bool NullBox::bounded() const {
  return std::isfinite(u.lo) && std::isfinite(u.hi) && std::isfinite(v.lo) && std::isfinite(v.hi);
}

Region::Region(NullBox b) : shape_(b) {}
Region::Region(Rect r) : shape_(r) {}
Region::Region(Past p) : shape_(p) {}

Region Region::double_cone(Interval u, Interval v) {
  if (u.empty() || v.empty()) throw InvariantError("region", "double cone intervals must be nonempty");
  return Region(NullBox{u, v});
}

Region Region::diamond(double t, double x, double half) {
  const Point c{t, x};
  return double_cone({c.u() - half, c.u() + half}, {c.v() - half, c.v() + half});
}

Region Region::rect(Interval t, Interval x) {
  if (t.empty() || x.empty()) throw InvariantError("region", "rectangle intervals must be nonempty");
  return Region(Rect{t, x});
}

Region Region::unite(std::vector<Region> parts) {
  std::vector<Region> flat;
  for (const Region& p : parts) {
    auto sub = flatten_union(p);
    flat.insert(flat.end(), sub.begin(), sub.end());
  }
  if (flat.empty()) return empty_region();
  if (flat.size() == 1) return flat.front();
  return Region(Shape(Composite{Composite::Op::Union, std::move(flat)}));
}

Region Region::intersect(std::vector<Region> parts) {
  if (parts.empty()) throw PreconditionError("intersection of no regions");
  if (parts.size() == 1) return parts.front();
  // Unions of null boxes stay unions of null boxes.
  std::vector<NullBox> acc{NullBox{{-inf, inf}, {-inf, inf}}};
  bool boxes = true;
  for (const Region& p : parts) {
    const auto bs = as_null_boxes(p);
    if (!bs) {
      boxes = false;
      break;
    }
    std::vector<NullBox> next;
    for (const NullBox& a : acc)
      for (const NullBox& b : *bs) {
        const NullBox m = box_intersection(a, b);
        if (!box_empty(m)) next.push_back(m);
      }
    acc = std::move(next);
  }
  if (boxes) {
    std::vector<Region> out(acc.begin(), acc.end());
    return unite(std::move(out));
  }
  return Region(Shape(Composite{Composite::Op::Intersection, std::move(parts)}));
}

Region Region::difference(Region a, Region b) {
  return Region(Shape(Composite{Composite::Op::Difference, {std::move(a), std::move(b)}}));
}

std::string Region::kind() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, NullBox>) return s.bounded() ? "double_cone" : "null_box";
        if constexpr (std::is_same_v<S, Rect>) return "rect";
        if constexpr (std::is_same_v<S, Past>) return "past";
        if constexpr (std::is_same_v<S, Composite>) {
          switch (s.op) {
            case Composite::Op::Union: return "union";
            case Composite::Op::Intersection: return "intersection";
            case Composite::Op::Difference: return "difference";
          }
        }
        return "unknown";
      },
      shape_);
}

bool Region::contains(const Point& p) const {
  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, NullBox>) return s.u.contains(p.u()) && s.v.contains(p.v());
        if constexpr (std::is_same_v<S, Rect>) return s.t.contains(p.t) && s.x.contains(p.x);
        if constexpr (std::is_same_v<S, Past>) return p.u() < s.u_max && p.v() < s.v_max && p.t < s.t_max;
        if constexpr (std::is_same_v<S, Composite>) {
          switch (s.op) {
            case Composite::Op::Union:
              return std::any_of(s.parts.begin(), s.parts.end(), [&](const Region& r) { return r.contains(p); });
            case Composite::Op::Intersection:
              return std::all_of(s.parts.begin(), s.parts.end(), [&](const Region& r) { return r.contains(p); });
            case Composite::Op::Difference: return s.parts[0].contains(p) && !s.parts[1].contains(p);
          }
        }
        return false;
      },
      shape_);
}

IntervalSet Region::slice(double t) const {
  return std::visit(
      [&](const auto& s) -> IntervalSet {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Composite>) {
          IntervalSet acc = s.parts[0].slice(t);
          for (std::size_t k = 1; k < s.parts.size(); ++k) {
            const IntervalSet next = s.parts[k].slice(t);
            switch (s.op) {
              case Composite::Op::Union: acc = acc.unite(next); break;
              case Composite::Op::Intersection: acc = acc.intersect(next); break;
              case Composite::Op::Difference: acc = acc.subtract(next); break;
            }
          }
          return acc;
        } else {
          return IntervalSet(convex_slice(convex_of(s), t));
        }
      },
      shape_);
}

bool Region::is_empty() const {
  for (double t : strip_probes(*this))
    if (!slice(t).empty()) return false;
  return true;
}

NullBox Region::null_hull() const {
  return std::visit(
      [&](const auto& s) -> NullBox {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, NullBox>) return s;
        if constexpr (std::is_same_v<S, Rect>)
          return {{s.t.lo - s.x.hi, s.t.hi - s.x.lo}, {s.t.lo + s.x.lo, s.t.hi + s.x.hi}};
        if constexpr (std::is_same_v<S, Past>) return {{-inf, s.u_max}, {-inf, s.v_max}};
        if constexpr (std::is_same_v<S, Composite>) {
          switch (s.op) {
            case Composite::Op::Union: {
              NullBox h = s.parts[0].null_hull();
              for (std::size_t k = 1; k < s.parts.size(); ++k) h = hull_union(h, s.parts[k].null_hull());
              return h;
            }
            case Composite::Op::Intersection: {
              NullBox h = s.parts[0].null_hull();
              for (std::size_t k = 1; k < s.parts.size(); ++k) h = box_intersection(h, s.parts[k].null_hull());
              return h;
            }
            case Composite::Op::Difference: return s.parts[0].null_hull();
          }
        }
        return {};
      },
      shape_);
}

bool Region::bounded() const { return null_hull().bounded(); }

std::vector<Region> Region::components() const {
  std::vector<Region> members = flatten_union(*this);
  members.erase(std::remove_if(members.begin(), members.end(), [](const Region& r) { return r.is_empty(); }),
                members.end());
  const std::size_t n = members.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (find(i) != find(j) && !Region::intersect({members[i], members[j]}).is_empty()) parent[find(i)] = find(j);
  std::vector<std::vector<Region>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(members[i]);
  std::vector<Region> out;
  for (auto& g : groups)
    if (!g.empty()) out.push_back(unite(std::move(g)));
  return out;
}

// ---------------------------------------------------------------------------

Region blc(const Region& v) {
  if (v.is_empty()) throw PreconditionError("blc: empty region");
  return std::visit(
      [&](const auto& s) -> Region {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, NullBox>) return Region(NullBox{{-inf, s.u.hi}, {-inf, s.v.hi}});
        if constexpr (std::is_same_v<S, Rect>) return Region(Past{s.t.hi - s.x.lo, s.t.hi + s.x.hi, s.t.hi});
        if constexpr (std::is_same_v<S, Past>) return Region(s);
        if constexpr (std::is_same_v<S, Composite>) {
          if (s.op != Composite::Op::Union)
            throw PreconditionError("blc: supported for double cones, rectangles and their unions");
          std::vector<Region> parts;
          for (const Region& p : s.parts)
            if (!p.is_empty()) parts.push_back(blc(p));
          return Region::unite(std::move(parts));
        }
        return v;
      },
      v.shape());
}

Region blc(const Point& p) { return Region(NullBox{{-inf, p.u()}, {-inf, p.v()}}); }

Region causal_complement(const Region& v) {
  if (v.is_empty()) throw PreconditionError("causal_complement: empty region");
  std::vector<Region> pieces;
  for (const Region& c : v.components()) {
    const NullBox h = c.null_hull();
    std::vector<Region> wedges;
    const NullBox right{{h.u.hi, inf}, {-inf, h.v.lo}};
    const NullBox left{{-inf, h.u.lo}, {h.v.hi, inf}};
    if (!box_empty(right)) wedges.emplace_back(right);
    if (!box_empty(left)) wedges.emplace_back(left);
    pieces.push_back(Region::unite(std::move(wedges)));
  }
  return Region::intersect(std::move(pieces));
}

std::vector<Region> component_completions(const Region& v) {
  std::vector<Region> out;
  for (const Region& c : v.components()) out.emplace_back(c.null_hull());
  return out;
}

Region causal_completion(const Region& v) {
  if (v.is_empty()) throw PreconditionError("causal_completion: empty region");
  if (!v.bounded()) throw PreconditionError("causal_completion: region is unbounded");
  const auto parts = component_completions(v);
  if (parts.size() > 1) {
    std::ostringstream os;
    os << "causal_completion: region has " << parts.size() << " components; per-component completions:";
    for (const Region& p : parts) os << " [" << describe(std::get<NullBox>(p.shape())) << "]";
    throw PreconditionError(os.str());
  }
  return parts.front();
}

bool spacelike_separated(const Region& a, const Region& b, double tol) {
  if (a.is_empty() || b.is_empty()) throw PreconditionError("spacelike_separated: empty region");
  for (const Region& ca : a.components())
    for (const Region& cb : b.components()) {
      const NullBox h1 = ca.null_hull(), h2 = cb.null_hull();
      const bool right_of = h1.u.hi <= h2.u.lo + tol && h2.v.hi <= h1.v.lo + tol;
      const bool left_of = h2.u.hi <= h1.u.lo + tol && h1.v.hi <= h2.v.lo + tol;
      if (!right_of && !left_of) return false;
    }
  return true;
}

double min_time(const Region& v) {
  const auto probes = strip_probes(v);
  // Probes sit one per strip; the first strip with a nonempty slice starts the region.
  for (std::size_t k = 0; k < probes.size(); ++k) {
    if (v.slice(probes[k]).empty()) continue;
    if (k == 0) return -inf;
    // The strip boundary is the critical time between the two probes.
    double lo = probes[k - 1], hi = probes[k];
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (v.slice(mid).empty()) lo = mid; else hi = mid;
    }
    return lo;
  }
  return inf;
}

bool hull_contains(const NullBox& outer, const NullBox& inner, double tol) {
  return outer.u.lo <= inner.u.lo + tol && inner.u.hi <= outer.u.hi + tol && outer.v.lo <= inner.v.lo + tol &&
         inner.v.hi <= outer.v.hi + tol;
}

WeakCauseRegion weak_cc_region(const Region& v1, const Region& v2, double margin, std::optional<double> top,
                               double tol) {
  if (!(margin > 0)) throw PreconditionError("weak_cc_region: margin must be positive");
  if (v1.is_empty() || v2.is_empty() || !v1.bounded() || !v2.bounded())
    throw PreconditionError("weak_cc_region: regions must be nonempty and bounded");
  if (!spacelike_separated(v1, v2, tol))
    throw PreconditionError("weak_cc_region: regions are not spacelike separated");

  const NullBox h1 = v1.null_hull(), h2 = v2.null_hull();
  // The left region has the larger u range.
  const bool first_left = h2.u.hi <= h1.u.lo + tol;
  const NullBox& left = first_left ? h1 : h2;
  const NullBox& right = first_left ? h2 : h1;

  const double overlap = 0.5 * (left.v.hi + right.u.hi);
  const double earliest = std::min(min_time(v1), min_time(v2));
  const double t_hi = top ? *top : std::min(overlap, earliest) - 1.0;
  if (t_hi > overlap + tol)
    throw PreconditionError("weak_cc_region: the backward cones do not overlap at the requested top time");
  if (t_hi > earliest + tol)
    throw PreconditionError("weak_cc_region: the requested top time is not below both regions");

  const Interval xs{t_hi - left.u.hi, right.v.hi - t_hi};
  const Region slab = Region::rect({t_hi - margin, t_hi}, xs);
  WeakCauseRegion out{slab, Region(slab.null_hull()), overlap};

  // Pasts grow at the speed of light going down, so coverage of the top edge
  // (in closure) gives coverage of every slice of the open slab.
  const Region pasts = Region::unite({blc(v1), blc(v2)});
  out.inside_pasts = pasts.slice(t_hi).closure_covers(xs);
  const NullBox hull = slab.null_hull();
  out.completion_covers = hull_contains(hull, h1, tol) && hull_contains(hull, h2, tol);
  out.disjoint = Region::intersect({slab, Region::unite({v1, v2})}).is_empty();
  if (!out.inside_pasts || !out.completion_covers || !out.disjoint)
    throw InternalError("weak_cc_region: constructed slab failed its postconditions");
  return out;
}

TildeRegions tilde_regions(const Region& v1, const Region& v2, const Region& v) {
  const Region b1 = blc(v1), b2 = blc(v2);
  const Region both = Region::intersect({b1, b2});
  return {Region::difference(Region::intersect({b1, v}), both), Region::difference(Region::intersect({b2, v}), both),
          Region::intersect({v, b1, b2})};
}

bool causal_shadow_check(const Region& v1, const Region& v2, double tol) {
  const Region completion = causal_completion(v2);
  return hull_contains(std::get<NullBox>(completion.shape()), v1.null_hull(), tol);
}

}  // namespace ccwb::geo
