#include "record.hpp"

#include <cmath>
#include <cstdio>

namespace ccwb::app {

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  // Keep floats recognisable as floats.
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

void write(const json& j, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(key).dump() + ": ";
        write(value, depth + 1, out);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          write(j[i], depth + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(j[i], depth + 1, out);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

}  // namespace

std::string dump_record(const json& j) {
  std::string out;
  write(j, 0, out);
  out += "\n";
  return out;
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const geo::Interval& i) { return json::array({i.lo, i.hi}); }

json to_json(const geo::NullBox& b) { return {{"u", to_json(b.u)}, {"v", to_json(b.v)}}; }

json to_json(const geo::IntervalSet& s) {
  json parts = json::array();
  for (const auto& p : s.parts()) parts.push_back(to_json(p));
  return parts;
}

json to_json(const geo::Region& r) {
  json out{{"variant", r.kind()}, {"null_hull", to_json(r.null_hull())}};
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, geo::NullBox>) {
          out["u"] = to_json(s.u);
          out["v"] = to_json(s.v);
          if (s.bounded()) {
            const geo::Point c = geo::Point::from_null((s.u.lo + s.u.hi) / 2, (s.v.lo + s.v.hi) / 2);
            out["center_tx"] = json::array({c.t, c.x});
          }
        } else if constexpr (std::is_same_v<S, geo::Rect>) {
          out["t"] = to_json(s.t);
          out["x"] = to_json(s.x);
        } else if constexpr (std::is_same_v<S, geo::Past>) {
          out["u_max"] = s.u_max;
          out["v_max"] = s.v_max;
          out["t_max"] = s.t_max;
        } else {
          json parts = json::array();
          for (const auto& p : s.parts) parts.push_back(to_json(p));
          out["parts"] = std::move(parts);
        }
      },
      r.shape());
  return out;
}

json to_json(const toynet::LatticeRegion& d) {
  return {{"step", d.step}, {"sites", json::array({d.first, d.last})}};
}

json to_json(const CommonCauseCertificate& c, int matrix_limit) {
  json out{{"weight", c.weight},
           {"conditions",
            {{"ab_given_c", c.conditions.ab_given_c},
             {"a_given_c", c.conditions.a_given_c},
             {"b_given_c", c.conditions.b_given_c},
             {"ab_given_cperp", c.conditions.ab_given_cperp},
             {"a_given_cperp", c.conditions.a_given_cperp},
             {"b_given_cperp", c.conditions.b_given_cperp}}},
           {"residual_screen_c", c.residual_screen_c},
           {"residual_screen_cperp", c.residual_screen_cperp},
           {"margin_a", c.margin_a},
           {"margin_b", c.margin_b},
           {"is_strong", c.is_strong},
           {"is_genuine", c.is_genuine},
           {"verified", c.verified}};
  if (c.cause) {
    out["cause_rank"] = c.cause->rank();
    if (c.cause->dim() <= matrix_limit) out["cause"] = to_json(c.cause->matrix());
  }
  if (c.classical_cause) out["classical_cause_mask"] = *c.classical_cause;
  if (c.localization) out["localization"] = *c.localization;
  return out;
}

json to_json(const RValue& r) {
  return {{"r", r.r}, {"phi_ab", r.phi_ab}, {"phi_a", r.phi_a}, {"phi_b", r.phi_b}, {"phi_a_or_b", r.phi_avb}};
}

}  // namespace ccwb::app
