#ifndef CCWB_TOOLS_RECORD_HPP
#define CCWB_TOOLS_RECORD_HPP

#include <string>

#include "scenario.hpp"

namespace ccwb::app {

// Deterministic JSON: sorted keys, two-space indent, floats with 17
// significant digits, non-finite floats as the strings "inf", "-inf", "nan".
std::string dump_record(const json& j);

json to_json(const Matrix& m);
json to_json(const geo::Interval& i);
json to_json(const geo::NullBox& b);
json to_json(const geo::IntervalSet& s);
json to_json(const geo::Region& r);
json to_json(const toynet::LatticeRegion& d);
json to_json(const CommonCauseCertificate& c, int matrix_limit = 64);
json to_json(const RValue& r);

}  // namespace ccwb::app

#endif  // CCWB_TOOLS_RECORD_HPP
