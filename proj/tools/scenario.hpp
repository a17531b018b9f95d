#ifndef CCWB_TOOLS_SCENARIO_HPP
#define CCWB_TOOLS_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccwb/commoncause.hpp"
#include "ccwb/geometry.hpp"
#include "ccwb/qprob.hpp"
#include "ccwb/toynet.hpp"

namespace ccwb::app {

using json = nlohmann::json;

enum class ScenarioKind { Quantum, Classical, Geometry, Toynet, Bell };
ScenarioKind parse_kind(const std::string& name);
const char* to_string(ScenarioKind kind);

struct Scenario {
  ScenarioKind kind = ScenarioKind::Quantum;
  std::uint64_t seed = 0;
  Tolerances tol;
  json payload;       // as written in the file
  json overrides;     // tolerance overrides from the file, echoed in reports
  std::string name;
};

// Throws ParseError with a line:column or field path for malformed input.
Scenario parse_scenario(const std::string& text, const std::string& origin);
Scenario load_scenario(const std::string& path);

// Field-path aware access into the payload. Every error names the field.
class Field {
 public:
  Field(const json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  const json& value() const { return *value_; }
  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;
  Field at(const std::string& key) const;
  Field at(std::size_t index) const;
  std::size_t size() const;

  double number() const;
  int integer() const;
  std::string text() const;
  std::vector<int> integers() const;
  std::vector<double> numbers() const;
  // Rows of entries; each entry is a number or an [re, im] pair.
  Matrix matrix() const;
  Vector vector() const;

  [[noreturn]] void fail(const std::string& message) const;

 private:
  const json* value_;
  std::string path_;
};

// Builders for the payload vocabulary (see README for the schema).
DensityState state_from(const Field& f, std::uint64_t seed, const Tolerances& tol);
Projection projection_from(const Field& f, const std::optional<TensorSplit>& split, const Tolerances& tol);
MatrixAlgebra algebra_from(const Field& f, int dim, const std::optional<TensorSplit>& split, const Tolerances& tol);
geo::Region region_from(const Field& f);
toynet::LatticeRegion lattice_region_from(const Field& f);
std::optional<TensorSplit> split_from(const Field& payload);

}  // namespace ccwb::app

#endif  // CCWB_TOOLS_SCENARIO_HPP
