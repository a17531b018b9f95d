#include "scenario.hpp"

#include <fstream>
#include <sstream>

#include "ccwb/bell.hpp"

namespace ccwb::app {

ScenarioKind parse_kind(const std::string& name) {
  if (name == "quantum") return ScenarioKind::Quantum;
  if (name == "classical") return ScenarioKind::Classical;
  if (name == "geometry") return ScenarioKind::Geometry;
  if (name == "toynet") return ScenarioKind::Toynet;
  if (name == "bell") return ScenarioKind::Bell;
  throw ParseError("kind: unknown scenario kind '" + name + "'");
}

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Quantum: return "quantum";
    case ScenarioKind::Classical: return "classical";
    case ScenarioKind::Geometry: return "geometry";
    case ScenarioKind::Toynet: return "toynet";
    case ScenarioKind::Bell: return "bell";
  }
  return "unknown";
}

namespace {

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

cplx entry(const Field& f) {
  const json& v = f.value();
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  f.fail("expected a number or an [re, im] pair");
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ":" + line_column(text, e.byte == 0 ? 0 : e.byte - 1) + ": malformed JSON (" +
                     e.what() + ")");
  }
  const Field root(doc, origin);
  if (!doc.is_object()) root.fail("scenario must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (key != "kind" && key != "seed" && key != "tolerances" && key != "payload" && key != "name")
      root.at(key).fail("unknown top-level field");

  Scenario s;
  try {
    s.kind = parse_kind(root.at("kind").text());
  } catch (const ParseError& e) {
    root.at("kind").fail(e.what());
  }
  if (root.has("seed")) {
    const Field seed = root.at("seed");
    if (!seed.value().is_number_unsigned()) seed.fail("expected a non-negative integer");
    s.seed = seed.value().get<std::uint64_t>();
  }
  if (root.has("name")) s.name = root.at("name").text();
  if (root.has("tolerances")) {
    const Field tols = root.at("tolerances");
    if (!tols.value().is_object()) tols.fail("expected an object of tolerance overrides");
    for (const auto& [key, _] : tols.value().items()) {
      try {
        s.tol.set(key, tols.at(key).number());
      } catch (const ParseError&) {
        tols.at(key).fail("unknown tolerance");
      }
    }
    s.overrides = tols.value();
  } else {
    s.overrides = json::object();
  }
  s.payload = root.has("payload") ? root.at("payload").value() : json::object();
  if (!s.payload.is_object()) root.at("payload").fail("expected an object");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

// ---------------------------------------------------------------------------

bool Field::has(const std::string& key) const { return value_->is_object() && value_->contains(key); }

Field Field::at(const std::string& key) const {
  if (!value_->is_object()) fail("expected an object");
  const auto it = value_->find(key);
  if (it == value_->end()) fail("missing field '" + key + "'");
  return Field(*it, path_ + "." + key);
}

Field Field::at(std::size_t index) const {
  if (!value_->is_array()) fail("expected an array");
  if (index >= value_->size()) fail("index " + std::to_string(index) + " out of range");
  return Field((*value_)[index], path_ + "[" + std::to_string(index) + "]");
}

std::size_t Field::size() const {
  if (!value_->is_array()) fail("expected an array");
  return value_->size();
}

double Field::number() const {
  if (value_->is_string()) {
    const std::string s = value_->get<std::string>();
    if (s == "inf") return geo::inf;
    if (s == "-inf") return -geo::inf;
  }
  if (!value_->is_number()) fail("expected a number");
  return value_->get<double>();
}

int Field::integer() const {
  if (!value_->is_number_integer()) fail("expected an integer");
  return value_->get<int>();
}

std::string Field::text() const {
  if (!value_->is_string()) fail("expected a string");
  return value_->get<std::string>();
}

std::vector<int> Field::integers() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).integer());
  return out;
}

std::vector<double> Field::numbers() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
  return out;
}

Matrix Field::matrix() const {
  const std::size_t rows = size();
  if (rows == 0) fail("matrix must have at least one row");
  const std::size_t cols = at(0).size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const Field row = at(i);
    if (row.size() != cols) row.fail("ragged matrix row");
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entry(row.at(j));
  }
  return m;
}

Vector Field::vector() const {
  Vector v(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) v(static_cast<Eigen::Index>(i)) = entry(at(i));
  return v;
}

void Field::fail(const std::string& message) const { throw ParseError(path_ + ": " + message); }

// ---------------------------------------------------------------------------

std::optional<TensorSplit> split_from(const Field& payload) {
  if (!payload.has("split")) return std::nullopt;
  const Field f = payload.at("split");
  TensorSplit split{f.integers()};
  for (int d : split.dims)
    if (d < 1) f.fail("factor dimensions must be positive");
  return split;
}

DensityState state_from(const Field& f, std::uint64_t seed, const Tolerances& tol) {
  if (f.has("density")) return DensityState(f.at("density").matrix(), tol);
  if (f.has("vector")) {
    Vector psi = f.at("vector").vector();
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > tol.tol_state) f.at("vector").fail("state vector must have unit norm");
    return DensityState(psi * psi.adjoint(), tol);
  }
  if (f.has("preset")) {
    const std::string name = f.at("preset").text();
    if (name == "singlet") return DensityState(singlet_density(), tol);
    if (name == "werner") return DensityState(werner_density(f.at("w").number()), tol);
    f.at("preset").fail("unknown preset '" + name + "' (expected singlet or werner)");
  }
  if (f.has("random")) {
    const std::string ensemble = f.at("random").text();
    const int dim = f.at("dim").integer();
    if (dim < 1) f.at("dim").fail("dimension must be positive");
    const std::uint64_t s = f.has("seed") ? static_cast<std::uint64_t>(f.at("seed").integer()) : seed;
    const double mix = f.has("mix") ? f.at("mix").number() : 0.0;
    if (mix < 0 || mix > 1) f.at("mix").fail("mix must lie in [0, 1]");
    Rng rng(s);
    Matrix rho;
    if (ensemble == "mixed") {
      rho = random_density(dim, rng);
    } else if (ensemble == "pure") {
      const Vector psi = haar_vector(dim, rng);
      rho = psi * psi.adjoint();
    } else {
      f.at("random").fail("unknown ensemble '" + ensemble + "' (expected mixed or pure)");
    }
    rho = (1 - mix) * rho + mix * Matrix::Identity(dim, dim) / static_cast<double>(dim);
    Tolerances loose = tol;
    loose.tol_state = std::max(tol.tol_state, 1e-9);
    return DensityState(hermitian_part(rho), loose);
  }
  f.fail("state needs one of density, vector, preset or random");
}

Projection projection_from(const Field& f, const std::optional<TensorSplit>& split, const Tolerances& tol) {
  if (f.has("matrix")) return Projection(f.at("matrix").matrix(), tol);
  if (f.has("columns")) {
    const Matrix cols = f.at("columns").matrix();
    const Matrix gram = cols.adjoint() * cols;
    if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > tol.tol_proj)
      f.at("columns").fail("columns must be orthonormal");
    return Projection::onto_columns(cols);
  }
  if (f.has("local")) {
    if (!split) f.fail("a local projection needs a payload split");
    const std::vector<int> factors = f.at("factors").integers();
    for (int k : factors)
      if (k < 0 || k >= static_cast<int>(split->dims.size())) f.at("factors").fail("factor index out of range");
    const Projection local(f.at("local").matrix(), tol);
    if (local.dim() != split->dim_of(factors)) f.at("local").fail("local dimension does not match the factors");
    return Projection::trusted(embed(local.matrix(), *split, factors),
                               local.rank() * (split->total_dim() / local.dim()));
  }
  f.fail("projection needs one of matrix, columns or local");
}

MatrixAlgebra algebra_from(const Field& f, int dim, const std::optional<TensorSplit>& split, const Tolerances& tol) {
  if (f.value().is_string()) {
    const std::string name = f.text();
    if (name == "full") return MatrixAlgebra::full(dim);
    if (name == "diagonal") return MatrixAlgebra::diagonal(dim);
    if (name == "scalars") return MatrixAlgebra::scalars(dim);
    f.fail("unknown algebra '" + name + "'");
  }
  if (f.has("factor")) {
    if (!split) f.fail("a factor algebra needs a payload split");
    std::optional<Matrix> frame;
    if (f.has("frame")) frame = f.at("frame").matrix();
    return MatrixAlgebra::factor(*split, f.at("factor").integers(), std::move(frame));
  }
  if (f.has("generated")) {
    const Field gens = f.at("generated");
    std::vector<Matrix> ms;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      Matrix m = gens.at(i).matrix();
      if (m.rows() != dim || m.cols() != dim) gens.at(i).fail("generator has the wrong dimension");
      ms.push_back(std::move(m));
    }
    return MatrixAlgebra::generated(dim, std::move(ms), tol);
  }
  f.fail("algebra needs factor, generated, or one of full, diagonal, scalars");
}

geo::Region region_from(const Field& f) {
  const std::string type = f.at("type").text();
  if (type == "double_cone") {
    const auto u = f.at("u").numbers(), v = f.at("v").numbers();
    if (u.size() != 2 || v.size() != 2) f.fail("u and v must be [lo, hi] pairs");
    return geo::Region::double_cone({u[0], u[1]}, {v[0], v[1]});
  }
  if (type == "diamond") return geo::Region::diamond(f.at("t").number(), f.at("x").number(), f.at("half").number());
  if (type == "rect") {
    const auto t = f.at("t").numbers(), x = f.at("x").numbers();
    if (t.size() != 2 || x.size() != 2) f.fail("t and x must be [lo, hi] pairs");
    return geo::Region::rect({t[0], t[1]}, {x[0], x[1]});
  }
  if (type == "union") {
    const Field parts = f.at("parts");
    std::vector<geo::Region> out;
    for (std::size_t i = 0; i < parts.size(); ++i) out.push_back(region_from(parts.at(i)));
    return geo::Region::unite(std::move(out));
  }
  f.at("type").fail("unknown region type '" + type + "' (expected double_cone, diamond, rect or union)");
}

toynet::LatticeRegion lattice_region_from(const Field& f) {
  const auto sites = f.at("sites").integers();
  if (sites.size() != 2) f.at("sites").fail("expected [first, last]");
  return {f.at("step").integer(), sites[0], sites[1]};
}

}  // namespace ccwb::app
