#include "ccwb/error.hpp"
#include "ccwb/tolerances.hpp"

namespace ccwb {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Invariant: return "invariant";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::NotFound: return "not_found";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Infeasible:
    case ErrorKind::NotFound: return 1;
    case ErrorKind::Parse: return 2;
    case ErrorKind::Invariant:
    case ErrorKind::Precondition: return 3;
    case ErrorKind::Internal: return 4;
  }
  return 4;
}

std::map<std::string, double> Tolerances::as_map() const {
  return {{"tol_herm", tol_herm},       {"tol_state", tol_state},
          {"tol_proj", tol_proj},       {"meet_tol", meet_tol},
          {"comm_tol", comm_tol},       {"faithful_eps", faithful_eps},
          {"tol_alg", tol_alg},         {"product_tol", product_tol},
          {"cc_tol", cc_tol},           {"synth_tol", synth_tol},
          {"bell_tol", bell_tol},       {"geo_tol", geo_tol}};
}

void Tolerances::set(const std::string& key, double value) {
  double* slot = nullptr;
  if (key == "tol_herm") slot = &tol_herm;
  else if (key == "tol_state") slot = &tol_state;
  else if (key == "tol_proj") slot = &tol_proj;
  else if (key == "meet_tol") slot = &meet_tol;
  else if (key == "comm_tol") slot = &comm_tol;
  else if (key == "faithful_eps") slot = &faithful_eps;
  else if (key == "tol_alg") slot = &tol_alg;
  else if (key == "product_tol") slot = &product_tol;
  else if (key == "cc_tol") slot = &cc_tol;
  else if (key == "synth_tol") slot = &synth_tol;
  else if (key == "bell_tol") slot = &bell_tol;
  else if (key == "geo_tol") slot = &geo_tol;
  if (slot == nullptr) throw ParseError("unknown tolerance key '" + key + "'");
  if (!(value > 0.0)) throw ParseError("tolerance '" + key + "' must be positive");
  *slot = value;
}

}  // namespace ccwb
