#pragma once

#include <string>
#include <vector>

#include "braidopt/model.hpp"

namespace braidopt {

struct SweepRow {
  double tau = 0.0;
  double w = 0.0;
  double c_min = 0.0;
  std::string method;  // "anneal", "bangbang" or "refined"
  std::string protocol_file;
  Protocol protocol;  // populated for in-memory results
};

struct RegimeAnnotation {
  double w = 0.0;
  double tau_c = 0.0;
  bool tau_c_below_grid = false;
  double regime2_end = 0.0;
  bool regime2_found = false;
};

// Rows sorted by (w, tau).
struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<RegimeAnnotation> regimes;
};

}  // namespace braidopt
