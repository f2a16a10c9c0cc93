#pragma once

#include <span>
#include <vector>

#include "hmlc/taxonomy.hpp"

namespace hmlc {

struct ProbVector {
  std::vector<double> conditional;    // sigmoid(y_m)
  std::vector<double> unconditional;  // chain-rule product over ancestors
};

// Conditional sigmoids plus unconditional probabilities accumulated top-down in a
// single pass. Switches to log-space accumulation when any conditional drops below
// 1e-12; either way unconditional[parent] >= unconditional[child] holds exactly on
// every edge, and unconditional[root] == conditional[root].
ProbVector predict(const Taxonomy& t, std::span<const double> y);

}  // namespace hmlc
