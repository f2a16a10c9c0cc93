#include "hmlc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hmlc/losses.hpp"

namespace hmlc {

namespace {

// log(sigmoid(y)) without underflow: min(y,0) - log1p(exp(-|y|)).
double log_sigmoid(double y) { return std::min(y, 0.0) - std::log1p(std::exp(-std::abs(y))); }

}  // namespace

ProbVector predict(const Taxonomy& t, std::span<const double> y) {
  if (static_cast<int>(y.size()) != t.size())
    throw std::invalid_argument("predict: logit vector length must equal taxonomy size");
  const int k = t.size();
  ProbVector out;
  out.conditional.resize(k);
  out.unconditional.resize(k);
  bool tiny = false;
  for (NodeId m = 0; m < k; ++m) {
    out.conditional[m] = sigmoid(y[m]);
    tiny |= out.conditional[m] < 1e-12;
  }

  if (!tiny) {
    // Multiplying by a factor <= 1 cannot round above the parent value.
    for (NodeId m : t.topo_order())
      out.unconditional[m] = (m == t.root())
                                 ? out.conditional[m]
                                 : out.unconditional[*t.parent(m)] * out.conditional[m];
    return out;
  }

  std::vector<double> lp(k);
  for (NodeId m : t.topo_order()) {
    if (m == t.root()) {
      lp[m] = log_sigmoid(y[m]);
      out.unconditional[m] = out.conditional[m];
    } else {
      NodeId p = *t.parent(m);
      lp[m] = lp[p] + log_sigmoid(y[m]);
      out.unconditional[m] = std::min(out.unconditional[p], std::exp(lp[m]));
    }
  }
  return out;
}

}  // namespace hmlc
