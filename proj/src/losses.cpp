#include "hmlc/losses.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hmlc {

double sigmoid(double y) {
  if (y >= 0) return 1.0 / (1.0 + std::exp(-y));
  double e = std::exp(y);
  return e / (1.0 + e);
}

Bce stable_bce(double y, double z) {
  double value = std::max(y, 0.0) - y * z + std::log1p(std::exp(-std::abs(y)));
  return {value, sigmoid(y) - z};
}

namespace {

void require_valid(const Taxonomy& t, std::span<const LabelState> z) {
  auto bad = validate_labels(t, z);
  if (!bad.empty())
    throw std::invalid_argument("inconsistent label vector at '" + t.name(bad.front()) + "'");
}

void require_size(const Taxonomy& t, std::span<const double> y, std::span<const LabelState> z) {
  if (static_cast<int>(y.size()) != t.size() || static_cast<int>(z.size()) != t.size())
    throw std::invalid_argument("logit/label vector length must equal taxonomy size");
}

}  // namespace

LossResult hlcp_loss(const Taxonomy& t, std::span<const double> y,
                     std::span<const LabelState> z) {
  require_size(t, y, z);
  require_valid(t, z);
  LossResult r;
  r.grad.assign(t.size(), 0.0);
  for (NodeId m = 0; m < t.size(); ++m) {
    if (!known(z[m])) continue;
    if (m != t.root() && z[*t.parent(m)] != LabelState::Positive) continue;
    Bce b = stable_bce(y[m], label01(z[m]));
    r.value += b.value;
    r.grad[m] += b.dvalue;
  }
  return r;
}

double unconditional_prob(const Taxonomy& t, std::span<const double> y, NodeId m) {
  double p = 1.0;
  for (NodeId a : t.ancestors(m)) p *= sigmoid(y[a]);
  return p;
}

LossResult hlup_naive(const Taxonomy& t, std::span<const double> y,
                      std::span<const LabelState> z) {
  require_size(t, y, z);
  LossResult r;
  r.grad.assign(t.size(), 0.0);
  for (NodeId m = 0; m < t.size(); ++m) {
    if (!known(z[m])) continue;
    const double zm = label01(z[m]);
    const double p = unconditional_prob(t, y, m);
    r.value += -zm * std::log(p) - (1.0 - zm) * std::log(1.0 - p);
    const double dldp = -zm / p + (1.0 - zm) / (1.0 - p);
    for (NodeId a : t.ancestors(m)) r.grad[a] += dldp * p * (1.0 - sigmoid(y[a]));
  }
  return r;
}

GammaResult gamma(std::span<const double> chain_logits, double z, GammaMode mode, int cap) {
  const int n = static_cast<int>(chain_logits.size());
  if (n < 1) throw std::invalid_argument("gamma: empty ancestor chain");

  GammaResult r;
  r.grad.assign(n, 0.0);
  const double w = 1.0 - z;  // positive labels contribute no correction

  double sum_neg = 0.0;
  for (double y : chain_logits) sum_neg += -y;

  if (mode == GammaMode::ExactPowerset) {
    if (n > cap)
      throw std::runtime_error("gamma: ancestor chain of length " + std::to_string(n) +
                               " exceeds the exact-powerset cap " + std::to_string(cap) +
                               "; request MaxApprox explicitly");
    const uint32_t total = (n >= 32) ? 0 : ((1u << n) - 1u);
    std::vector<double> subset(total + 1, 0.0);
    double smax = -std::numeric_limits<double>::infinity();
    for (uint32_t mask = 1; mask <= total; ++mask) {
      subset[mask] = subset[mask & (mask - 1)] - chain_logits[std::countr_zero(mask)];
      smax = std::max(smax, subset[mask]);
    }
    double denom = 0.0;
    std::vector<double> occupancy(n, 0.0);
    for (uint32_t mask = 1; mask <= total; ++mask) {
      double e = std::exp(subset[mask] - smax);
      denom += e;
      uint32_t bits = mask;
      while (bits) {
        occupancy[std::countr_zero(bits)] += e;
        bits &= bits - 1;
      }
    }
    const double lse = smax + std::log(denom);
    r.value = w * (sum_neg - lse);
    for (int i = 0; i < n; ++i) r.grad[i] = w * (-1.0 + occupancy[i] / denom);
    return r;
  }

  // MaxApprox: the maximizing subset takes every strictly negative logit; when all
  // logits are nonnegative the best subset is the singleton with the smallest logit.
  bool any_negative = false;
  for (double y : chain_logits) any_negative |= (y < 0.0);
  if (any_negative) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      if (chain_logits[i] < 0.0) {
        best += -chain_logits[i];
        r.grad[i] = 0.0;  // -1 from the sum cancels the subgradient
      } else {
        r.grad[i] = -w;
      }
    }
    r.value = w * (sum_neg - best);
  } else {
    int arg = 0;
    for (int i = 1; i < n; ++i)
      if (chain_logits[i] < chain_logits[arg]) arg = i;  // first minimum wins ties
    r.value = w * (sum_neg - (-chain_logits[arg]));
    for (int i = 0; i < n; ++i) r.grad[i] = (i == arg) ? 0.0 : -w;
  }
  return r;
}

LossResult hlup_stable(const Taxonomy& t, std::span<const double> y,
                       std::span<const LabelState> z, GammaMode mode, int cap) {
  require_size(t, y, z);
  LossResult r;
  r.grad.assign(t.size(), 0.0);
  std::vector<double> chain;
  for (NodeId m = 0; m < t.size(); ++m) {
    if (!known(z[m])) continue;
    const double zm = label01(z[m]);
    const auto& anc = t.ancestors(m);
    chain.clear();
    for (NodeId a : anc) {
      Bce b = stable_bce(y[a], zm);  // target z_m for every ancestor term
      r.value += b.value;
      r.grad[a] += b.dvalue;
      chain.push_back(y[a]);
    }
    GammaResult g = gamma(chain, zm, mode, cap);
    r.value += g.value;
    for (size_t i = 0; i < anc.size(); ++i) r.grad[anc[i]] += g.grad[i];
  }
  return r;
}

LossResult hlup_rescale(const Taxonomy& t, std::span<const double> y,
                        std::span<const LabelState> z, double floor) {
  require_size(t, y, z);
  if (!(floor >= 0.0 && floor < 1.0))
    throw std::invalid_argument("hlup_rescale: floor must be in [0,1)");
  LossResult r;
  r.grad.assign(t.size(), 0.0);
  std::vector<double> dlog;
  for (NodeId m = 0; m < t.size(); ++m) {
    if (!known(z[m])) continue;
    const double zm = label01(z[m]);
    const auto& anc = t.ancestors(m);
    // Each multiplicand is floor + (1-floor)*sigmoid(y) = 1 - (1-floor)*sigmoid(-y);
    // accumulate its log so the product never underflows.
    double lp = 0.0;
    dlog.clear();
    for (NodeId a : anc) {
      const double s_neg = sigmoid(-y[a]);
      const double mult = 1.0 - (1.0 - floor) * s_neg;
      lp += std::log1p(-(1.0 - floor) * s_neg);
      dlog.push_back((1.0 - floor) * s_neg * (1.0 - s_neg) / mult);
    }
    const double p = std::exp(lp);
    const double one_minus_p = -std::expm1(lp);
    r.value += -zm * lp - (1.0 - zm) * std::log(one_minus_p);
    const double dldlp = -zm + (1.0 - zm) * p / one_minus_p;
    for (size_t i = 0; i < anc.size(); ++i) r.grad[anc[i]] += dldlp * dlog[i];
  }
  return r;
}

double default_rescale_floor(int max_depth) {
  if (max_depth < 1) throw std::invalid_argument("default_rescale_floor: depth must be >= 1");
  double f = std::pow(1e-7, 1.0 / max_depth);
  return std::ceil(f * 100.0) / 100.0;
}

LossResult br_loss(const Taxonomy& t, std::span<const double> y,
                   std::span<const LabelState> z, BrScope scope) {
  require_size(t, y, z);
  LossResult r;
  r.grad.assign(t.size(), 0.0);
  for (NodeId m = 0; m < t.size(); ++m) {
    if (scope == BrScope::LeafOnly && !t.is_leaf(m)) continue;
    if (!known(z[m])) continue;
    Bce b = stable_bce(y[m], label01(z[m]));
    r.value += b.value;
    r.grad[m] += b.dvalue;
  }
  return r;
}

double grad_check(const std::function<LossResult(std::span<const double>)>& f,
                  std::span<const double> y, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");
  LossResult base = f(y);
  if (!std::isfinite(base.value)) throw std::runtime_error("grad_check: non-finite loss");
  std::vector<double> probe(y.begin(), y.end());
  double worst = 0.0;
  for (size_t m = 0; m < probe.size(); ++m) {
    const double keep = probe[m];
    probe[m] = keep + eps;
    double up = f(probe).value;
    probe[m] = keep - eps;
    double down = f(probe).value;
    probe[m] = keep;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::runtime_error("grad_check: non-finite loss in neighborhood of coordinate " +
                               std::to_string(m));
    const double fd = (up - down) / (2.0 * eps);
    const double err = std::abs(fd - base.grad[m]) / std::max(1.0, std::abs(base.grad[m]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace hmlc
