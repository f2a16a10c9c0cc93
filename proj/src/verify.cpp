#include "hmlc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hmlc/util.hpp"

namespace hmlc::verify {

Taxonomy random_taxonomy(uint64_t seed, int n_nodes, int max_depth) {
  if (n_nodes < 1 || max_depth < 1) throw std::invalid_argument("random_taxonomy: bad shape");
  rng::Stream s(rng::key(seed, "random-taxonomy"));
  std::vector<int> depth(n_nodes, 1);
  std::string text = "n0\t-\n";
  for (int m = 1; m < n_nodes; ++m) {
    // Parent drawn among earlier nodes that still have headroom.
    int p;
    do {
      p = static_cast<int>(s.bounded(m));
    } while (depth[p] >= max_depth);
    depth[m] = depth[p] + 1;
    text += "n" + std::to_string(m) + "\tn" + std::to_string(p) + "\n";
  }
  return Taxonomy::parse(text);
}

std::vector<LabelState> random_labels(const Taxonomy& t, rng::Stream& s, double p_pos,
                                      double p_unknown) {
  std::vector<LabelState> z(t.size(), LabelState::Negative);
  for (NodeId m : t.topo_order()) {
    bool parent_pos = (m == t.root()) || z[*t.parent(m)] == LabelState::Positive;
    if (parent_pos && s.uniform() < p_pos) z[m] = LabelState::Positive;
  }
  // Unknown regions must be downward-closed and must not sit above a known Positive.
  for (NodeId m : t.topo_order()) {
    if (m != t.root() && z[*t.parent(m)] == LabelState::Unknown) {
      z[m] = LabelState::Unknown;
      continue;
    }
    if (s.uniform() < p_unknown) {
      z[m] = LabelState::Unknown;
      for (NodeId d : t.descendants(m)) z[d] = LabelState::Unknown;
    }
  }
  return z;
}

std::vector<double> random_logits(rng::Stream& s, int k, double lo, double hi) {
  std::vector<double> y(k);
  for (auto& v : y) v = s.uniform_in(lo, hi);
  return y;
}

double gamma_direct(std::span<const double> chain_logits, double z) {
  const int n = static_cast<int>(chain_logits.size());
  if (n < 1 || n > 24) throw std::invalid_argument("gamma_direct: chain length out of range");
  long double sum_exp = 0.0L;
  for (uint32_t mask = 1; mask < (1u << n); ++mask) {
    long double s = 0.0L;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) s += -static_cast<long double>(chain_logits[i]);
    sum_exp += std::exp(s);
  }
  long double sum_neg = 0.0L;
  for (double y : chain_logits) sum_neg += -static_cast<long double>(y);
  return static_cast<double>((1.0L - static_cast<long double>(z)) *
                             (sum_neg - std::log(sum_exp)));
}

LossResult hlup_reference(const Taxonomy& t, std::span<const double> y,
                          std::span<const LabelState> z) {
  LossResult r;
  r.grad.assign(t.size(), 0.0);
  long double total = 0.0L;
  for (NodeId m = 0; m < t.size(); ++m) {
    if (!known(z[m])) continue;
    const long double zm = label01(z[m]);
    long double p = 1.0L;
    for (NodeId a : t.ancestors(m))
      p *= 1.0L / (1.0L + std::exp(-static_cast<long double>(y[a])));
    total += -zm * std::log(p) - (1.0L - zm) * std::log(1.0L - p);
    const long double dldp = -zm / p + (1.0L - zm) / (1.0L - p);
    for (NodeId a : t.ancestors(m)) {
      long double sig = 1.0L / (1.0L + std::exp(-static_cast<long double>(y[a])));
      r.grad[a] += static_cast<double>(dldp * p * (1.0L - sig));
    }
  }
  r.value = static_cast<double>(total);
  return r;
}

LosscheckReport run_losscheck(const Taxonomy& t, uint64_t seed, int trials, int cap) {
  if (trials < 1) throw std::invalid_argument("run_losscheck: trials must be >= 1");
  for (NodeId m = 0; m < t.size(); ++m)
    if (t.depth(m) > cap)
      throw std::runtime_error("losscheck: node '" + t.name(m) + "' has ancestor chain " +
                               std::to_string(t.depth(m)) + " > exact-powerset cap " +
                               std::to_string(cap));

  LosscheckReport rep;
  rep.trials = trials;
  const int k = t.size();
  const double eps = 1e-5;

  for (int trial = 0; trial < trials; ++trial) {
    rng::Stream s(rng::key(seed, "losscheck", static_cast<uint64_t>(trial)));
    std::vector<double> y = random_logits(s, k, -8.0, 8.0);
    std::vector<LabelState> z = random_labels(t, s);

    // Stable vs naive (the naive form is exact in this logit range).
    LossResult stable = hlup_stable(t, y, z, GammaMode::ExactPowerset, cap);
    LossResult naive = hlup_naive(t, y, z);
    rep.max_value_err = std::max(
        rep.max_value_err, std::abs(stable.value - naive.value) / (1.0 + std::abs(naive.value)));
    for (int m = 0; m < k; ++m)
      rep.max_grad_err =
          std::max(rep.max_grad_err, std::abs(stable.grad[m] - naive.grad[m]) /
                                         std::max(1.0, std::abs(naive.grad[m])));

    // Gamma: exact vs direct enumeration, and the LSE/max sandwich.
    for (NodeId m = 0; m < k; ++m) {
      const auto& anc = t.ancestors(m);
      if (anc.size() > 20) continue;
      std::vector<double> chain;
      for (NodeId a : anc) chain.push_back(y[a]);
      for (double zm : {0.0, 1.0}) {
        GammaResult exact = gamma(chain, zm, GammaMode::ExactPowerset, cap);
        GammaResult approx = gamma(chain, zm, GammaMode::MaxApprox);
        if (anc.size() <= 6)
          rep.max_gamma_err =
              std::max(rep.max_gamma_err, std::abs(exact.value - gamma_direct(chain, zm)));
        double diff = approx.value - exact.value;
        double bound = (1.0 - zm) * std::log(std::pow(2.0, static_cast<double>(anc.size())) - 1.0);
        if (diff < -1e-12 || diff > bound + 1e-12) rep.sandwich_ok = false;
        rep.max_sandwich_slack =
            std::max(rep.max_sandwich_slack, std::max(-diff, diff - bound));
      }
    }

    // Finite differences for every loss with an analytic gradient.
    auto fd = [&](auto&& f) {
      rep.max_fd_err = std::max(rep.max_fd_err, grad_check(f, y, eps));
    };
    fd([&](std::span<const double> yy) { return br_loss(t, yy, z, BrScope::LeafOnly); });
    fd([&](std::span<const double> yy) { return br_loss(t, yy, z, BrScope::AllNodes); });
    fd([&](std::span<const double> yy) { return hlcp_loss(t, yy, z); });
    fd([&](std::span<const double> yy) { return hlup_naive(t, yy, z); });
    fd([&](std::span<const double> yy) {
      return hlup_stable(t, yy, z, GammaMode::ExactPowerset, cap);
    });
    fd([&](std::span<const double> yy) { return hlup_rescale(t, yy, z, 0.02); });
    // MaxApprox has subgradient kinks at zero logits and at argmax ties; skip
    // configurations where the probe straddles one.
    bool near_kink = false;
    double min_y = *std::min_element(y.begin(), y.end());
    for (double v : y) near_kink |= std::abs(v) < 1e-3;
    int near_min = 0;
    for (double v : y) near_min += std::abs(v - min_y) < 1e-3 ? 1 : 0;
    if (!near_kink && near_min == 1)
      fd([&](std::span<const double> yy) {
        return hlup_stable(t, yy, z, GammaMode::MaxApprox, cap);
      });
  }

  rep.ok = rep.max_value_err <= 1e-9 && rep.max_grad_err <= 1e-7 && rep.max_gamma_err <= 1e-12 &&
           rep.sandwich_ok && rep.max_fd_err < 1e-5;

  std::ostringstream os;
  os << "losscheck: " << trials << " trials on " << k << "-node taxonomy (depth "
     << t.max_depth() << ")\n";
  os << "  stable-vs-naive value rel err  " << util::fmt_double_sig(rep.max_value_err, 3)
     << "  (tol 1e-9)\n";
  os << "  stable-vs-naive grad rel err   " << util::fmt_double_sig(rep.max_grad_err, 3)
     << "  (tol 1e-7)\n";
  os << "  gamma exact-vs-direct abs err  " << util::fmt_double_sig(rep.max_gamma_err, 3)
     << "  (tol 1e-12)\n";
  os << "  gamma approx sandwich          " << (rep.sandwich_ok ? "holds" : "VIOLATED") << "\n";
  os << "  finite-difference max rel err  " << util::fmt_double_sig(rep.max_fd_err, 3)
     << "  (tol 1e-5)\n";
  os << (rep.ok ? "all checks passed" : "CHECKS FAILED") << "\n";
  rep.text = os.str();
  return rep;
}

}  // namespace hmlc::verify
