#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hmlc/dataset.hpp"
#include "hmlc/taxonomy.hpp"

namespace hmlc {

// Per-sample loss value plus the analytic gradient w.r.t. every node logit.
// Entries for nodes contributing no term are exactly 0.
struct LossResult {
  double value = 0.0;
  std::vector<double> grad;
};

struct Bce {
  double value;
  double dvalue;  // d value / d logit = sigmoid(y) - z
};

double sigmoid(double y);

// max(y,0) - y*z + log1p(exp(-|y|)); finite for any representable logit.
Bce stable_bce(double y, double z);

// Conditional-probability training loss: a node's term is active only when its
// parent label is Positive (the root is always active) and its own label is known.
// Throws on hierarchy-inconsistent label vectors.
LossResult hlcp_loss(const Taxonomy& t, std::span<const double> y,
                     std::span<const LabelState> z);

// Product of conditional sigmoids along the root..m chain.
double unconditional_prob(const Taxonomy& t, std::span<const double> y, NodeId m);

// Unconditional-probability CE computed literally: product, then log. Kept as the
// instability exhibit and as the oracle for the stable form; the result may be
// non-finite, which is a legal outcome here.
LossResult hlup_naive(const Taxonomy& t, std::span<const double> y,
                      std::span<const LabelState> z);

enum class GammaMode { ExactPowerset, MaxApprox };

inline constexpr int kDefaultPowersetCap = 20;

struct GammaResult {
  double value = 0.0;
  std::vector<double> grad;  // aligned with the ancestor chain passed in
};

// Correction term that turns the per-label unconditional CE into a sum of stable
// per-logit CE terms. Exact form runs a LogSumExp over all 2^|chain|-1 ancestor
// subset sums (refused above `cap`); MaxApprox replaces the LSE by the maximum,
// with the subgradient tie broken toward the first ancestor in root->m order.
GammaResult gamma(std::span<const double> chain_logits, double z, GammaMode mode,
                  int cap = kDefaultPowersetCap);

// Numerically stable unconditional-probability CE: for each known label m, a
// stable CE term per ancestor logit (all with target z_m) plus gamma. Finite for
// all finite logits.
LossResult hlup_stable(const Taxonomy& t, std::span<const double> y,
                       std::span<const LabelState> z, GammaMode mode,
                       int cap = kDefaultPowersetCap);

// Competitor baseline: each conditional probability is affinely rescaled onto
// [floor, 1] before the product; CE computed in log space.
LossResult hlup_rescale(const Taxonomy& t, std::span<const double> y,
                        std::span<const LabelState> z, double floor);

// Smallest 2-decimal floor with floor^max_depth >= 1e-7 (0.02 at depth 4).
double default_rescale_floor(int max_depth);

enum class BrScope { LeafOnly, AllNodes };

// Flat binary-relevance CE over the scoped nodes; no masking, no chaining.
LossResult br_loss(const Taxonomy& t, std::span<const double> y,
                   std::span<const LabelState> z, BrScope scope);

// Central finite differences against the analytic gradient; returns the max over
// coordinates of |fd - analytic| / max(1, |analytic|). Throws if the loss is
// non-finite anywhere in the probed neighborhood.
double grad_check(const std::function<LossResult(std::span<const double>)>& f,
                  std::span<const double> y, double eps);

}  // namespace hmlc
