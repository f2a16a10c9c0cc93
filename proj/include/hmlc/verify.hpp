#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hmlc/dataset.hpp"
#include "hmlc/losses.hpp"
#include "hmlc/rng.hpp"
#include "hmlc/taxonomy.hpp"

// Self-check machinery behind the `losscheck` command: randomized cross-checks of
// the stable unconditional CE against its literal form, of gamma against direct
// powerset enumeration, and finite-difference checks of every analytic gradient.
namespace hmlc::verify {

// Random tree with n_nodes and depth <= max_depth; node 0 is the root.
Taxonomy random_taxonomy(uint64_t seed, int n_nodes, int max_depth);

// Hierarchy-consistent random labels; Unknown regions are downward-closed.
std::vector<LabelState> random_labels(const Taxonomy& t, rng::Stream& s, double p_pos = 0.5,
                                      double p_unknown = 0.15);

std::vector<double> random_logits(rng::Stream& s, int k, double lo, double hi);

// gamma by direct enumeration in extended precision: every nonempty ancestor
// subset, plain exp/sum/log. Independent of the LSE implementation; |chain| <= 24.
double gamma_direct(std::span<const double> chain_logits, double z);

// Literal per-label unconditional CE (product then log) in extended precision,
// with its gradient; trustworthy while the products stay away from 0 and 1.
LossResult hlup_reference(const Taxonomy& t, std::span<const double> y,
                          std::span<const LabelState> z);

struct LosscheckReport {
  int trials = 0;
  double max_value_err = 0;     // stable vs naive, relative
  double max_grad_err = 0;      // stable vs naive gradients, relative
  double max_gamma_err = 0;     // exact gamma vs direct enumeration, absolute
  double max_sandwich_slack = 0;  // max over trials of approx-exact excess beyond bound
  bool sandwich_ok = true;      // 0 <= gamma_approx - gamma_exact <= bound everywhere
  double max_fd_err = 0;        // worst finite-difference error across all losses
  bool ok = false;
  std::string text;             // human-readable summary
};

LosscheckReport run_losscheck(const Taxonomy& t, uint64_t seed, int trials,
                              int cap = kDefaultPowersetCap);

}  // namespace hmlc::verify
