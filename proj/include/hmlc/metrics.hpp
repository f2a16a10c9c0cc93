#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hmlc/dataset.hpp"
#include "hmlc/taxonomy.hpp"

namespace hmlc {

// Mann-Whitney rank statistic: (#(pos>neg) + 0.5*#ties) / (#pos * #neg).
// Throws when either class is missing.
double auc(std::span<const double> scores, std::span<const uint8_t> labels);

// Mean of precision at each positive's rank, scores descending, ties kept in
// stable input order. Throws when there is no positive.
double average_precision(std::span<const double> scores, std::span<const uint8_t> labels);

// Empirical percentile with linear interpolation; pct in [0,100].
double percentile(std::vector<double> values, double pct);

// Resamples n instances with replacement `rounds` times; the metric sees the
// multiplicity of each instance and may return nullopt for a degenerate resample.
// Throws if more than half the rounds are degenerate. Returns the 2.5th/97.5th
// percentiles. Deterministic in seed; rounds are independently keyed.
std::pair<double, double> bootstrap_ci(
    size_t n, int rounds, uint64_t seed,
    const std::function<std::optional<double>(std::span<const uint32_t>)>& metric);

struct LabelMetric {
  NodeId node = -1;
  std::string label;
  long n_pos = 0;
  long n_neg = 0;
  std::optional<double> auc;
  std::optional<double> ap;
  std::optional<double> auc_lo;
  std::optional<double> auc_hi;
};

struct MetricReport {
  std::vector<LabelMetric> per_label;
  // Means run over labels with at least one positive and one negative in the
  // evaluated subset; degenerate labels stay absent rather than being imputed.
  std::optional<double> mean_leaf_auc, mean_leaf_ap;
  std::optional<double> mean_nonleaf_auc, mean_nonleaf_ap;
  // Same leaf means restricted to instances whose condition-node label is Positive.
  std::optional<double> cond_leaf_auc, cond_leaf_ap;
  std::optional<double> mean_leaf_auc_lo, mean_leaf_auc_hi;
  size_t n_instances = 0;
};

struct ReportOptions {
  std::vector<NodeId> drop;             // labels excluded from rows and means
  bool leaves_only = false;             // flat leaf models: ignore non-leaf nodes
  std::optional<NodeId> condition;      // restrict instances to Positive at node
  std::optional<NodeId> cond_node;      // node for the embedded conditional means
                                        // (default: taxonomy root)
  int ci_rounds = 0;                    // 0 disables bootstrap CIs
  uint64_t ci_seed = 0;
};

// Full evaluation report over n instances; `scores` and `labels` are n x k
// row-major. Per-label Unknown ground truths are skipped. Throws when
// opts.condition selects an empty subset.
MetricReport compute_report(const Taxonomy& t, std::span<const double> scores,
                            std::span<const LabelState> labels,
                            const ReportOptions& opts = {});

std::string report_csv(const MetricReport& r);
std::string report_jsonl(const MetricReport& r);

}  // namespace hmlc
