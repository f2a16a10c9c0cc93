#include "hmlc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "hmlc/rng.hpp"
#include "hmlc/util.hpp"

namespace hmlc {

namespace {

struct ScoredLabel {
  double score;
  uint8_t pos;
  uint32_t slot;  // index into the evaluated instance subset, for bootstrap weights
};

// Shared tie-run walk; weights of 1 give the plain statistic.
template <typename WeightFn>
std::optional<double> auc_runs(const std::vector<ScoredLabel>& asc, WeightFn weight) {
  double pos_total = 0, neg_total = 0, acc = 0, neg_below = 0;
  size_t i = 0;
  while (i < asc.size()) {
    size_t j = i;
    double run_pos = 0, run_neg = 0;
    while (j < asc.size() && asc[j].score == asc[i].score) {
      double w = weight(asc[j]);
      (asc[j].pos ? run_pos : run_neg) += w;
      ++j;
    }
    acc += run_pos * neg_below + 0.5 * run_pos * run_neg;
    neg_below += run_neg;
    pos_total += run_pos;
    neg_total += run_neg;
    i = j;
  }
  if (pos_total == 0 || neg_total == 0) return std::nullopt;
  return acc / (pos_total * neg_total);
}

template <typename WeightFn>
std::optional<double> ap_walk(const std::vector<ScoredLabel>& desc, WeightFn weight) {
  double hits = 0, rank = 0, sum = 0, pos_total = 0;
  for (const auto& e : desc) {
    // Weights are multiplicities; a resampled instance repeats as adjacent
    // identical entries.
    const auto reps = static_cast<uint64_t>(weight(e));
    for (uint64_t rep = 0; rep < reps; ++rep) {
      rank += 1;
      if (e.pos) {
        hits += 1;
        sum += hits / rank;
      }
    }
    if (e.pos) pos_total += static_cast<double>(reps);
  }
  if (pos_total == 0) return std::nullopt;
  return sum / pos_total;
}

std::vector<ScoredLabel> ascending(std::span<const double> scores,
                                   std::span<const uint8_t> labels) {
  std::vector<ScoredLabel> v(scores.size());
  for (size_t i = 0; i < scores.size(); ++i)
    v[i] = {scores[i], labels[i], static_cast<uint32_t>(i)};
  std::sort(v.begin(), v.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });
  return v;
}

std::vector<ScoredLabel> descending_stable(std::vector<ScoredLabel> v) {
  std::stable_sort(v.begin(), v.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
  return v;
}

std::optional<double> mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::string cell(const std::optional<double>& v) {
  return v ? util::fmt_double(*v) : std::string();
}

}  // namespace

double auc(std::span<const double> scores, std::span<const uint8_t> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: size mismatch");
  auto v = auc_runs(ascending(scores, labels), [](const ScoredLabel&) { return 1.0; });
  if (!v) throw std::invalid_argument("auc: needs at least one positive and one negative");
  return *v;
}

double average_precision(std::span<const double> scores, std::span<const uint8_t> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("average_precision: size mismatch");
  std::vector<ScoredLabel> v(scores.size());
  for (size_t i = 0; i < scores.size(); ++i)
    v[i] = {scores[i], labels[i], static_cast<uint32_t>(i)};
  auto r = ap_walk(descending_stable(std::move(v)), [](const ScoredLabel&) { return 1.0; });
  if (!r) throw std::invalid_argument("average_precision: needs at least one positive");
  return *r;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  std::sort(values.begin(), values.end());
  double h = (pct / 100.0) * static_cast<double>(values.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::pair<double, double> bootstrap_ci(
    size_t n, int rounds, uint64_t seed,
    const std::function<std::optional<double>(std::span<const uint32_t>)>& metric) {
  if (rounds < 1) throw std::invalid_argument("bootstrap_ci: rounds must be >= 1");
  if (n < 1) throw std::invalid_argument("bootstrap_ci: empty sample");
  std::vector<uint32_t> counts(n);
  std::vector<double> values;
  values.reserve(rounds);
  for (int r = 0; r < rounds; ++r) {
    std::fill(counts.begin(), counts.end(), 0u);
    rng::Stream s(rng::key(seed, "bootstrap", static_cast<uint64_t>(r)));
    for (size_t i = 0; i < n; ++i) ++counts[s.bounded(n)];
    if (auto v = metric(counts)) values.push_back(*v);
  }
  if (values.size() * 2 < static_cast<size_t>(rounds))
    throw std::runtime_error("bootstrap_ci: metric degenerate in more than half the rounds");
  return {percentile(values, 2.5), percentile(values, 97.5)};
}

MetricReport compute_report(const Taxonomy& t, std::span<const double> scores,
                            std::span<const LabelState> labels, const ReportOptions& opts) {
  const int k = t.size();
  if (labels.size() != scores.size() || scores.size() % static_cast<size_t>(k) != 0)
    throw std::invalid_argument("compute_report: score/label shape mismatch");
  const size_t n_all = scores.size() / static_cast<size_t>(k);

  std::vector<size_t> instances;
  for (size_t i = 0; i < n_all; ++i) {
    if (opts.condition &&
        labels[i * k + static_cast<size_t>(*opts.condition)] != LabelState::Positive)
      continue;
    instances.push_back(i);
  }
  if (instances.empty())
    throw std::runtime_error("compute_report: empty instance subset");

  std::vector<char> dropped(k, 0);
  for (NodeId m : opts.drop) dropped[m] = 1;

  MetricReport rep;
  rep.n_instances = instances.size();

  // Per-label known (score, label) pairs; slot = position in `instances`.
  std::vector<std::vector<ScoredLabel>> raw(k);
  for (uint32_t slot = 0; slot < instances.size(); ++slot) {
    size_t i = instances[slot];
    for (NodeId m = 0; m < k; ++m) {
      if (dropped[m] || (opts.leaves_only && !t.is_leaf(m))) continue;
      LabelState s = labels[i * k + static_cast<size_t>(m)];
      if (!known(s)) continue;
      raw[m].push_back({scores[i * k + static_cast<size_t>(m)],
                        static_cast<uint8_t>(s == LabelState::Positive), slot});
    }
  }

  std::vector<std::vector<ScoredLabel>> asc(k), desc(k);
  std::vector<double> leaf_aucs, leaf_aps, nonleaf_aucs, nonleaf_aps;
  for (NodeId m = 0; m < k; ++m) {
    if (dropped[m] || (opts.leaves_only && !t.is_leaf(m))) continue;
    LabelMetric lm;
    lm.node = m;
    lm.label = t.name(m);
    for (const auto& e : raw[m]) (e.pos ? lm.n_pos : lm.n_neg)++;
    asc[m] = raw[m];
    std::sort(asc[m].begin(), asc[m].end(),
              [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });
    desc[m] = descending_stable(raw[m]);
    auto one = [](const ScoredLabel&) { return 1.0; };
    if (lm.n_pos > 0 && lm.n_neg > 0) lm.auc = auc_runs(asc[m], one);
    if (lm.n_pos > 0) lm.ap = ap_walk(desc[m], one);
    if (lm.n_pos > 0 && lm.n_neg > 0) {
      auto& aucs = t.is_leaf(m) ? leaf_aucs : nonleaf_aucs;
      auto& aps = t.is_leaf(m) ? leaf_aps : nonleaf_aps;
      aucs.push_back(*lm.auc);
      aps.push_back(*lm.ap);
    }
    rep.per_label.push_back(std::move(lm));
  }
  rep.mean_leaf_auc = mean_of(leaf_aucs);
  rep.mean_leaf_ap = mean_of(leaf_aps);
  rep.mean_nonleaf_auc = mean_of(nonleaf_aucs);
  rep.mean_nonleaf_ap = mean_of(nonleaf_aps);

  // Embedded conditional leaf means (skipped when this is already a conditional
  // report or when the subset is empty).
  if (!opts.condition) {
    ReportOptions sub;
    sub.drop = opts.drop;
    sub.leaves_only = opts.leaves_only;
    sub.condition = opts.cond_node ? *opts.cond_node : t.root();
    try {
      MetricReport cond = compute_report(t, scores, labels, sub);
      rep.cond_leaf_auc = cond.mean_leaf_auc;
      rep.cond_leaf_ap = cond.mean_leaf_ap;
    } catch (const std::runtime_error&) {
      // empty conditional subset: leave absent
    }
  }

  if (opts.ci_rounds > 0) {
    const size_t n = instances.size();
    std::vector<std::vector<double>> label_rounds(k);
    std::vector<double> mean_rounds;
    std::vector<uint32_t> counts(n);
    for (int r = 0; r < opts.ci_rounds; ++r) {
      std::fill(counts.begin(), counts.end(), 0u);
      rng::Stream s(rng::key(opts.ci_seed, "bootstrap", static_cast<uint64_t>(r)));
      for (size_t i = 0; i < n; ++i) ++counts[s.bounded(n)];
      auto weight = [&](const ScoredLabel& e) { return static_cast<double>(counts[e.slot]); };
      std::vector<double> round_leaf;
      for (const auto& lm : rep.per_label) {
        auto v = auc_runs(asc[lm.node], weight);
        if (v) label_rounds[lm.node].push_back(*v);
        if (v && t.is_leaf(lm.node)) round_leaf.push_back(*v);
      }
      if (!round_leaf.empty()) mean_rounds.push_back(*mean_of(round_leaf));
    }
    for (auto& lm : rep.per_label) {
      auto& vals = label_rounds[lm.node];
      if (vals.size() * 2 >= static_cast<size_t>(opts.ci_rounds) && !vals.empty()) {
        lm.auc_lo = percentile(vals, 2.5);
        lm.auc_hi = percentile(vals, 97.5);
      }
    }
    if (mean_rounds.size() * 2 >= static_cast<size_t>(opts.ci_rounds) && !mean_rounds.empty()) {
      rep.mean_leaf_auc_lo = percentile(mean_rounds, 2.5);
      rep.mean_leaf_auc_hi = percentile(mean_rounds, 97.5);
    }
  }
  return rep;
}

std::string report_csv(const MetricReport& r) {
  std::string out =
      "# auc=mann-whitney ap=precision-at-positive-ranks ties=stable-input-order\n"
      "label,n_pos,n_neg,auc,ap,auc_lo,auc_hi\n";
  for (const auto& lm : r.per_label) {
    out += lm.label + "," + std::to_string(lm.n_pos) + "," + std::to_string(lm.n_neg) + "," +
           cell(lm.auc) + "," + cell(lm.ap) + "," + cell(lm.auc_lo) + "," + cell(lm.auc_hi) + "\n";
  }
  out += "mean_leaf,,," + cell(r.mean_leaf_auc) + "," + cell(r.mean_leaf_ap) + "," +
         cell(r.mean_leaf_auc_lo) + "," + cell(r.mean_leaf_auc_hi) + "\n";
  out += "mean_nonleaf,,," + cell(r.mean_nonleaf_auc) + "," + cell(r.mean_nonleaf_ap) + ",,\n";
  out += "cond_mean_leaf,,," + cell(r.cond_leaf_auc) + "," + cell(r.cond_leaf_ap) + ",,\n";
  return out;
}

std::string report_jsonl(const MetricReport& r) {
  using nlohmann::json;
  auto put = [](json& j, const char* key, const std::optional<double>& v) {
    j[key] = v ? json(*v) : json(nullptr);
  };
  std::string out;
  json meta;
  meta["meta"] = {{"auc", "mann-whitney"},
                  {"ap", "precision-at-positive-ranks"},
                  {"ties", "stable-input-order"},
                  {"n_instances", r.n_instances}};
  out += meta.dump() + "\n";
  for (const auto& lm : r.per_label) {
    json j;
    j["label"] = lm.label;
    j["n_pos"] = lm.n_pos;
    j["n_neg"] = lm.n_neg;
    put(j, "auc", lm.auc);
    put(j, "ap", lm.ap);
    put(j, "auc_lo", lm.auc_lo);
    put(j, "auc_hi", lm.auc_hi);
    out += j.dump() + "\n";
  }
  json s1;
  s1["summary"] = "mean_leaf";
  put(s1, "auc", r.mean_leaf_auc);
  put(s1, "ap", r.mean_leaf_ap);
  put(s1, "auc_lo", r.mean_leaf_auc_lo);
  put(s1, "auc_hi", r.mean_leaf_auc_hi);
  out += s1.dump() + "\n";
  json s2;
  s2["summary"] = "mean_nonleaf";
  put(s2, "auc", r.mean_nonleaf_auc);
  put(s2, "ap", r.mean_nonleaf_ap);
  out += s2.dump() + "\n";
  json s3;
  s3["summary"] = "cond_mean_leaf";
  put(s3, "auc", r.cond_leaf_auc);
  put(s3, "ap", r.cond_leaf_ap);
  out += s3.dump() + "\n";
  return out;
}

}  // namespace hmlc
