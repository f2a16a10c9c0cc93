#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "hmlc/metrics.hpp"
#include "hmlc/rng.hpp"
#include "hmlc/taxonomy.hpp"

using namespace hmlc;

namespace {

constexpr LabelState P = LabelState::Positive;
constexpr LabelState N = LabelState::Negative;
constexpr LabelState U = LabelState::Unknown;

const std::vector<double> kScores = {0.1, 0.4, 0.35, 0.8};
const std::vector<uint8_t> kLabels = {0, 0, 1, 1};

// Brute-force pairwise oracle.
double auc_pairwise(const std::vector<double>& s, const std::vector<uint8_t>& z) {
  double wins = 0, pairs = 0;
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = 0; j < s.size(); ++j) {
      if (!(z[i] == 1 && z[j] == 0)) continue;
      pairs += 1;
      if (s[i] > s[j]) wins += 1;
      else if (s[i] == s[j]) wins += 0.5;
    }
  return wins / pairs;
}

}  // namespace

TEST_CASE("auc reference points") {
  CHECK(auc(kScores, kLabels) == 0.75);
  CHECK(auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<uint8_t>{0, 0, 1, 1}) == 1.0);
  CHECK(auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<uint8_t>{0, 1, 0, 1}) == 0.5);
  CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.2}, std::vector<uint8_t>{1, 1}),
                  std::invalid_argument);
}

TEST_CASE("auc equals the pairwise count on random data with ties") {
  rng::Stream s(rng::key(7, "auc"));
  for (int trial = 0; trial < 300; ++trial) {
    size_t n = 2 + s.bounded(40);
    std::vector<double> scores(n);
    std::vector<uint8_t> labels(n);
    bool has0 = false, has1 = false;
    for (size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(s.bounded(8)) / 8.0;  // force ties
      labels[i] = static_cast<uint8_t>(s.bounded(2));
      (labels[i] ? has1 : has0) = true;
    }
    if (!has0 || !has1) continue;
    CHECK(auc(scores, labels) == doctest::Approx(auc_pairwise(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("auc is a rank statistic and flips under negation") {
  rng::Stream s(rng::key(11, "auc-rank"));
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 2 + s.bounded(30);
    std::vector<double> scores(n);
    std::vector<uint8_t> labels(n);
    bool has0 = false, has1 = false;
    for (size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(s.bounded(1025)) / 1024.0;
      labels[i] = static_cast<uint8_t>(s.bounded(2));
      (labels[i] ? has1 : has0) = true;
    }
    if (!has0 || !has1) continue;
    double base = auc(scores, labels);
    auto apply = [&](auto f) {
      std::vector<double> t(n);
      for (size_t i = 0; i < n; ++i) t[i] = f(scores[i]);
      return auc(t, labels);
    };
    CHECK(apply([](double x) { return 2 * x + 3; }) == base);
    CHECK(apply([](double x) { return x * x * x + x; }) == base);
    CHECK(apply([](double x) { return std::exp(x); }) == base);
    CHECK(apply([](double x) { return std::atan(x); }) == base);

    // no ties -> auc(scores) + auc(-scores) = 1
    std::vector<double> jittered(n);
    for (size_t i = 0; i < n; ++i) jittered[i] = scores[i] + 1e-7 * static_cast<double>(i);
    std::vector<double> negated(n);
    for (size_t i = 0; i < n; ++i) negated[i] = -jittered[i];
    CHECK(auc(jittered, labels) + auc(negated, labels) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("average precision reference points") {
  CHECK(average_precision(kScores, kLabels) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(average_precision(std::vector<double>{0.9, 0.8, 0.1}, std::vector<uint8_t>{1, 1, 0}) ==
        1.0);
  // single positive ranked last of n
  CHECK(average_precision(std::vector<double>{0.9, 0.8, 0.1}, std::vector<uint8_t>{0, 0, 1}) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(average_precision(std::vector<double>{0.3}, std::vector<uint8_t>{0}),
                  std::invalid_argument);
  // ties broken by stable input order
  CHECK(average_precision(std::vector<double>{0.5, 0.5}, std::vector<uint8_t>{1, 0}) == 1.0);
  CHECK(average_precision(std::vector<double>{0.5, 0.5}, std::vector<uint8_t>{0, 1}) == 0.5);
}

TEST_CASE("percentile linear interpolation") {
  std::vector<double> v = {1, 2, 3, 4};
  CHECK(percentile(v, 0) == 1.0);
  CHECK(percentile(v, 100) == 4.0);
  CHECK(percentile(v, 50) == doctest::Approx(2.5));
  CHECK(percentile({7.0}, 2.5) == 7.0);
}

TEST_CASE("bootstrap_ci basics") {
  // constant metric -> degenerate interval
  auto constant = [](std::span<const uint32_t>) { return std::optional<double>(0.42); };
  auto [lo, hi] = bootstrap_ci(10, 100, 1, constant);
  CHECK(lo == 0.42);
  CHECK(hi == 0.42);

  // a single round collapses to that round's value
  int calls = 0;
  auto counting = [&](std::span<const uint32_t>) {
    ++calls;
    return std::optional<double>(3.14);
  };
  auto [l1, h1] = bootstrap_ci(5, 1, 9, counting);
  CHECK(calls == 1);
  CHECK(l1 == 3.14);
  CHECK(h1 == 3.14);

  // deterministic in seed
  auto metric = [&](std::span<const uint32_t> counts) -> std::optional<double> {
    std::vector<double> s;
    std::vector<uint8_t> z;
    for (size_t i = 0; i < counts.size(); ++i)
      for (uint32_t c = 0; c < counts[i]; ++c) {
        s.push_back(kScores[i]);
        z.push_back(kLabels[i]);
      }
    bool has0 = false, has1 = false;
    for (uint8_t v : z) (v ? has1 : has0) = true;
    if (!has0 || !has1) return std::nullopt;
    return auc(s, z);
  };
  auto a = bootstrap_ci(4, 5000, 7, metric);
  auto b = bootstrap_ci(4, 5000, 7, metric);
  CHECK(a == b);
  CHECK(a.first <= 0.75);
  CHECK(a.second >= 0.75);

  // degenerate in every round -> error
  auto never = [](std::span<const uint32_t>) { return std::optional<double>(); };
  CHECK_THROWS_AS(bootstrap_ci(4, 10, 3, never), std::runtime_error);
}

TEST_CASE("report means, degenerate labels and conditional subset") {
  Taxonomy t = Taxonomy::parse("root\t-\nleafA\troot\nleafB\troot\n");
  // 6 instances x 3 labels
  std::vector<LabelState> labels = {
      P, P, N,   //
      P, N, N,   //
      P, P, N,   //
      N, N, N,   //
      P, N, U,   //
      N, N, N,   //
  };
  std::vector<double> scores = {
      0.9, 0.8, 0.2,  //
      0.8, 0.3, 0.1,  //
      0.7, 0.9, 0.4,  //
      0.2, 0.1, 0.3,  //
      0.6, 0.2, 0.5,  //
      0.1, 0.4, 0.6,  //
  };
  MetricReport rep = compute_report(t, scores, labels, {});
  CHECK(rep.per_label.size() == 3);
  // leafB has no positives anywhere: absent from means, reported without auc
  CHECK(rep.per_label[2].label == "leafB");
  CHECK(rep.per_label[2].n_pos == 0);
  CHECK_FALSE(rep.per_label[2].auc.has_value());
  CHECK(rep.per_label[1].auc.has_value());
  CHECK(rep.mean_leaf_auc == rep.per_label[1].auc);  // only leafA qualifies
  CHECK(rep.mean_nonleaf_auc == rep.per_label[0].auc);

  // conditional subset: rows with root Positive (0,1,2,4)
  ReportOptions cond;
  cond.condition = t.root();
  MetricReport crep = compute_report(t, scores, labels, cond);
  CHECK(crep.n_instances == 4);
  // leafA within subset: z = 1,0,1,0 with scores .8,.3,.9,.2 -> perfect
  CHECK(*crep.per_label[1].auc == 1.0);
  // embedded conditional means of the full report agree with the explicit subset
  CHECK(rep.cond_leaf_auc == crep.mean_leaf_auc);

  // all instances positive at root -> conditional equals unconditional
  std::vector<LabelState> allpos = {P, P, N, P, N, N, P, P, N};
  std::vector<double> s2 = {0.9, 0.8, 0.2, 0.8, 0.3, 0.1, 0.7, 0.9, 0.4};
  MetricReport full = compute_report(t, s2, allpos, {});
  ReportOptions cnd2;
  cnd2.condition = t.root();
  MetricReport sub2 = compute_report(t, s2, allpos, cnd2);
  CHECK(full.mean_leaf_auc == sub2.mean_leaf_auc);
  CHECK(full.mean_leaf_ap == sub2.mean_leaf_ap);

  // empty conditional subset throws
  std::vector<LabelState> noroot = {N, N, N};
  std::vector<double> s3 = {0.1, 0.2, 0.3};
  ReportOptions c3;
  c3.condition = t.root();
  CHECK_THROWS_AS(compute_report(t, s3, noroot, c3), std::runtime_error);
}

TEST_CASE("report CI columns come from instance bootstrap") {
  Taxonomy t = Taxonomy::parse("root\t-\nleaf\troot\n");
  rng::Stream s(rng::key(13, "report-ci"));
  const size_t n = 120;
  std::vector<LabelState> labels(n * 2);
  std::vector<double> scores(n * 2);
  for (size_t i = 0; i < n; ++i) {
    bool pos = s.uniform() < 0.4;
    labels[i * 2] = P;
    labels[i * 2 + 1] = pos ? P : N;
    scores[i * 2] = 0.9;
    scores[i * 2 + 1] = pos ? 0.3 + 0.6 * s.uniform() : 0.6 * s.uniform();
  }
  ReportOptions opts;
  opts.ci_rounds = 400;
  opts.ci_seed = 17;
  MetricReport rep = compute_report(t, scores, labels, opts);
  REQUIRE(rep.per_label[1].auc.has_value());
  REQUIRE(rep.per_label[1].auc_lo.has_value());
  CHECK(*rep.per_label[1].auc_lo <= *rep.per_label[1].auc);
  CHECK(*rep.per_label[1].auc_hi >= *rep.per_label[1].auc);
  CHECK(rep.mean_leaf_auc_lo.has_value());

  // identical options reproduce byte-identical CSV/JSONL
  MetricReport rep2 = compute_report(t, scores, labels, opts);
  CHECK(report_csv(rep) == report_csv(rep2));
  CHECK(report_jsonl(rep) == report_jsonl(rep2));
  CHECK(report_csv(rep).find("mean_leaf") != std::string::npos);
}

TEST_CASE("bootstrap interval contains the point estimate on healthy data") {
  rng::Stream s(rng::key(29, "coverage"));
  const size_t n = 60;
  std::vector<double> scores(n);
  std::vector<uint8_t> labels(n);
  for (size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<uint8_t>(s.bounded(2));
    scores[i] = 0.3 * s.uniform() + (labels[i] ? 0.4 : 0.0) + 0.3 * s.uniform();
  }
  double point = auc(scores, labels);
  auto metric = [&](std::span<const uint32_t> counts) -> std::optional<double> {
    std::vector<double> ms;
    std::vector<uint8_t> mz;
    bool has0 = false, has1 = false;
    for (size_t i = 0; i < counts.size(); ++i)
      for (uint32_t c = 0; c < counts[i]; ++c) {
        ms.push_back(scores[i]);
        mz.push_back(labels[i]);
        (labels[i] ? has1 : has0) = true;
      }
    if (!has0 || !has1) return std::nullopt;
    return auc(ms, mz);
  };
  int contained = 0;
  for (uint64_t seed = 0; seed < 30; ++seed) {
    auto [lo, hi] = bootstrap_ci(n, 300, seed, metric);
    if (lo <= point && point <= hi) ++contained;
  }
  CHECK(contained == 30);
}

TEST_CASE("weighted bootstrap walk equals the metric on the materialized resample") {
  Taxonomy t = Taxonomy::parse("root\t-\n");
  rng::Stream s(rng::key(19, "materialize"));
  for (int trial = 0; trial < 40; ++trial) {
    const size_t n = 30;
    std::vector<double> scores(n);
    std::vector<LabelState> labels(n);
    for (size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(s.bounded(10)) / 10.0;
      labels[i] = s.uniform() < 0.5 ? P : N;
    }
    // A single bootstrap round: the CI collapses to that round's weighted AUC.
    ReportOptions opts;
    opts.ci_rounds = 1;
    opts.ci_seed = 1000 + trial;
    MetricReport rep = compute_report(t, scores, labels, opts);
    if (!rep.per_label[0].auc_lo) continue;  // degenerate resample

    // Materialize the identical resample (same keyed draw sequence) and compare.
    std::vector<uint32_t> counts(n, 0);
    rng::Stream r(rng::key(opts.ci_seed, "bootstrap", 0));
    for (size_t i = 0; i < n; ++i) ++counts[r.bounded(n)];
    std::vector<double> ms;
    std::vector<uint8_t> mz;
    for (size_t i = 0; i < n; ++i)
      for (uint32_t c = 0; c < counts[i]; ++c) {
        ms.push_back(scores[i]);
        mz.push_back(labels[i] == P ? 1 : 0);
      }
    CHECK(*rep.per_label[0].auc_lo == doctest::Approx(auc(ms, mz)).epsilon(1e-12));
    CHECK(*rep.per_label[0].auc_hi == doctest::Approx(auc(ms, mz)).epsilon(1e-12));
  }
}
