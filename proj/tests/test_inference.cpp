#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "hmlc/inference.hpp"
#include "hmlc/losses.hpp"
#include "hmlc/rng.hpp"
#include "hmlc/taxonomy.hpp"
#include "hmlc/verify.hpp"

using namespace hmlc;

TEST_CASE("predict on the all-zero 3-chain is exactly (0.5, 0.25, 0.125)") {
  Taxonomy t = Taxonomy::parse("a\t-\nb\ta\nc\tb\n");
  ProbVector p = predict(t, std::vector<double>{0.0, 0.0, 0.0});
  CHECK(p.conditional == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(p.unconditional[0] == 0.5);
  CHECK(p.unconditional[1] == 0.25);
  CHECK(p.unconditional[2] == 0.125);
}

TEST_CASE("saturated logits give probabilities ~1 and keep monotonicity") {
  Taxonomy t = Taxonomy::parse("a\t-\nb\ta\nc\tb\n");
  ProbVector p = predict(t, std::vector<double>{100.0, 100.0, 100.0});
  for (double v : p.unconditional) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.unconditional[0] >= p.unconditional[1]);
  CHECK(p.unconditional[1] >= p.unconditional[2]);
}

TEST_CASE("monotone on every edge, matches the ancestor product") {
  rng::Stream s(rng::key(3, "predict"));
  for (int trial = 0; trial < 500; ++trial) {
    Taxonomy t = verify::random_taxonomy(500 + trial, 2 + (int)s.bounded(11), 6);
    auto y = verify::random_logits(s, t.size(), -40, 40);
    ProbVector p = predict(t, y);
    CHECK(p.unconditional[t.root()] == p.conditional[t.root()]);
    for (NodeId m = 0; m < t.size(); ++m) {
      if (m != t.root()) CHECK(p.unconditional[m] <= p.unconditional[*t.parent(m)]);
      CHECK(p.unconditional[m] ==
            doctest::Approx(unconditional_prob(t, y, m)).epsilon(1e-9));
    }
  }
}

TEST_CASE("log-space path engages for extreme logits without breaking order") {
  Taxonomy t = Taxonomy::parse("a\t-\nb\ta\nc\tb\nd\tc\n");
  std::vector<double> y = {-40.0, -40.0, 5.0, -40.0};  // sigmoid(-40) ~ 4e-18 < 1e-12
  ProbVector p = predict(t, y);
  for (NodeId m = 1; m < t.size(); ++m)
    CHECK(p.unconditional[m] <= p.unconditional[*t.parent(m)]);
  CHECK(p.unconditional[3] > 0.0);
  CHECK(p.unconditional[3] < 1e-40);
}

TEST_CASE("node relabeling permutes predictions consistently") {
  // same tree written in two different node orders
  Taxonomy t1 = Taxonomy::parse("r\t-\nx\tr\ny\tr\nz\tx\n");
  Taxonomy t2 = Taxonomy::parse("r\t-\ny\tr\nx\tr\nz\tx\n");
  std::vector<double> logits1 = {0.7, -1.2, 0.4, 2.0};  // r, x, y, z in t1 order
  std::vector<double> logits2(4);
  for (NodeId m = 0; m < 4; ++m) logits2[*t2.find(t1.name(m))] = logits1[m];
  ProbVector p1 = predict(t1, logits1);
  ProbVector p2 = predict(t2, logits2);
  for (NodeId m = 0; m < 4; ++m) {
    NodeId m2 = *t2.find(t1.name(m));
    CHECK(p1.unconditional[m] == p2.unconditional[m2]);
    CHECK(p1.conditional[m] == p2.conditional[m2]);
  }
}
