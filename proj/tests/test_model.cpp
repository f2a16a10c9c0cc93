#include <doctest.h>

#include <limits>
#include <stdexcept>

#include <cmath>
#include <vector>

#include "hmlc/dataset.hpp"
#include "hmlc/losses.hpp"
#include "hmlc/metrics.hpp"
#include "hmlc/model.hpp"
#include "hmlc/rng.hpp"
#include "hmlc/taxonomy.hpp"

using namespace hmlc;

namespace {

constexpr LabelState P = LabelState::Positive;
constexpr LabelState N = LabelState::Negative;
constexpr LabelState U = LabelState::Unknown;

// Linearly separable single-node data: label = sign(x0 + 0.5*x1).
Dataset separable(size_t n, uint64_t seed) {
  Dataset ds;
  ds.d = 2;
  ds.k = 1;
  ds.label_names = {"root"};
  rng::Stream s(rng::key(seed, "separable"));
  for (size_t i = 0; i < n; ++i) {
    ds.ids.push_back(std::to_string(i));
    double x0 = s.normal(), x1 = s.normal();
    ds.features.push_back(x0);
    ds.features.push_back(x1);
    ds.labels.push_back(x0 + 0.5 * x1 > 0 ? P : N);
    double u = s.uniform();
    ds.split.push_back(u < 0.7 ? Split::Train : (u < 0.85 ? Split::Val : Split::Test));
  }
  return ds;
}

Dataset manual_dataset(const Taxonomy& t, const std::vector<std::vector<LabelState>>& rows,
                       uint64_t seed, int d = 3) {
  Dataset ds;
  ds.d = d;
  ds.k = t.size();
  for (NodeId m = 0; m < t.size(); ++m) ds.label_names.push_back(t.name(m));
  rng::Stream s(rng::key(seed, "manual"));
  for (size_t i = 0; i < rows.size(); ++i) {
    ds.ids.push_back(std::to_string(i));
    for (int j = 0; j < d; ++j) ds.features.push_back(s.normal());
    for (LabelState st : rows[i]) ds.labels.push_back(st);
    ds.split.push_back(i % 5 == 4 ? Split::Val : Split::Train);
  }
  return ds;
}

}  // namespace

TEST_CASE("init_model determinism and shapes") {
  MlpModel a = init_model(6, 4, 3, 42);
  MlpModel b = init_model(6, 4, 3, 42);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  CHECK(a.w1.size() == 24);
  CHECK(a.w2.size() == 12);
  CHECK(init_model(6, 4, 3, 43).w1 != a.w1);

  MlpModel lin = init_model(5, 0, 2, 1);
  CHECK(lin.w1.empty());
  CHECK(lin.w2.size() == 10);
  CHECK(lin.forward(std::vector<double>{1, 2, 3, 4, 5}).size() == 2);
  CHECK_THROWS_AS(init_model(0, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("forward math") {
  MlpModel zero = init_model(3, 2, 2, 7);
  std::fill(zero.w1.begin(), zero.w1.end(), 0.0);
  std::fill(zero.w2.begin(), zero.w2.end(), 0.0);
  auto out = zero.forward(std::vector<double>{1, -1, 2});
  CHECK(out == std::vector<double>{0.0, 0.0});

  // hand-computed linear map
  MlpModel lin = init_model(2, 0, 2, 7);
  lin.w2 = {1.0, 2.0, -1.0, 0.5};
  lin.b2 = {0.25, -0.5};
  auto y = lin.forward(std::vector<double>{3.0, -2.0});
  CHECK(y[0] == doctest::Approx(3.0 - 4.0 + 0.25));
  CHECK(y[1] == doctest::Approx(-3.0 - 1.0 - 0.5));

  // hand-computed ReLU layer
  MlpModel mlp = init_model(2, 2, 1, 7);
  mlp.w1 = {1.0, 0.0, -1.0, 1.0};
  mlp.b1 = {0.0, -0.5};
  mlp.w2 = {2.0, 3.0};
  mlp.b2 = {0.1};
  // x=(1,2): pre = (1, 0.5) -> hidden (1, 0.5) -> 2*1 + 3*0.5 + 0.1
  CHECK(mlp.forward(std::vector<double>{1, 2})[0] == doctest::Approx(3.6));
  // x=(1,-1): pre = (1, -2.5) -> hidden (1, 0) -> 2.1
  CHECK(mlp.forward(std::vector<double>{1, -1})[0] == doctest::Approx(2.1));

  CHECK_THROWS_AS(mlp.forward(std::vector<double>{1.0}), std::invalid_argument);

  // batch scoring equals per-row forward
  Taxonomy t1 = Taxonomy::parse("root\t-\n");
  Dataset ds = separable(20, 3);
  MlpModel m = init_model(2, 3, 1, 5);
  std::vector<size_t> rows = {0, 5, 7};
  auto scores = score_matrix(m, LossSpec::BRAll, t1, ds, rows);
  for (size_t r = 0; r < rows.size(); ++r)
    CHECK(scores[r] == sigmoid(m.forward(ds.row_features(rows[r]))[0]));
}

TEST_CASE("score semantics follow the loss tag") {
  // flat models emit raw sigmoids; hierarchical models emit chain-rule products
  Taxonomy t = Taxonomy::parse("root\t-\nA\troot\nB\tA\n");
  Dataset ds = synth_generate(t, 10, 3, 55);
  MlpModel m = init_model(3, 0, 3, 19);
  std::vector<size_t> rows = {2};
  auto logits = m.forward(ds.row_features(2));
  auto flat = score_matrix(m, LossSpec::BRAll, t, ds, rows);
  auto chained = score_matrix(m, LossSpec::HLUPExact, t, ds, rows);
  for (int j = 0; j < 3; ++j) CHECK(flat[j] == sigmoid(logits[j]));
  CHECK(chained[0] == sigmoid(logits[0]));
  CHECK(chained[1] == doctest::Approx(sigmoid(logits[0]) * sigmoid(logits[1])).epsilon(1e-15));
  CHECK(chained[2] ==
        doctest::Approx(chained[1] * sigmoid(logits[2])).epsilon(1e-15));
  CHECK(chained[1] <= chained[0]);
}

TEST_CASE("lr=0 leaves parameters unchanged") {
  Taxonomy t = Taxonomy::parse("root\t-\n");
  Dataset ds = separable(60, 11);
  MlpModel m0 = init_model(2, 2, 1, 9);
  TrainConfig cfg;
  cfg.loss = LossSpec::BRAll;
  cfg.epochs = 3;
  cfg.lr = 0.0;
  cfg.seed = 1;
  for (auto opt : {TrainConfig::Opt::Adam, TrainConfig::Opt::SGD}) {
    cfg.opt = opt;
    TrainResult r = train(m0, ds, t, cfg);
    CHECK(r.model.w1 == m0.w1);
    CHECK(r.model.w2 == m0.w2);
    CHECK(r.model.b2 == m0.b2);
    CHECK(r.history.size() == 3);
  }
}

TEST_CASE("separable single-node training converges") {
  Taxonomy t = Taxonomy::parse("root\t-\n");
  Dataset ds = separable(400, 21);
  MlpModel m0 = init_model(2, 0, 1, 4);
  TrainConfig cfg;
  cfg.loss = LossSpec::BRAll;
  cfg.epochs = 50;
  cfg.batch = 32;
  cfg.lr = 0.05;
  cfg.seed = 2;
  TrainResult r = train(m0, ds, t, cfg);
  REQUIRE(r.history.size() == 50);

  int decreases = 0;
  for (size_t e = 1; e < r.history.size(); ++e)
    if (r.history[e].train_loss < r.history[e - 1].train_loss) ++decreases;
  CHECK(decreases >= 0.9 * (r.history.size() - 1));

  auto test_rows = ds.split_indices(Split::Test);
  auto scores = score_matrix(r.model, LossSpec::BRAll, t, ds, test_rows);
  std::vector<uint8_t> z;
  for (size_t row : test_rows) z.push_back(ds.row_labels(row)[0] == P ? 1 : 0);
  CHECK(auc(scores, z) > 0.95);

  // determinism: identical config gives identical history and parameters
  TrainResult r2 = train(m0, ds, t, cfg);
  CHECK(r2.model.w2 == r.model.w2);
  CHECK(r2.history.size() == r.history.size());
  for (size_t e = 0; e < r.history.size(); ++e) {
    CHECK(r2.history[e].train_loss == r.history[e].train_loss);
    CHECK(r2.history[e].val_metric == r.history[e].val_metric);
  }
}

TEST_CASE("two-stage training: zero-epoch stage 2 is the identity") {
  Taxonomy t = Taxonomy::parse("root\t-\nA\troot\nB\tA\n");
  Dataset ds = synth_generate(t, 150, 4, 31);
  TrainConfig s1;
  s1.loss = LossSpec::HLCP;
  s1.epochs = 4;
  s1.hidden = 3;
  s1.seed = 6;
  TrainConfig s2 = s1;
  s2.loss = LossSpec::HLUPExact;
  s2.epochs = 0;
  TwoStageResult two = train_two_stage(ds, t, s1, s2);
  MlpModel m0 = init_model(ds.d, s1.hidden, t.size(), s1.seed);
  TrainResult alone = train(m0, ds, t, s1);
  CHECK(two.model.w1 == alone.model.w1);
  CHECK(two.model.w2 == alone.model.w2);
  CHECK(two.stage2.empty());
  CHECK(two.stage1.size() == 4);

  // a real stage 2 runs and leaves history lengths = configured epochs
  s2.epochs = 3;
  TwoStageResult full = train_two_stage(ds, t, s1, s2);
  CHECK(full.stage1.size() == 4);
  CHECK(full.stage2.size() == 3);
}

TEST_CASE("BRLeaf training never touches non-leaf output rows") {
  Taxonomy t = Taxonomy::parse("root\t-\nA\troot\nleaf1\tA\nleaf2\tA\n");
  Dataset ds = synth_generate(t, 200, 4, 17);
  MlpModel m0 = init_model(ds.d, 3, t.size(), 8);
  TrainConfig cfg;
  cfg.loss = LossSpec::BRLeaf;
  cfg.epochs = 2;
  cfg.seed = 3;
  TrainResult r = train(m0, ds, t, cfg);
  const int inner = m0.inner();
  for (NodeId m : t.non_leaves()) {
    for (int j = 0; j < inner; ++j)
      CHECK(r.model.w2[static_cast<size_t>(m) * inner + j] ==
            m0.w2[static_cast<size_t>(m) * inner + j]);
    CHECK(r.model.b2[m] == m0.b2[m]);
  }
  // leaf rows did move
  bool moved = false;
  for (NodeId m : t.leaves())
    for (int j = 0; j < inner; ++j)
      moved |= r.model.w2[static_cast<size_t>(m) * inner + j] !=
               m0.w2[static_cast<size_t>(m) * inner + j];
  CHECK(moved);
}

TEST_CASE("an everywhere-Unknown node learns nothing under BR and HLCP") {
  Taxonomy t = Taxonomy::parse("root\t-\nA\troot\nB\tA\n");
  std::vector<std::vector<LabelState>> rows;
  rng::Stream s(rng::key(23, "unknown-node"));
  for (int i = 0; i < 120; ++i)
    rows.push_back({s.uniform() < 0.5 ? P : N, U, U});
  Dataset ds = manual_dataset(t, rows, 29);

  MlpModel m0 = init_model(ds.d, 0, t.size(), 12);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.hidden = 0;
  cfg.seed = 31;
  const int inner = m0.inner();
  for (LossSpec spec : {LossSpec::BRAll, LossSpec::HLCP}) {
    cfg.loss = spec;
    TrainResult r = train(m0, ds, t, cfg);
    for (NodeId m : {1, 2}) {
      for (int j = 0; j < inner; ++j)
        CHECK(r.model.w2[static_cast<size_t>(m) * inner + j] ==
              m0.w2[static_cast<size_t>(m) * inner + j]);
      CHECK(r.model.b2[m] == m0.b2[m]);
    }
  }

  // under the unconditional loss the Unknown nodes still receive chained gradient
  cfg.loss = LossSpec::HLUPExact;
  rows.clear();
  for (int i = 0; i < 120; ++i)
    rows.push_back({s.uniform() < 0.5 ? P : N, U, U});
  Dataset ds2 = manual_dataset(t, rows, 37);
  // B known Negative under Unknown A is consistent and exercises the chain
  for (size_t i = 0; i < ds2.size(); ++i) ds2.row_labels(i)[2] = N;
  TrainResult r = train(m0, ds2, t, cfg);
  bool moved = false;
  for (int j = 0; j < inner; ++j)
    moved |= r.model.w2[static_cast<size_t>(1) * inner + j] !=
             m0.w2[static_cast<size_t>(1) * inner + j];
  CHECK(moved);
}

TEST_CASE("checkpoint round trip is exact") {
  MlpModel m = init_model(5, 3, 4, 77);
  m.w2[2] = 0.1 + 0.2;  // a value with a non-trivial shortest representation
  std::vector<std::string> names = {"a", "b c", "d", "e"};
  std::string text = save_checkpoint(m, LossSpec::HLUPExact, names);
  Checkpoint ck = load_checkpoint(text);
  CHECK(ck.spec == LossSpec::HLUPExact);
  CHECK(ck.label_names == names);
  CHECK(ck.model.d == 5);
  CHECK(ck.model.h == 3);
  CHECK(ck.model.w1 == m.w1);
  CHECK(ck.model.w2 == m.w2);
  CHECK(ck.model.b1 == m.b1);
  CHECK(ck.model.b2 == m.b2);
  CHECK(save_checkpoint(ck.model, ck.spec, ck.label_names) == text);

  // linear model round trip
  MlpModel lin = init_model(3, 0, 2, 5);
  Checkpoint ck2 = load_checkpoint(save_checkpoint(lin, LossSpec::BRLeaf, {"x", "y"}));
  CHECK(ck2.model.w1.empty());
  CHECK(ck2.model.w2 == lin.w2);
  CHECK(is_flat(ck2.spec));

  CHECK_THROWS_AS(load_checkpoint("garbage"), std::runtime_error);
}

TEST_CASE("non-finite loss reports the offending batch") {
  Taxonomy t = Taxonomy::parse("root\t-\n");
  Dataset ds = separable(50, 41);
  MlpModel m0 = init_model(2, 0, 1, 2);
  m0.w2[0] = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.loss = LossSpec::BRAll;
  cfg.epochs = 1;
  cfg.seed = 1;
  CHECK_THROWS_WITH_AS(train(m0, ds, t, cfg), doctest::Contains("non-finite"),
                       std::runtime_error);
}
