#include "hmlc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hmlc/inference.hpp"
#include "hmlc/kernels.hpp"
#include "hmlc/metrics.hpp"
#include "hmlc/rng.hpp"
#include "hmlc/util.hpp"

namespace hmlc {

void MlpModel::forward(std::span<const double> x, std::span<double> hidden,
                       std::span<double> logits) const {
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("forward: feature dim " + std::to_string(x.size()) +
                                " != model d " + std::to_string(d));
  const double* in = x.data();
  if (h > 0) {
    for (int u = 0; u < h; ++u)
      hidden[u] = kernels::dot(d, w1.data() + static_cast<size_t>(u) * d, x.data()) + b1[u];
    kernels::relu(h, hidden.data(), hidden.data());
    in = hidden.data();
  }
  const int m = inner();
  for (int o = 0; o < k; ++o)
    logits[o] = kernels::dot(m, w2.data() + static_cast<size_t>(o) * m, in) + b2[o];
}

std::vector<double> MlpModel::forward(std::span<const double> x) const {
  std::vector<double> hidden(h > 0 ? h : 0), logits(k);
  forward(x, hidden, logits);
  return logits;
}

MlpModel init_model(int d, int h, int k, uint64_t seed) {
  if (d < 1 || k < 1 || h < 0) throw std::invalid_argument("init_model: bad dimensions");
  MlpModel m;
  m.d = d;
  m.h = h;
  m.k = k;
  m.seed = seed;
  auto fill = [](std::vector<double>& w, int fan_in, int fan_out, rng::Stream s) {
    double lim = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : w) v = s.uniform_in(-lim, lim);
  };
  if (h > 0) {
    m.w1.resize(static_cast<size_t>(h) * d);
    m.b1.assign(h, 0.0);
    fill(m.w1, d, h, rng::Stream(rng::key(seed, "init-w1")));
  }
  const int inner = h > 0 ? h : d;
  m.w2.resize(static_cast<size_t>(k) * inner);
  m.b2.assign(k, 0.0);
  fill(m.w2, inner, k, rng::Stream(rng::key(seed, "init-w2")));
  return m;
}

const char* loss_spec_name(LossSpec s) {
  switch (s) {
    case LossSpec::BRLeaf: return "br-leaf";
    case LossSpec::BRAll: return "br-all";
    case LossSpec::HLCP: return "hlcp";
    case LossSpec::HLUPExact: return "hlup-exact";
    case LossSpec::HLUPMax: return "hlup-max";
    case LossSpec::HLUPRescale: return "hlup-rescale";
  }
  return "?";
}

LossSpec parse_loss_spec(std::string_view name) {
  if (name == "br-leaf") return LossSpec::BRLeaf;
  if (name == "br-all") return LossSpec::BRAll;
  if (name == "hlcp") return LossSpec::HLCP;
  if (name == "hlup" || name == "hlup-exact") return LossSpec::HLUPExact;
  if (name == "hlup-max") return LossSpec::HLUPMax;
  if (name == "hlup-rescale") return LossSpec::HLUPRescale;
  throw std::invalid_argument("unknown loss spec '" + std::string(name) + "'");
}

bool is_flat(LossSpec s) { return s == LossSpec::BRLeaf || s == LossSpec::BRAll; }

LossResult sample_loss(LossSpec spec, const Taxonomy& t, std::span<const double> y,
                       std::span<const LabelState> z, const TrainConfig& cfg) {
  switch (spec) {
    case LossSpec::BRLeaf: return br_loss(t, y, z, BrScope::LeafOnly);
    case LossSpec::BRAll: return br_loss(t, y, z, BrScope::AllNodes);
    case LossSpec::HLCP: return hlcp_loss(t, y, z);
    case LossSpec::HLUPExact: return hlup_stable(t, y, z, GammaMode::ExactPowerset,
                                                 cfg.powerset_cap);
    case LossSpec::HLUPMax: return hlup_stable(t, y, z, GammaMode::MaxApprox, cfg.powerset_cap);
    case LossSpec::HLUPRescale: {
      double f = cfg.rescale_floor >= 0.0 ? cfg.rescale_floor
                                          : default_rescale_floor(t.max_depth());
      return hlup_rescale(t, y, z, f);
    }
  }
  throw std::logic_error("sample_loss: bad spec");
}

std::vector<double> score_matrix(const MlpModel& model, LossSpec spec, const Taxonomy& t,
                                 const Dataset& ds, std::span<const size_t> rows) {
  std::vector<double> scores(rows.size() * static_cast<size_t>(model.k));
  std::vector<double> hidden(model.h > 0 ? model.h : 0), logits(model.k);
  for (size_t r = 0; r < rows.size(); ++r) {
    model.forward(ds.row_features(rows[r]), hidden, logits);
    double* out = scores.data() + r * static_cast<size_t>(model.k);
    if (is_flat(spec)) {
      for (int m = 0; m < model.k; ++m) out[m] = sigmoid(logits[m]);
    } else {
      ProbVector p = predict(t, logits);
      std::copy(p.unconditional.begin(), p.unconditional.end(), out);
    }
  }
  return scores;
}

namespace {

// Mean leaf AUC on the validation split; NaN when no leaf label has both classes.
double val_leaf_auc(const MlpModel& model, LossSpec spec, const Taxonomy& t, const Dataset& ds,
                    std::span<const size_t> val_rows) {
  std::vector<double> scores = score_matrix(model, spec, t, ds, val_rows);
  double sum = 0;
  int cnt = 0;
  std::vector<double> s;
  std::vector<uint8_t> y;
  for (NodeId m : t.leaves()) {
    s.clear();
    y.clear();
    for (size_t r = 0; r < val_rows.size(); ++r) {
      LabelState st = ds.row_labels(val_rows[r])[m];
      if (!known(st)) continue;
      s.push_back(scores[r * static_cast<size_t>(t.size()) + static_cast<size_t>(m)]);
      y.push_back(st == LabelState::Positive ? 1 : 0);
    }
    bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
    bool has_neg = std::find(y.begin(), y.end(), 0) != y.end();
    if (!has_pos || !has_neg) continue;
    sum += auc(s, y);
    ++cnt;
  }
  return cnt > 0 ? sum / cnt : std::numeric_limits<double>::quiet_NaN();
}

struct ParamGroup {
  double* w;
  size_t n;
};

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, const std::vector<ParamGroup>& groups) : cfg_(cfg) {
    if (cfg.opt == TrainConfig::Opt::Adam)
      for (const auto& g : groups) {
        m_.emplace_back(g.n, 0.0);
        v_.emplace_back(g.n, 0.0);
      }
  }

  void step(const std::vector<ParamGroup>& groups, const std::vector<std::vector<double>>& grads) {
    if (cfg_.opt == TrainConfig::Opt::SGD) {
      for (size_t gi = 0; gi < groups.size(); ++gi)
        kernels::axpy(groups[gi].n, -cfg_.lr, grads[gi].data(), groups[gi].w);
      return;
    }
    ++t_;
    const double lr_t = cfg_.lr * std::sqrt(1.0 - std::pow(cfg_.beta2, t_)) /
                        (1.0 - std::pow(cfg_.beta1, t_));
    for (size_t gi = 0; gi < groups.size(); ++gi)
      kernels::adam_update(groups[gi].n, groups[gi].w, m_[gi].data(), v_[gi].data(),
                           grads[gi].data(), lr_t, cfg_.beta1, cfg_.beta2, cfg_.eps);
  }

 private:
  TrainConfig cfg_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace

TrainResult train(const MlpModel& init, const Dataset& ds, const Taxonomy& t,
                  const TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.batch < 1 || cfg.lr < 0)
    throw std::invalid_argument("train: bad config");
  if (init.d != ds.d || init.k != t.size() || ds.k != t.size())
    throw std::invalid_argument("train: model/dataset/taxonomy dimension mismatch");

  TrainResult res;
  res.model = init;
  if (cfg.epochs == 0) return res;

  std::vector<size_t> train_rows = ds.split_indices(Split::Train);
  std::vector<size_t> val_rows = ds.split_indices(Split::Val);
  if (train_rows.empty()) throw std::invalid_argument("train: empty train split");
  if (val_rows.empty()) throw std::invalid_argument("train: empty val split");

  MlpModel model = init;
  const int k = model.k, h = model.h, d = model.d, inner = model.inner();

  std::vector<ParamGroup> groups;
  if (h > 0) {
    groups.push_back({model.w1.data(), model.w1.size()});
    groups.push_back({model.b1.data(), model.b1.size()});
  }
  groups.push_back({model.w2.data(), model.w2.size()});
  groups.push_back({model.b2.data(), model.b2.size()});
  Optimizer opt(cfg, groups);

  std::vector<std::vector<double>> grads(groups.size());
  for (size_t gi = 0; gi < groups.size(); ++gi) grads[gi].assign(groups[gi].n, 0.0);

  std::vector<double> pre(h > 0 ? h : 0), hidden(h > 0 ? h : 0), logits(k);
  std::vector<double> dlogits(k), dhidden(h > 0 ? h : 0), dpre(h > 0 ? h : 0);

  double best_metric = -std::numeric_limits<double>::infinity();
  MlpModel best = model;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order = train_rows;
    rng::Stream shuffle(rng::key(cfg.seed, "shuffle", static_cast<uint64_t>(epoch)));
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle.bounded(i)]);

    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch) {
      const size_t stop = std::min(order.size(), start + cfg.batch);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);

      for (size_t bi = start; bi < stop; ++bi) {
        const size_t row = order[bi];
        std::span<const double> x = ds.row_features(row);
        const double* in = x.data();
        if (h > 0) {
          for (int u = 0; u < h; ++u)
            pre[u] = kernels::dot(d, model.w1.data() + static_cast<size_t>(u) * d, x.data()) +
                     model.b1[u];
          kernels::relu(h, pre.data(), hidden.data());
          in = hidden.data();
        }
        for (int o = 0; o < k; ++o)
          logits[o] =
              kernels::dot(inner, model.w2.data() + static_cast<size_t>(o) * inner, in) +
              model.b2[o];

        LossResult ls = sample_loss(cfg.loss, t, logits, ds.row_labels(row), cfg);
        if (!std::isfinite(ls.value))
          throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(start / cfg.batch) + " (row id " +
                                   ds.ids[row] + ")");
        loss_sum += ls.value;
        for (int o = 0; o < k; ++o) dlogits[o] = ls.grad[o] * inv_batch;

        // Backprop: w2/b2, then through ReLU to w1/b1.
        std::vector<double>& g_w2 = grads[groups.size() - 2];
        std::vector<double>& g_b2 = grads[groups.size() - 1];
        for (int o = 0; o < k; ++o) {
          if (dlogits[o] != 0.0)
            kernels::axpy(inner, dlogits[o], in, g_w2.data() + static_cast<size_t>(o) * inner);
          g_b2[o] += dlogits[o];
        }
        if (h > 0) {
          std::fill(dhidden.begin(), dhidden.end(), 0.0);
          for (int o = 0; o < k; ++o)
            if (dlogits[o] != 0.0)
              kernels::axpy(h, dlogits[o], model.w2.data() + static_cast<size_t>(o) * h,
                            dhidden.data());
          kernels::relu_backward(h, pre.data(), dhidden.data(), dpre.data());
          for (int u = 0; u < h; ++u) {
            if (dpre[u] != 0.0)
              kernels::axpy(d, dpre[u], x.data(), grads[0].data() + static_cast<size_t>(u) * d);
            grads[1][u] += dpre[u];
          }
        }
      }
      opt.step(groups, grads);
    }

    EpochStat stat;
    stat.train_loss = loss_sum / static_cast<double>(order.size());
    stat.val_metric = val_leaf_auc(model, cfg.loss, t, ds, val_rows);
    res.history.push_back(stat);
    if (stat.val_metric > best_metric) {
      best_metric = stat.val_metric;
      best = model;
      res.best_epoch = epoch;
    }
  }

  res.model = (res.best_epoch >= 0) ? best : model;
  return res;
}

TwoStageResult train_two_stage(const Dataset& ds, const Taxonomy& t, const TrainConfig& cfg_hlcp,
                               const TrainConfig& cfg_hlup) {
  MlpModel m0 = init_model(ds.d, cfg_hlcp.hidden, t.size(), cfg_hlcp.seed);
  TrainResult stage1 = train(m0, ds, t, cfg_hlcp);
  TrainResult stage2 = train(stage1.model, ds, t, cfg_hlup);
  return {std::move(stage2.model), std::move(stage1.history), std::move(stage2.history)};
}

std::string save_checkpoint(const MlpModel& m, LossSpec spec,
                            const std::vector<std::string>& label_names) {
  std::string out = "hmlc-checkpoint v1\n";
  out += std::string("loss ") + loss_spec_name(spec) + "\n";
  out += "d " + std::to_string(m.d) + "\n";
  out += "h " + std::to_string(m.h) + "\n";
  out += "k " + std::to_string(m.k) + "\n";
  out += "seed " + std::to_string(m.seed) + "\n";
  out += "labels";
  for (const auto& name : label_names) out += "\t" + name;
  out += "\n";
  auto dump = [&out](const char* key, const std::vector<double>& v) {
    out += key;
    for (double x : v) {
      out += ' ';
      out += util::fmt_double(x);
    }
    out += '\n';
  };
  dump("w1", m.w1);
  dump("b1", m.b1);
  dump("w2", m.w2);
  dump("b2", m.b2);
  return out;
}

Checkpoint load_checkpoint(std::string_view text) {
  auto lines = util::split_lines(text);
  if (lines.size() < 11 || lines[0] != "hmlc-checkpoint v1")
    throw std::runtime_error("checkpoint: bad header");
  Checkpoint ck;
  auto field = [&](size_t idx, std::string_view key) {
    auto parts = util::split(lines[idx], ' ');
    if (parts.empty() || parts[0] != key)
      throw std::runtime_error("checkpoint: expected '" + std::string(key) + "' on line " +
                               std::to_string(idx + 1));
    return lines[idx].substr(key.size() + 1);
  };
  ck.spec = parse_loss_spec(field(1, "loss"));
  ck.model.d = static_cast<int>(util::parse_ll(field(2, "d")));
  ck.model.h = static_cast<int>(util::parse_ll(field(3, "h")));
  ck.model.k = static_cast<int>(util::parse_ll(field(4, "k")));
  ck.model.seed = util::parse_u64(field(5, "seed"));
  {
    auto parts = util::split(lines[6], '\t');
    if (parts.empty() || parts[0] != "labels") throw std::runtime_error("checkpoint: bad labels");
    for (size_t i = 1; i < parts.size(); ++i) ck.label_names.emplace_back(parts[i]);
    if (static_cast<int>(ck.label_names.size()) != ck.model.k)
      throw std::runtime_error("checkpoint: label count mismatch");
  }
  auto load = [&](size_t idx, std::string_view key, std::vector<double>& v, size_t expect) {
    auto parts = util::split(lines[idx], ' ');
    if (parts.empty() || parts[0] != key)
      throw std::runtime_error("checkpoint: expected '" + std::string(key) + "'");
    for (size_t i = 1; i < parts.size(); ++i)
      if (!parts[i].empty()) v.push_back(util::parse_double(parts[i]));
    if (v.size() != expect)
      throw std::runtime_error("checkpoint: '" + std::string(key) + "' has " +
                               std::to_string(v.size()) + " values, expected " +
                               std::to_string(expect));
  };
  const int inner = ck.model.h > 0 ? ck.model.h : ck.model.d;
  load(7, "w1", ck.model.w1, ck.model.h > 0 ? static_cast<size_t>(ck.model.h) * ck.model.d : 0);
  load(8, "b1", ck.model.b1, ck.model.h > 0 ? static_cast<size_t>(ck.model.h) : 0);
  load(9, "w2", ck.model.w2, static_cast<size_t>(ck.model.k) * inner);
  load(10, "b2", ck.model.b2, static_cast<size_t>(ck.model.k));
  return ck;
}

}  // namespace hmlc
