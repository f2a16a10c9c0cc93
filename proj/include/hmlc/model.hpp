#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hmlc/dataset.hpp"
#include "hmlc/losses.hpp"
#include "hmlc/taxonomy.hpp"

namespace hmlc {

// Feature-vector predictor: d -> h (ReLU) -> k logits, or a pure linear d -> k
// map when h == 0.
struct MlpModel {
  int d = 0, h = 0, k = 0;
  uint64_t seed = 0;
  std::vector<double> w1;  // h x d
  std::vector<double> b1;  // h
  std::vector<double> w2;  // k x (h or d)
  std::vector<double> b2;  // k

  int inner() const { return h > 0 ? h : d; }
  // `hidden` must hold h doubles (ignored when h == 0).
  void forward(std::span<const double> x, std::span<double> hidden,
               std::span<double> logits) const;
  std::vector<double> forward(std::span<const double> x) const;
};

MlpModel init_model(int d, int h, int k, uint64_t seed);

enum class LossSpec { BRLeaf, BRAll, HLCP, HLUPExact, HLUPMax, HLUPRescale };

const char* loss_spec_name(LossSpec s);
LossSpec parse_loss_spec(std::string_view name);
// Flat models emit unconditional semantics directly; hierarchical ones need the
// chain rule at inference time.
bool is_flat(LossSpec s);

struct TrainConfig {
  LossSpec loss = LossSpec::BRAll;
  int epochs = 30;
  int batch = 64;
  int hidden = 16;
  double lr = 1e-3;
  enum class Opt { SGD, Adam } opt = Opt::Adam;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  uint64_t seed = 0;
  double rescale_floor = -1.0;  // < 0: derive from taxonomy depth
  int powerset_cap = kDefaultPowersetCap;
};

// Per-sample loss under a config's loss spec.
LossResult sample_loss(LossSpec spec, const Taxonomy& t, std::span<const double> y,
                       std::span<const LabelState> z, const TrainConfig& cfg);

// n x k score matrix with the semantics matching the loss spec (sigmoids for flat
// models, chain-rule unconditional probabilities otherwise).
std::vector<double> score_matrix(const MlpModel& model, LossSpec spec, const Taxonomy& t,
                                 const Dataset& ds, std::span<const size_t> rows);

struct EpochStat {
  double train_loss = 0.0;  // mean per-sample loss over the epoch
  double val_metric = 0.0;  // mean validation leaf AUC (NaN when undefined)
};

struct TrainResult {
  MlpModel model;  // checkpoint with the best validation metric
  std::vector<EpochStat> history;
  int best_epoch = -1;  // -1: metric never defined, final weights returned
};

// Deterministic minibatch training: keyed per-epoch shuffle, in-order batch
// reduction (mean over samples), model selection by validation leaf AUC.
TrainResult train(const MlpModel& init, const Dataset& ds, const Taxonomy& t,
                  const TrainConfig& cfg);

struct TwoStageResult {
  MlpModel model;
  std::vector<EpochStat> stage1, stage2;
};

// Conditional-probability training from fresh init, then unconditional-probability
// fine-tuning from the stage-1 best checkpoint.
TwoStageResult train_two_stage(const Dataset& ds, const Taxonomy& t, const TrainConfig& cfg_hlcp,
                               const TrainConfig& cfg_hlup);

// Versioned text checkpoint; numbers round-trip exactly.
std::string save_checkpoint(const MlpModel& m, LossSpec spec,
                            const std::vector<std::string>& label_names);
struct Checkpoint {
  MlpModel model;
  LossSpec spec;
  std::vector<std::string> label_names;
};
Checkpoint load_checkpoint(std::string_view text);

}  // namespace hmlc
