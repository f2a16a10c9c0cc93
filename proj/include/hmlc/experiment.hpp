#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hmlc/dataset.hpp"
#include "hmlc/metrics.hpp"
#include "hmlc/model.hpp"
#include "hmlc/taxonomy.hpp"

namespace hmlc {

// Trainable pipeline variants. "hlup-finetune" is the two-stage schedule
// (conditional training, then unconditional fine-tuning); the rest are single
// stage with the loss of the same name.
const std::vector<std::string>& variant_names();

struct VariantRun {
  MlpModel model;
  LossSpec score_spec;  // semantics the model's scores carry at inference
  std::vector<EpochStat> history;         // stage-2 history for hlup-finetune
  std::vector<EpochStat> stage1_history;  // empty for single-stage variants
};

VariantRun train_variant(const std::string& name, const Dataset& ds, const Taxonomy& t,
                         TrainConfig base, uint64_t seed);

struct SweepSpec {
  std::vector<double> betas;               // ascending
  std::vector<uint64_t> seeds;
  std::vector<std::string> models = {"br-leaf", "br-all", "hlup-finetune"};
  double ratio = 0.3;
  std::vector<std::string> exclude;        // label names
  std::vector<std::string> group_parents;  // empty: auto-detect
  std::string mid_parent;                  // empty: auto-detect
  std::string root_parent;                 // empty: taxonomy root
  TrainConfig base;                        // loss field overridden per model
  int ci_rounds = 1000;
  int threads = 0;                         // 0: hardware, capped by HMLC_THREADS
  std::string out_dir;
};

// Names -> node ids, with auto-detection of the standard deletion levels when the
// spec leaves them empty. Throws when betas need deletion but no group parents
// can be resolved.
DeletionConfig resolve_deletion(const Taxonomy& t, const SweepSpec& spec, double beta,
                                uint64_t seed);

// Runs every (beta, model, seed) cell with monotone-coupled deletions and writes
// sweep_cells.csv plus sweep_summary.csv (per beta x model: seed-averaged mean
// leaf AUC and a test-set bootstrap CI from the first seed). Cells run on a
// worker pool; outputs are written in deterministic order and are byte-identical
// across reruns. A failed training aborts only its own cell.
void run_sweep(const Taxonomy& t, const Dataset& ds, const SweepSpec& spec, std::ostream& log);

}  // namespace hmlc
