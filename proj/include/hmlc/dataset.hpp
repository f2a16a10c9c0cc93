#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmlc/taxonomy.hpp"

namespace hmlc {

// Tri-state ground truth. Unknown labels contribute to no loss and no metric.
enum class LabelState : uint8_t { Negative = 0, Positive = 1, Unknown = 2 };

enum class Split : uint8_t { Train = 0, Val = 1, Test = 2 };

inline bool known(LabelState s) { return s != LabelState::Unknown; }
inline double label01(LabelState s) { return s == LabelState::Positive ? 1.0 : 0.0; }

// Returns every node that breaks hierarchy consistency: a Positive node whose
// parent is Negative or Unknown. Empty result means the vector is valid.
std::vector<NodeId> validate_labels(const Taxonomy& t, std::span<const LabelState> states);

struct Dataset {
  int d = 0;  // feature dimension
  int k = 0;  // label count
  bool has_split = true;
  std::vector<std::string> ids;
  std::vector<std::string> label_names;  // taxonomy node order
  std::vector<double> features;          // n x d row-major
  std::vector<LabelState> labels;        // n x k row-major
  std::vector<Split> split;

  size_t size() const { return ids.size(); }
  std::span<const double> row_features(size_t i) const {
    return {features.data() + i * static_cast<size_t>(d), static_cast<size_t>(d)};
  }
  std::span<const LabelState> row_labels(size_t i) const {
    return {labels.data() + i * static_cast<size_t>(k), static_cast<size_t>(k)};
  }
  std::span<LabelState> row_labels(size_t i) {
    return {labels.data() + i * static_cast<size_t>(k), static_cast<size_t>(k)};
  }
  std::vector<size_t> split_indices(Split s) const;
};

// CSV with header `id,f0,...,f{d-1},<label name>...[,split]`; label cells are
// exactly 1, 0 or ?. Feature cells are shortest-round-trip decimal doubles, so
// read/write is byte-exact on canonical files.
Dataset read_dataset(std::string_view text);
std::string write_dataset(const Dataset& ds);

// Throws unless the dataset's label columns match the taxonomy node order and
// every row is hierarchy-consistent.
void check_dataset(const Dataset& ds, const Taxonomy& t);

// Hierarchy-consistent synthetic data: features are i.i.d. standard normal, one
// hidden linear scorer per node, labels sampled top-down (a node can only be
// Positive when its parent is), splits hashed 70/10/20. Deterministic in seed.
Dataset synth_generate(const Taxonomy& t, size_t n, int d, uint64_t seed);

struct DeletionConfig {
  double beta = 0.0;
  double ratio = 0.3;
  uint64_t seed = 0;
  std::vector<NodeId> group_parents;     // children deleted with probability beta
  std::optional<NodeId> mid_parent;      // ratio * beta
  std::optional<NodeId> root_parent;     // ratio^2 * beta
  std::vector<NodeId> excluded;          // unconditionally Unknown on train rows
};

// Controlled incomplete-label deletion on the train split. Coins are a pure
// function of (seed, instance id, parent node), so a label deleted at some beta
// stays deleted at every higher beta with the same seed. A deletion turns the
// parent's whole strict-descendant set Unknown; higher-level deletions subsume
// lower ones. Val/test rows are never touched.
Dataset delete_labels(const Dataset& ds, const Taxonomy& t, const DeletionConfig& cfg);

}  // namespace hmlc
