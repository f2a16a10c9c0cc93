#include "hmlc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hmlc/rng.hpp"
#include "hmlc/util.hpp"

namespace hmlc {

namespace {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s, size_t row) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw std::runtime_error("dataset: row " + std::to_string(row) + ": bad split '" +
                           std::string(s) + "'");
}

double sigmoid(double y) {
  if (y >= 0) return 1.0 / (1.0 + std::exp(-y));
  double e = std::exp(y);
  return e / (1.0 + e);
}

}  // namespace

std::vector<NodeId> validate_labels(const Taxonomy& t, std::span<const LabelState> states) {
  if (static_cast<int>(states.size()) != t.size())
    throw std::runtime_error("label vector length " + std::to_string(states.size()) +
                             " != taxonomy size " + std::to_string(t.size()));
  std::vector<NodeId> bad;
  for (NodeId m = 0; m < t.size(); ++m) {
    if (states[m] != LabelState::Positive || m == t.root()) continue;
    if (states[*t.parent(m)] != LabelState::Positive) bad.push_back(m);
  }
  return bad;
}

std::vector<size_t> Dataset::split_indices(Split s) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < size(); ++i)
    if (split[i] == s) out.push_back(i);
  return out;
}

Dataset read_dataset(std::string_view text) {
  auto lines = util::split_lines(text);
  if (lines.empty()) throw std::runtime_error("dataset: empty document");

  std::string_view header_line = lines[0];
  if (!header_line.empty() && header_line.back() == '\r') header_line.remove_suffix(1);
  auto header = util::split(header_line, ',');
  if (header.empty() || header[0] != "id")
    throw std::runtime_error("dataset: malformed header: first column must be 'id'");

  Dataset ds;
  size_t col = 1;
  while (col < header.size()) {
    std::string expect = "f" + std::to_string(col - 1);
    if (header[col] != expect) break;
    ++col;
  }
  ds.d = static_cast<int>(col - 1);
  ds.has_split = !header.empty() && header.back() == "split";
  size_t label_end = header.size() - (ds.has_split ? 1 : 0);
  for (size_t c = col; c < label_end; ++c) {
    std::string_view name = header[c];
    if (name.empty()) throw std::runtime_error("dataset: malformed header: empty label name");
    ds.label_names.emplace_back(name);
  }
  ds.k = static_cast<int>(ds.label_names.size());
  if (ds.k == 0) throw std::runtime_error("dataset: malformed header: no label columns");

  const size_t arity = header.size();
  for (size_t li = 1; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto cells = util::split(line, ',');
    if (cells.size() != arity)
      throw std::runtime_error("dataset: row " + std::to_string(li) + ": expected " +
                               std::to_string(arity) + " cells, got " +
                               std::to_string(cells.size()));
    ds.ids.emplace_back(cells[0]);
    for (int j = 0; j < ds.d; ++j) {
      try {
        ds.features.push_back(util::parse_double(cells[1 + j]));
      } catch (const std::exception& e) {
        throw std::runtime_error("dataset: row " + std::to_string(li) + ", column " +
                                 std::to_string(1 + j) + ": " + e.what());
      }
    }
    for (int j = 0; j < ds.k; ++j) {
      std::string_view cell = cells[1 + ds.d + j];
      LabelState s;
      if (cell == "1") s = LabelState::Positive;
      else if (cell == "0") s = LabelState::Negative;
      else if (cell == "?") s = LabelState::Unknown;
      else
        throw std::runtime_error("dataset: row " + std::to_string(li) + ", column " +
                                 std::to_string(1 + ds.d + j) + ": bad label cell '" +
                                 std::string(cell) + "'");
      ds.labels.push_back(s);
    }
    ds.split.push_back(ds.has_split ? parse_split(cells.back(), li) : Split::Train);
  }
  return ds;
}

std::string write_dataset(const Dataset& ds) {
  std::string out = "id";
  for (int j = 0; j < ds.d; ++j) out += ",f" + std::to_string(j);
  for (const auto& name : ds.label_names) out += "," + name;
  if (ds.has_split) out += ",split";
  out += '\n';
  for (size_t i = 0; i < ds.size(); ++i) {
    out += ds.ids[i];
    for (double v : ds.row_features(i)) {
      out += ',';
      out += util::fmt_double(v);
    }
    for (LabelState s : ds.row_labels(i))
      out += (s == LabelState::Positive) ? ",1" : (s == LabelState::Negative) ? ",0" : ",?";
    if (ds.has_split) {
      out += ',';
      out += split_name(ds.split[i]);
    }
    out += '\n';
  }
  return out;
}

void check_dataset(const Dataset& ds, const Taxonomy& t) {
  if (ds.k != t.size())
    throw std::runtime_error("dataset has " + std::to_string(ds.k) + " labels, taxonomy has " +
                             std::to_string(t.size()));
  for (int m = 0; m < t.size(); ++m)
    if (ds.label_names[m] != t.name(m))
      throw std::runtime_error("dataset label column " + std::to_string(m) + " is '" +
                               ds.label_names[m] + "', taxonomy node is '" + t.name(m) + "'");
  for (size_t i = 0; i < ds.size(); ++i) {
    auto bad = validate_labels(t, ds.row_labels(i));
    if (!bad.empty())
      throw std::runtime_error("dataset: row " + std::to_string(i + 1) + " (id " + ds.ids[i] +
                               "): inconsistent label '" + t.name(bad.front()) + "'");
  }
}

Dataset synth_generate(const Taxonomy& t, size_t n, int d, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("synth_generate: n must be >= 1");
  if (d < 1) throw std::invalid_argument("synth_generate: d must be >= 1");

  const int k = t.size();
  Dataset ds;
  ds.d = d;
  ds.k = k;
  for (NodeId m = 0; m < k; ++m) ds.label_names.push_back(t.name(m));

  // One hidden scorer per node; entries N(0, 1/d) keep the latent logit ~N(0,1).
  std::vector<double> w(static_cast<size_t>(k) * d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (NodeId m = 0; m < k; ++m) {
    rng::Stream ws(rng::key(seed, "synth-weights", static_cast<uint64_t>(m)));
    for (int j = 0; j < d; ++j) w[static_cast<size_t>(m) * d + j] = ws.normal() * scale;
  }

  ds.ids.reserve(n);
  ds.features.resize(n * static_cast<size_t>(d));
  ds.labels.assign(n * static_cast<size_t>(k), LabelState::Negative);
  ds.split.reserve(n);

  for (size_t i = 0; i < n; ++i) {
    ds.ids.push_back(std::to_string(i));
    rng::Stream fs(rng::key(seed, "synth-features", i));
    double* x = ds.features.data() + i * d;
    for (int j = 0; j < d; ++j) x[j] = fs.normal();

    rng::Stream ls(rng::key(seed, "synth-labels", i));
    LabelState* row = ds.labels.data() + i * k;
    for (NodeId m : t.topo_order()) {
      double u = ls.uniform();  // always drawn, keeps coins per-node stable
      bool parent_pos = (m == t.root()) || row[*t.parent(m)] == LabelState::Positive;
      if (!parent_pos) continue;
      const double* wm = w.data() + static_cast<size_t>(m) * d;
      double logit = 0;
      for (int j = 0; j < d; ++j) logit += wm[j] * x[j];
      if (u < sigmoid(logit)) row[m] = LabelState::Positive;
    }

    double su = rng::u01(rng::key(seed, "synth-split", rng::hash_str(ds.ids.back())));
    ds.split.push_back(su < 0.7 ? Split::Train : (su < 0.8 ? Split::Val : Split::Test));
  }
  return ds;
}

Dataset delete_labels(const Dataset& ds, const Taxonomy& t, const DeletionConfig& cfg) {
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0))
    throw std::invalid_argument("delete_labels: beta must be in [0,1]");
  if (cfg.ratio < 0.0 || cfg.ratio * cfg.beta > 1.0)
    throw std::invalid_argument("delete_labels: need ratio >= 0 and ratio*beta <= 1");
  if (ds.k != t.size()) throw std::invalid_argument("delete_labels: dataset/taxonomy mismatch");

  // The three deletion levels must be orderable coarse-to-fine: the root slot above
  // everything, and the mid slot not inside any group parent's subtree.
  for (NodeId g : cfg.group_parents) {
    if (t.is_leaf(g))
      throw std::invalid_argument("delete_labels: group parent '" + t.name(g) + "' is a leaf");
    if (cfg.mid_parent && t.is_ancestor_of(g, *cfg.mid_parent) && g != *cfg.mid_parent)
      throw std::invalid_argument("delete_labels: mid parent '" + t.name(*cfg.mid_parent) +
                                  "' lies under group parent '" + t.name(g) + "'");
  }
  if (cfg.root_parent) {
    if (cfg.mid_parent && !t.is_ancestor_of(*cfg.root_parent, *cfg.mid_parent))
      throw std::invalid_argument("delete_labels: root level must be an ancestor of the mid level");
    for (NodeId g : cfg.group_parents)
      if (!t.is_ancestor_of(*cfg.root_parent, g))
        throw std::invalid_argument("delete_labels: root level must be an ancestor of '" +
                                    t.name(g) + "'");
  }
  if (cfg.mid_parent &&
      std::find(cfg.group_parents.begin(), cfg.group_parents.end(), *cfg.mid_parent) !=
          cfg.group_parents.end())
    throw std::invalid_argument("delete_labels: mid parent duplicated in group parents");

  Dataset out = ds;
  auto delete_children = [&](LabelState* row, NodeId p) {
    for (NodeId q : t.descendants(p)) row[q] = LabelState::Unknown;
  };
  auto coin = [&](const std::string& id, NodeId p) {
    return rng::u01(rng::key(cfg.seed, "delete", rng::hash_str(id), static_cast<uint64_t>(p)));
  };

  for (size_t i = 0; i < out.size(); ++i) {
    if (out.split[i] != Split::Train) continue;
    LabelState* row = out.labels.data() + i * static_cast<size_t>(out.k);
    for (NodeId p : cfg.group_parents)
      if (row[p] == LabelState::Positive && coin(out.ids[i], p) < cfg.beta)
        delete_children(row, p);
    if (cfg.mid_parent && row[*cfg.mid_parent] == LabelState::Positive &&
        coin(out.ids[i], *cfg.mid_parent) < cfg.ratio * cfg.beta)
      delete_children(row, *cfg.mid_parent);
    if (cfg.root_parent && row[*cfg.root_parent] == LabelState::Positive &&
        coin(out.ids[i], *cfg.root_parent) < cfg.ratio * cfg.ratio * cfg.beta)
      delete_children(row, *cfg.root_parent);
    for (NodeId e : cfg.excluded) {
      row[e] = LabelState::Unknown;
      delete_children(row, e);
    }
  }
  return out;
}

}  // namespace hmlc
