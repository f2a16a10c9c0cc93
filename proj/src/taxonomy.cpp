#include "hmlc/taxonomy.hpp"

#include <algorithm>
#include <stdexcept>

#include "hmlc/util.hpp"

namespace hmlc {

namespace {

[[noreturn]] void fail(size_t line_no, const std::string& msg) {
  throw std::runtime_error("taxonomy: line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

Taxonomy Taxonomy::parse(std::string_view text) {
  Taxonomy t;
  std::vector<std::string> parent_names;
  std::vector<size_t> line_nos;

  size_t line_no = 0;
  for (std::string_view raw : util::split_lines(text)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;

    auto fields = util::split(raw.substr(0, raw.find_last_not_of(" \t") + 1), '\t');
    if (fields.size() != 2) fail(line_no, "expected child<TAB>parent");
    std::string child(util::trim(fields[0]));
    std::string parent(util::trim(fields[1]));
    if (child.empty()) fail(line_no, "empty node name");
    if (parent.empty()) fail(line_no, "empty parent name");
    if (t.by_name_.count(child)) fail(line_no, "duplicate name '" + child + "'");

    t.by_name_.emplace(child, static_cast<NodeId>(t.names_.size()));
    t.names_.push_back(std::move(child));
    parent_names.push_back(std::move(parent));
    line_nos.push_back(line_no);
  }
  if (t.names_.empty()) throw std::runtime_error("taxonomy: empty document");

  const int k = static_cast<int>(t.names_.size());
  t.parent_.assign(k, -1);
  int root_count = 0;
  for (int m = 0; m < k; ++m) {
    if (parent_names[m] == "-") {
      ++root_count;
      if (root_count > 1) fail(line_nos[m], "multiple roots ('" + t.names_[m] + "')");
      t.root_ = m;
      t.parent_[m] = m;
    } else {
      auto it = t.by_name_.find(parent_names[m]);
      if (it == t.by_name_.end())
        fail(line_nos[m], "unknown parent '" + parent_names[m] + "' for '" + t.names_[m] + "'");
      if (it->second == m) fail(line_nos[m], "node '" + t.names_[m] + "' is its own parent");
      t.parent_[m] = it->second;
    }
  }
  if (root_count == 0) throw std::runtime_error("taxonomy: no root (cycle)");

  t.build_derived();
  return t;
}

void Taxonomy::build_derived() {
  const int k = size();
  children_.assign(k, {});
  for (int m = 0; m < k; ++m)
    if (m != root_) children_[parent_[m]].push_back(m);

  // BFS from the root; an unreached node sits on a parent cycle.
  topo_.clear();
  topo_.reserve(k);
  std::vector<char> seen(k, 0);
  topo_.push_back(root_);
  seen[root_] = 1;
  for (size_t i = 0; i < topo_.size(); ++i)
    for (NodeId c : children_[topo_[i]]) {
      seen[c] = 1;
      topo_.push_back(c);
    }
  if (static_cast<int>(topo_.size()) != k) {
    for (int m = 0; m < k; ++m)
      if (!seen[m])
        throw std::runtime_error("taxonomy: cycle involving '" + names_[m] + "'");
  }

  ancestors_.assign(k, {});
  max_depth_ = 0;
  for (NodeId m : topo_) {
    if (m == root_) {
      ancestors_[m] = {root_};
    } else {
      ancestors_[m] = ancestors_[parent_[m]];
      ancestors_[m].push_back(m);
    }
    max_depth_ = std::max(max_depth_, static_cast<int>(ancestors_[m].size()));
  }

  descendants_.assign(k, {});
  for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
    NodeId m = *it;
    if (m == root_) continue;
    NodeId p = parent_[m];
    descendants_[p].push_back(m);
    descendants_[p].insert(descendants_[p].end(), descendants_[m].begin(), descendants_[m].end());
  }
  for (auto& d : descendants_) std::sort(d.begin(), d.end());
}

std::string Taxonomy::serialize() const {
  std::string out;
  for (int m = 0; m < size(); ++m) {
    out += names_[m];
    out += '\t';
    out += (m == root_) ? "-" : names_[parent_[m]];
    out += '\n';
  }
  return out;
}

NodeId Taxonomy::check(NodeId m) const {
  if (m < 0 || m >= size())
    throw std::out_of_range("invalid node id " + std::to_string(m));
  return m;
}

bool Taxonomy::is_ancestor_of(NodeId a, NodeId m) const {
  check(a);
  const auto& chain = ancestors(m);
  return std::find(chain.begin(), chain.end(), a) != chain.end();
}

std::vector<NodeId> Taxonomy::leaves() const {
  std::vector<NodeId> out;
  for (int m = 0; m < size(); ++m)
    if (children_[m].empty()) out.push_back(m);
  return out;
}

std::vector<NodeId> Taxonomy::non_leaves() const {
  std::vector<NodeId> out;
  for (int m = 0; m < size(); ++m)
    if (!children_[m].empty()) out.push_back(m);
  return out;
}

std::optional<NodeId> Taxonomy::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? std::nullopt : std::optional<NodeId>(it->second);
}

NodeId Taxonomy::require(std::string_view name) const {
  auto id = find(name);
  if (!id) throw std::runtime_error("unknown label '" + std::string(name) + "'");
  return *id;
}

}  // namespace hmlc
