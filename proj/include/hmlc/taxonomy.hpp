#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hmlc {

using NodeId = int;

// Rooted label tree. Immutable after construction; safe to share across threads.
// Node ids are dense 0..k-1 in file first-appearance order, so logit/label vectors
// have a deterministic layout for a given file.
class Taxonomy {
 public:
  // Parses the edge-list format: one `child<TAB>parent` per line, parent "-" marks
  // the root, '#' lines and blank lines ignored. Names may contain spaces, not tabs.
  static Taxonomy parse(std::string_view text);

  std::string serialize() const;

  int size() const { return static_cast<int>(names_.size()); }
  NodeId root() const { return root_; }
  const std::string& name(NodeId m) const { return names_.at(check(m)); }
  std::optional<NodeId> parent(NodeId m) const {
    check(m);
    return m == root_ ? std::nullopt : std::optional<NodeId>(parent_[m]);
  }
  const std::vector<NodeId>& children(NodeId m) const { return children_.at(check(m)); }
  bool is_leaf(NodeId m) const { return children_.at(check(m)).empty(); }

  // Root-to-m path, inclusive of both ends; length = depth(m).
  const std::vector<NodeId>& ancestors(NodeId m) const { return ancestors_.at(check(m)); }
  // Number of nodes on the root..m path (root has depth 1).
  int depth(NodeId m) const { return static_cast<int>(ancestors_.at(check(m)).size()); }
  int max_depth() const { return max_depth_; }

  // Strict descendants (subtree minus the node itself).
  const std::vector<NodeId>& descendants(NodeId m) const { return descendants_.at(check(m)); }

  // True when a lies on the root..m path (a == m counts).
  bool is_ancestor_of(NodeId a, NodeId m) const;

  std::vector<NodeId> leaves() const;
  std::vector<NodeId> non_leaves() const;

  // Parent-before-child traversal order.
  const std::vector<NodeId>& topo_order() const { return topo_; }

  std::optional<NodeId> find(std::string_view name) const;
  // find() that throws with the offending name on miss.
  NodeId require(std::string_view name) const;

 private:
  Taxonomy() = default;
  NodeId check(NodeId m) const;
  void build_derived();

  std::vector<std::string> names_;
  std::vector<NodeId> parent_;  // parent_[root] == root
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::vector<NodeId>> ancestors_;
  std::vector<std::vector<NodeId>> descendants_;
  std::vector<NodeId> topo_;
  std::unordered_map<std::string, NodeId> by_name_;
  NodeId root_ = 0;
  int max_depth_ = 0;
};

}  // namespace hmlc
