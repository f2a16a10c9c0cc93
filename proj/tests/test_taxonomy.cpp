#include <doctest.h>

#include <stdexcept>

#include "hmlc/taxonomy.hpp"
#include "hmlc/util.hpp"

using namespace hmlc;

namespace {

const char* kChain =
    "Abnormal\t-\n"
    "Pulmonary Diseases\tAbnormal\n"
    "Scarring\tPulmonary Diseases\n";

}  // namespace

TEST_CASE("parse three-node chain") {
  Taxonomy t = Taxonomy::parse(kChain);
  CHECK(t.size() == 3);
  CHECK(t.root() == 0);
  CHECK(t.name(0) == "Abnormal");
  CHECK(t.name(2) == "Scarring");
  CHECK(*t.parent(2) == 1);
  CHECK_FALSE(t.parent(0).has_value());
  CHECK(t.max_depth() == 3);
}

TEST_CASE("parse single node") {
  Taxonomy t = Taxonomy::parse("X\t-\n");
  CHECK(t.size() == 1);
  CHECK(t.max_depth() == 1);
  CHECK(t.leaves() == std::vector<NodeId>{0});
  CHECK(t.non_leaves().empty());
  CHECK(t.ancestors(0) == std::vector<NodeId>{0});
}

TEST_CASE("parse errors") {
  CHECK_THROWS_WITH_AS(Taxonomy::parse("A\t-\nB\t-\n"), doctest::Contains("multiple roots"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(Taxonomy::parse("A\t-\nA\tA\n"), doctest::Contains("duplicate name"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(Taxonomy::parse("A\t-\nB\tC\n"), doctest::Contains("unknown parent"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(Taxonomy::parse(""), doctest::Contains("empty document"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(Taxonomy::parse("# only comments\n\n"),
                       doctest::Contains("empty document"), std::runtime_error);
  // Two-node parent cycle next to a proper root.
  CHECK_THROWS_WITH_AS(Taxonomy::parse("R\t-\nA\tB\nB\tA\n"), doctest::Contains("cycle"),
                       std::runtime_error);
  CHECK_THROWS_AS(Taxonomy::parse("A\t-\nB\n"), std::runtime_error);
}

TEST_CASE("comments, blank lines and CRLF are tolerated") {
  Taxonomy t = Taxonomy::parse("# comment\r\n\r\nA\t-\r\nB\tA\r\n");
  CHECK(t.size() == 2);
  CHECK(t.name(1) == "B");
}

TEST_CASE("ancestors are ordered root to node") {
  Taxonomy t = Taxonomy::parse(kChain);
  CHECK(t.ancestors(2) == std::vector<NodeId>{0, 1, 2});
  CHECK(t.ancestors(0) == std::vector<NodeId>{0});
  for (NodeId m = 0; m < t.size(); ++m) {
    const auto& a = t.ancestors(m);
    CHECK(a.front() == t.root());
    CHECK(a.back() == m);
    for (size_t i = 1; i < a.size(); ++i) CHECK(*t.parent(a[i]) == a[i - 1]);
  }
}

TEST_CASE("leaves and non-leaves partition the node set") {
  Taxonomy t = Taxonomy::parse(kChain);
  CHECK(t.leaves() == std::vector<NodeId>{2});
  CHECK(t.non_leaves() == std::vector<NodeId>{0, 1});
  auto l = t.leaves();
  auto nl = t.non_leaves();
  CHECK(l.size() + nl.size() == static_cast<size_t>(t.size()));
}

TEST_CASE("serialize round trip") {
  Taxonomy t = Taxonomy::parse(kChain);
  Taxonomy u = Taxonomy::parse(t.serialize());
  CHECK(u.serialize() == t.serialize());
  CHECK(u.size() == t.size());
  for (NodeId m = 0; m < t.size(); ++m) {
    CHECK(u.name(m) == t.name(m));
    CHECK(u.parent(m) == t.parent(m));
  }
}

TEST_CASE("shipped example taxonomies") {
  Taxonomy plco = Taxonomy::parse(util::read_file(std::string(HMLC_DATA_DIR) + "/plco.tsv"));
  CHECK(plco.size() == 19);
  CHECK(plco.leaves().size() == 14);
  CHECK(plco.non_leaves().size() == 5);
  CHECK(plco.max_depth() == 4);
  // the documented unconditional-probability chain
  NodeId scar = plco.require("Scarring");
  CHECK(plco.ancestors(scar).size() == 3);
  CHECK(plco.name(plco.ancestors(scar)[0]) == "Abnormal");
  CHECK(plco.name(plco.ancestors(scar)[1]) == "Pulmonary Diseases");
  NodeId nodule = plco.require("Nodule");
  CHECK(plco.depth(nodule) == 4);

  Taxonomy pad = Taxonomy::parse(util::read_file(std::string(HMLC_DATA_DIR) + "/padchest.tsv"));
  CHECK(pad.size() == 30);
  CHECK(pad.max_depth() >= 4);
}

TEST_CASE("descendants and ancestor queries") {
  Taxonomy t = Taxonomy::parse("r\t-\na\tr\nb\tr\nc\ta\nd\ta\n");
  CHECK(t.descendants(t.require("a")) == std::vector<NodeId>{t.require("c"), t.require("d")});
  CHECK(t.descendants(t.require("b")).empty());
  CHECK(t.is_ancestor_of(t.require("r"), t.require("d")));
  CHECK(t.is_ancestor_of(t.require("a"), t.require("a")));
  CHECK_FALSE(t.is_ancestor_of(t.require("b"), t.require("c")));
  CHECK_THROWS_AS(t.name(99), std::out_of_range);
  CHECK_THROWS_AS((void)t.require("nope"), std::runtime_error);
}
