#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latentgraph/graphs.hpp"

using namespace latentgraph;

namespace {

// latent chain 1-2, 2-3 over three margins (one clustering block)
MixedGraph chain_block() {
  MixedGraph g;
  for (int j = 0; j < 3; ++j)
    g.vertices.push_back(
        {VertexKind::LatentBlock, j + 1, 1, "B[" + std::to_string(j + 1) + "]"});
  g.add_undirected(0, 1);
  g.add_undirected(1, 2);
  return g;
}

// two-clustering chain model over three margins plus responses
MixedGraph two_clustering_bcg() { return build_bcg({chain_block(), chain_block()}, 3); }

std::set<int> by_label(const MixedGraph& g, std::initializer_list<const char*> ls) {
  std::set<int> out;
  for (const char* l : ls) {
    const int id = g.find_vertex(l);
    REQUIRE(id >= 0);
    out.insert(id);
  }
  return out;
}

}  // namespace

TEST_CASE("build_ug from p-values") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(3, 3);
  const MixedGraph empty = build_ug(p, 0.05, Correction::Holm);
  CHECK(empty.vertices.size() == 3);
  CHECK(empty.undirected.empty());

  p(0, 1) = p(1, 0) = 1e-6;
  const MixedGraph one = build_ug(p, 0.05, Correction::Holm);
  CHECK(one.undirected.size() == 1);
  CHECK(one.undirected.count({0, 1}) == 1);

  // alpha = 0 never adds an edge
  CHECK(build_ug(p, 0.0, Correction::None).undirected.empty());

  Eigen::MatrixXd asym = p;
  asym(0, 2) = 0.5;
  CHECK_THROWS_AS(build_ug(asym, 0.05, Correction::None), std::invalid_argument);
}

TEST_CASE("build_bcg wiring") {
  MixedGraph no_edges;
  for (int j = 0; j < 2; ++j)
    no_edges.vertices.push_back(
        {VertexKind::LatentBlock, j + 1, 1, "B[" + std::to_string(j + 1) + "]"});
  const MixedGraph g = build_bcg({no_edges}, 2);
  CHECK(g.vertices.size() == 4);
  CHECK(g.undirected.empty());
  CHECK(g.directed.size() == 2);
  CHECK(g.blocks.size() == 2);

  CHECK_THROWS_AS(build_bcg({}, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_bcg({no_edges}, 3), std::invalid_argument);
}

TEST_CASE("two-clustering chain model and its moral graph") {
  const MixedGraph bcg = two_clustering_bcg();
  CHECK(bcg.vertices.size() == 9);
  CHECK(bcg.undirected.size() == 4);  // two chains of two edges
  CHECK(bcg.directed.size() == 6);

  const MixedGraph moral = moralize(bcg);
  CHECK(moral.directed.empty());
  // chains + former directed edges + marriages of the two parents of each response
  CHECK(moral.undirected.size() == 4 + 6 + 3);
  for (int j = 1; j <= 3; ++j) {
    const int a = moral.find_vertex("B1[" + std::to_string(j) + "]");
    const int b = moral.find_vertex("B2[" + std::to_string(j) + "]");
    CHECK(moral.undirected.count({std::min(a, b), std::max(a, b)}) == 1);
  }

  // moralization is idempotent
  const MixedGraph twice = moralize(moral);
  CHECK(twice.undirected == moral.undirected);
}

TEST_CASE("v-structure marries its parents") {
  MixedGraph g;
  g.vertices.push_back({VertexKind::LatentBlock, 1, 1, "a"});
  g.vertices.push_back({VertexKind::LatentBlock, 2, 1, "b"});
  g.vertices.push_back({VertexKind::Response, 1, 0, "c"});
  g.directed.emplace(0, 2);
  g.directed.emplace(1, 2);
  const MixedGraph moral = moralize(g);
  CHECK(moral.undirected.size() == 3);
}

TEST_CASE("separation queries on the moral graph") {
  const MixedGraph moral = moralize(two_clustering_bcg());
  const auto a = by_label(moral, {"Y[1]"});
  const auto b = by_label(moral, {"Y[3]"});
  CHECK(separates(moral, a, b, by_label(moral, {"B1[2]", "B2[2]"})));
  CHECK_FALSE(separates(moral, a, b, {}));
  // separation is symmetric
  CHECK(separates(moral, b, a, by_label(moral, {"B1[2]", "B2[2]"})));

  CHECK_THROWS_AS(separates(moral, a, a, {}), std::invalid_argument);

  // two isolated vertices are separated by the empty set
  MixedGraph iso;
  iso.vertices.push_back({VertexKind::LatentBlock, 1, 1, "u"});
  iso.vertices.push_back({VertexKind::LatentBlock, 2, 1, "v"});
  CHECK(separates(iso, {0}, {1}, {}));
}

TEST_CASE("induced separation recovers the middle latent pair") {
  const MixedGraph bcg = two_clustering_bcg();
  const auto a = by_label(bcg, {"Y[1]"});
  const auto b = by_label(bcg, {"Y[3]"});
  const auto sep = induced_separation(bcg, a, b);
  REQUIRE(sep.has_value());
  REQUIRE(sep->size() == 2);
  CHECK(bcg.vertices[(*sep)[0]].label == "B1[2]");
  CHECK(bcg.vertices[(*sep)[1]].label == "B2[2]");

  // the returned set always separates on the moral graph
  const MixedGraph moral = moralize(bcg);
  CHECK(separates(moral, a, b, std::set<int>(sep->begin(), sep->end())));
}

TEST_CASE("extra latent edge invalidates the middle separator") {
  MixedGraph block1 = chain_block();
  block1.add_undirected(0, 2);  // direct link between margins 1 and 3
  const MixedGraph bcg = build_bcg({block1, chain_block()}, 3);
  const auto a = by_label(bcg, {"Y[1]"});
  const auto b = by_label(bcg, {"Y[3]"});
  const MixedGraph moral = moralize(bcg);
  // the former separator no longer works; the search must route around it
  CHECK_FALSE(separates(moral, a, b, by_label(moral, {"B1[2]", "B2[2]"})));
  const auto sep = induced_separation(bcg, a, b);
  REQUIRE(sep.has_value());
  CHECK(sep->size() >= 2);
  CHECK(separates(moral, a, b, std::set<int>(sep->begin(), sep->end())));
}

TEST_CASE("fully connected responses have no latent separator") {
  MixedGraph full;
  for (int j = 0; j < 2; ++j)
    full.vertices.push_back(
        {VertexKind::LatentBlock, j + 1, 1, "B[" + std::to_string(j + 1) + "]"});
  full.add_undirected(0, 1);
  MixedGraph bcg = build_bcg({full}, 2);
  // direct response-response connection cannot be cut by latent vertices
  const int y1 = bcg.find_vertex("Y[1]"), y2 = bcg.find_vertex("Y[2]");
  bcg.add_undirected(y1, y2);
  CHECK_FALSE(induced_separation(bcg, {y1}, {y2}).has_value());
}

TEST_CASE("dot export is deterministic") {
  const MixedGraph bcg = two_clustering_bcg();
  const std::string once = export_dot(bcg);
  CHECK(once == export_dot(bcg));
  CHECK(once.find("\"B1[2]\" -> \"Y[2]\";") != std::string::npos);
  CHECK(once.find("[dir=none]") != std::string::npos);

  MixedGraph pair;
  pair.vertices.push_back({VertexKind::LatentBlock, 1, 1, "u"});
  pair.vertices.push_back({VertexKind::LatentBlock, 2, 1, "v"});
  const std::string expect =
      "digraph latent_structure {\n"
      "  node [shape=circle];\n"
      "  \"u\";\n"
      "  \"v\";\n"
      "}\n";
  CHECK(export_dot(pair) == expect);
}

TEST_CASE("graph json mirror") {
  const MixedGraph bcg = two_clustering_bcg();
  const std::string json = graph_to_json(bcg);
  CHECK(json.find("\"vertices\"") != std::string::npos);
  CHECK(json.find("\"B2[3]\"") != std::string::npos);
  CHECK(json.find("\"response\"") != std::string::npos);
}

TEST_CASE("validation catches bad structures") {
  MixedGraph g;
  g.vertices.push_back({VertexKind::LatentBlock, 1, 1, "x"});
  g.vertices.push_back({VertexKind::LatentBlock, 2, 1, "x"});  // duplicate label
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  MixedGraph h;
  h.vertices.push_back({VertexKind::LatentBlock, 1, 1, "a"});
  h.vertices.push_back({VertexKind::LatentBlock, 2, 1, "b"});
  h.directed.emplace(0, 1);  // directed edge into a latent vertex
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);

  CHECK_THROWS_AS(h.add_undirected(1, 1), std::invalid_argument);
}
