#pragma once

#include <Eigen/Dense>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "latentgraph/gtests.hpp"

namespace latentgraph {

enum class VertexKind { LatentBlock, LatentScalar, Response };

struct Vertex {
  VertexKind kind = VertexKind::LatentBlock;
  int margin = 0;      // 1-based margin index j
  int clustering = 0;  // 1-based clustering index (latent vertices)
  std::string label;
};

// Mixed graph: undirected intra-block edges, directed latent -> response
// edges between blocks. Edges are stored once per unordered/ordered pair.
struct MixedGraph {
  std::vector<Vertex> vertices;
  std::set<std::pair<int, int>> undirected;  // stored with first < second
  std::set<std::pair<int, int>> directed;    // (from, to)
  std::vector<std::vector<int>> blocks;      // vertex indices per block

  int find_vertex(const std::string& label) const;  // -1 when absent
  void add_undirected(int a, int b);
  void validate() const;
};

// Vertex per margin, edge where the corrected p-value falls below alpha.
MixedGraph build_ug(const Eigen::MatrixXd& pvalue_matrix, double alpha,
                    Correction correction);

// Latent blocks (one graph per clustering, vertices = margins) joined with a
// response block; directed edges latent -> same-margin response.
MixedGraph build_bcg(const std::vector<MixedGraph>& latent_blocks, int margins);

// Drop directions, marry co-parents.
MixedGraph moralize(const MixedGraph& g);

bool separates(const MixedGraph& g, const std::set<int>& a,
               const std::set<int>& b, const std::set<int>& s);

// Minimum-cardinality latent separator of the two response sets on the moral
// graph; deterministic choice (see implementation note). Empty optional when
// no separator exists.
std::optional<std::vector<int>> induced_separation(const MixedGraph& bcg,
                                                   const std::set<int>& a_resp,
                                                   const std::set<int>& b_resp);

std::string export_dot(const MixedGraph& g);
std::string graph_to_json(const MixedGraph& g);

}  // namespace latentgraph
