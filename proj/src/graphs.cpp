#include "latentgraph/graphs.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace latentgraph {

int MixedGraph::find_vertex(const std::string& label) const {
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i].label == label) return static_cast<int>(i);
  return -1;
}

void MixedGraph::add_undirected(int a, int b) {
  if (a == b) throw std::invalid_argument("self loops not allowed");
  undirected.emplace(std::min(a, b), std::max(a, b));
}

void MixedGraph::validate() const {
  std::set<std::string> labels;
  for (const auto& v : vertices)
    if (!labels.insert(v.label).second)
      throw std::invalid_argument("duplicate vertex label: " + v.label);
  const int n = static_cast<int>(vertices.size());
  for (const auto& [a, b] : undirected)
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw std::invalid_argument("edge references unknown vertex");
  for (const auto& [a, b] : directed) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw std::invalid_argument("edge references unknown vertex");
    if (vertices[b].kind != VertexKind::Response)
      throw std::invalid_argument("directed edges must point to responses");
  }
}

MixedGraph build_ug(const Eigen::MatrixXd& pvalue_matrix, double alpha,
                    Correction correction) {
  const int d = static_cast<int>(pvalue_matrix.rows());
  if (pvalue_matrix.cols() != d)
    throw std::invalid_argument("p-value matrix must be square");
  if ((pvalue_matrix - pvalue_matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("p-value matrix must be symmetric");

  MixedGraph g;
  g.blocks.emplace_back();
  for (int j = 0; j < d; ++j) {
    g.vertices.push_back(
        {VertexKind::LatentBlock, j + 1, 1, "B1[" + std::to_string(j + 1) + "]"});
    g.blocks[0].push_back(j);
  }

  std::vector<double> raw;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      raw.push_back(pvalue_matrix(i, j));
      pairs.emplace_back(i, j);
    }
  const auto adjusted = adjust_pvalues(raw, correction);
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (adjusted[k] < alpha) g.add_undirected(pairs[k].first, pairs[k].second);
  return g;
}

MixedGraph build_bcg(const std::vector<MixedGraph>& latent_blocks, int margins) {
  if (latent_blocks.empty())
    throw std::invalid_argument("at least one latent block required");
  MixedGraph g;
  std::vector<std::vector<int>> latent_ids;  // per clustering, per margin

  for (std::size_t c = 0; c < latent_blocks.size(); ++c) {
    const MixedGraph& block = latent_blocks[c];
    if (static_cast<int>(block.vertices.size()) != margins)
      throw std::invalid_argument("latent block must have one vertex per margin");
    g.blocks.emplace_back();
    latent_ids.emplace_back();
    for (int j = 0; j < margins; ++j) {
      const int id = static_cast<int>(g.vertices.size());
      g.vertices.push_back({VertexKind::LatentBlock, j + 1,
                            static_cast<int>(c + 1),
                            "B" + std::to_string(c + 1) + "[" +
                                std::to_string(j + 1) + "]"});
      g.blocks.back().push_back(id);
      latent_ids.back().push_back(id);
    }
    for (const auto& [a, b] : block.undirected)
      g.add_undirected(latent_ids[c][a], latent_ids[c][b]);
  }

  g.blocks.emplace_back();
  for (int j = 0; j < margins; ++j) {
    const int id = static_cast<int>(g.vertices.size());
    g.vertices.push_back(
        {VertexKind::Response, j + 1, 0, "Y[" + std::to_string(j + 1) + "]"});
    g.blocks.back().push_back(id);
    for (std::size_t c = 0; c < latent_blocks.size(); ++c)
      g.directed.emplace(latent_ids[c][j], id);
  }
  g.validate();
  return g;
}

MixedGraph moralize(const MixedGraph& g) {
  MixedGraph moral;
  moral.vertices = g.vertices;
  moral.blocks = g.blocks;
  moral.undirected = g.undirected;
  for (const auto& [a, b] : g.directed) moral.add_undirected(a, b);

  // marry co-parents
  std::map<int, std::vector<int>> parents;
  for (const auto& [a, b] : g.directed) parents[b].push_back(a);
  for (auto& [child, ps] : parents) {
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j)
        moral.add_undirected(ps[i], ps[j]);
  }
  return moral;
}

namespace {

std::vector<std::vector<int>> adjacency_lists(const MixedGraph& g) {
  std::vector<std::vector<int>> adj(g.vertices.size());
  for (const auto& [a, b] : g.undirected) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

}  // namespace

bool separates(const MixedGraph& g, const std::set<int>& a,
               const std::set<int>& b, const std::set<int>& s) {
  for (int v : a)
    if (b.count(v) || s.count(v))
      throw std::invalid_argument("vertex sets must be disjoint");
  for (int v : b)
    if (s.count(v)) throw std::invalid_argument("vertex sets must be disjoint");

  const auto adj = adjacency_lists(g);
  std::vector<char> visited(g.vertices.size(), 0);
  std::deque<int> queue;
  for (int v : a) {
    visited[v] = 1;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (b.count(v)) return false;
    for (int w : adj[v]) {
      if (visited[w] || s.count(w)) continue;
      visited[w] = 1;
      queue.push_back(w);
    }
  }
  return true;
}

std::optional<std::vector<int>> induced_separation(const MixedGraph& bcg,
                                                   const std::set<int>& a_resp,
                                                   const std::set<int>& b_resp) {
  const MixedGraph moral = moralize(bcg);

  std::vector<int> latent;
  for (std::size_t i = 0; i < moral.vertices.size(); ++i)
    if (moral.vertices[i].kind != VertexKind::Response)
      latent.push_back(static_cast<int>(i));
  std::sort(latent.begin(), latent.end(), [&](int a, int b) {
    return moral.vertices[a].label < moral.vertices[b].label;
  });

  // neighbourhood of the endpoint sets; used to rank equally small separators
  std::set<int> boundary;
  for (const auto& [a, b] : moral.undirected) {
    if (a_resp.count(a) || b_resp.count(a)) boundary.insert(b);
    if (a_resp.count(b) || b_resp.count(b)) boundary.insert(a);
  }

  const int n = static_cast<int>(latent.size());
  for (int size = 0; size <= n; ++size) {
    // all minimum-cardinality separators of this size; prefer the one that
    // touches the endpoint neighbourhoods least, then label order
    std::optional<std::vector<int>> best;
    int best_touch = 0;
    std::vector<int> choice(size);
    std::function<void(int, int)> visit = [&](int start, int depth) {
      if (depth == size) {
        std::set<int> s(choice.begin(), choice.end());
        if (!separates(moral, a_resp, b_resp, s)) return;
        int touch = 0;
        for (int v : choice)
          if (boundary.count(v)) ++touch;
        if (!best || touch < best_touch) {
          best = choice;
          best_touch = touch;
        }
        return;
      }
      for (int i = start; i < n; ++i) {
        choice[depth] = latent[i];
        visit(i + 1, depth + 1);
      }
    };
    visit(0, 0);
    if (best) {
      std::sort(best->begin(), best->end(), [&](int a, int b) {
        return moral.vertices[a].label < moral.vertices[b].label;
      });
      return best;
    }
  }
  return std::nullopt;
}

namespace {

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

std::string export_dot(const MixedGraph& g) {
  std::ostringstream out;
  out << "digraph latent_structure {\n";
  out << "  node [shape=circle];\n";

  if (g.blocks.empty()) {
    std::vector<std::string> labels;
    for (const auto& v : g.vertices) labels.push_back(v.label);
    std::sort(labels.begin(), labels.end());
    for (const auto& l : labels) out << "  " << quoted(l) << ";\n";
  } else {
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
      out << "  subgraph cluster_" << b << " {\n";
      std::vector<std::string> labels;
      for (int id : g.blocks[b]) labels.push_back(g.vertices[id].label);
      std::sort(labels.begin(), labels.end());
      for (const auto& l : labels) out << "    " << quoted(l) << ";\n";
      out << "  }\n";
    }
  }

  std::vector<std::string> lines;
  for (const auto& [a, b] : g.undirected) {
    std::string la = g.vertices[a].label, lb = g.vertices[b].label;
    if (lb < la) std::swap(la, lb);
    lines.push_back("  " + quoted(la) + " -> " + quoted(lb) + " [dir=none];");
  }
  for (const auto& [a, b] : g.directed)
    lines.push_back("  " + quoted(g.vertices[a].label) + " -> " +
                    quoted(g.vertices[b].label) + ";");
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) out << l << "\n";
  out << "}\n";
  return out.str();
}

std::string graph_to_json(const MixedGraph& g) {
  auto kind_name = [](VertexKind k) {
    switch (k) {
      case VertexKind::LatentBlock:
        return "latent-block";
      case VertexKind::LatentScalar:
        return "latent-scalar";
      case VertexKind::Response:
        return "response";
    }
    return "unknown";
  };

  std::ostringstream out;
  out << "{\"vertices\":[";
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    const auto& v = g.vertices[i];
    if (i) out << ",";
    out << "{\"label\":" << quoted(v.label) << ",\"kind\":"
        << quoted(kind_name(v.kind)) << ",\"margin\":" << v.margin
        << ",\"clustering\":" << v.clustering << "}";
  }
  out << "],\"undirected\":[";
  bool first = true;
  for (const auto& [a, b] : g.undirected) {
    if (!first) out << ",";
    first = false;
    out << "[" << quoted(g.vertices[a].label) << "," << quoted(g.vertices[b].label)
        << "]";
  }
  out << "],\"directed\":[";
  first = true;
  for (const auto& [a, b] : g.directed) {
    if (!first) out << ",";
    first = false;
    out << "[" << quoted(g.vertices[a].label) << "," << quoted(g.vertices[b].label)
        << "]";
  }
  out << "],\"blocks\":[";
  for (std::size_t b = 0; b < g.blocks.size(); ++b) {
    if (b) out << ",";
    out << "[";
    for (std::size_t i = 0; i < g.blocks[b].size(); ++i) {
      if (i) out << ",";
      out << quoted(g.vertices[g.blocks[b][i]].label);
    }
    out << "]";
  }
  out << "]}";
  return out.str();
}

}  // namespace latentgraph
