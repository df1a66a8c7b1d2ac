#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ggl {

// Simple, connected, undirected graph with 0-based vertices. Edges are stored
// as sorted pairs (i < j) in lexicographic order.
class Graph {
 public:
  Graph(int n, std::vector<std::pair<int, int>> edges);

  int n() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int degree(int v) const { return static_cast<int>(adj_.at(v).size()); }
  const std::vector<int>& neighbors(int v) const { return adj_.at(v); }
  bool adjacent(int u, int v) const;
  double edge_density() const;

  std::vector<int> bfs_distances(int source) const;

  std::string to_edge_list() const;
  static Graph from_edge_list(const std::string& text);

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
};

enum class GraphKind { cycle, star, complete, complete_bipartite, random_spanning_tree };

GraphKind parse_graph_kind(const std::string& s);
std::string to_string(GraphKind k);

// Star center is vertex 0; the bipartite halves are {0..m-1} and {m..2m-1}.
Graph make_graph(GraphKind kind, int n, uint64_t seed = 0);

// Tree decoded from a Pruefer sequence of length n-2 with entries in [0, n).
Graph tree_from_pruefer(int n, const std::vector<int>& seq);

Eigen::MatrixXd laplacian(const Graph& g);

// Vertices at BFS distance exactly ell from v.
std::vector<int> neighborhood(const Graph& g, int v, int ell);

int diameter(const Graph& g);

// I - (I - L)^ell
Eigen::MatrixXd multi_hop_operator(const Eigen::MatrixXd& lap, int ell);

// Boolean pattern of the nonzero entries of L (self loops plus edges).
Eigen::MatrixXd laplacian_mask(const Graph& g);

struct PolySpaceProjection {
  Eigen::VectorXd coefficients;     // power basis if power_basis, else orthonormal basis
  bool power_basis = true;
  int rank = 0;                     // number of independent powers retained
  double residual = 0.0;            // Frobenius norm of A - proj(A)
  Eigen::MatrixXd projection;
};

// Least-squares projection of A onto span{I, L, ..., L^{N-1}} under the
// Frobenius inner product.
PolySpaceProjection project_onto_poly_space(const Eigen::MatrixXd& a, const Eigen::MatrixXd& lap);

}  // namespace ggl
