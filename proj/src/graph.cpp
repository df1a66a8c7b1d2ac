#include "ggl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "ggl/errors.hpp"
#include "ggl/linalg.hpp"
#include "ggl/rng.hpp"

namespace ggl {

Graph::Graph(int n, std::vector<std::pair<int, int>> edges) : n_(n), adj_(n > 0 ? n : 0) {
  if (n < 2) throw ParameterError("graph needs at least 2 vertices, got " + std::to_string(n));
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw ParameterError("edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    if (a == b) throw ParameterError("self-loop at vertex " + std::to_string(a));
    auto e = std::minmax(a, b);
    if (!seen.insert({e.first, e.second}).second)
      throw ParameterError("duplicate edge (" + std::to_string(e.first) + "," + std::to_string(e.second) + ")");
  }
  edges_.assign(seen.begin(), seen.end());
  for (auto [a, b] : edges_) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
  auto dist = bfs_distances(0);
  if (std::any_of(dist.begin(), dist.end(), [](int d) { return d < 0; }))
    throw ParameterError("graph is not connected");
}

bool Graph::adjacent(int u, int v) const {
  const auto& nb = adj_.at(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

double Graph::edge_density() const {
  return static_cast<double>(edges_.size()) / (0.5 * n_ * (n_ - 1));
}

std::vector<int> Graph::bfs_distances(int source) const {
  std::vector<int> dist(n_, -1);
  std::queue<int> q;
  dist.at(source) = 0;
  q.push(source);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int w : adj_[u]) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        q.push(w);
      }
    }
  }
  return dist;
}

std::string Graph::to_edge_list() const {
  std::ostringstream os;
  os << "N " << n_ << '\n';
  for (auto [a, b] : edges_) os << a + 1 << ' ' << b + 1 << '\n';
  return os.str();
}

Graph Graph::from_edge_list(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int n = 0;
  if (!(is >> tag >> n) || tag != "N") throw ParameterError("edge list must start with 'N <n>'");
  std::vector<std::pair<int, int>> edges;
  int a, b;
  while (is >> a >> b) edges.emplace_back(a - 1, b - 1);
  if (!is.eof()) throw ParameterError("malformed edge list entry");
  return Graph(n, std::move(edges));
}

GraphKind parse_graph_kind(const std::string& s) {
  if (s == "cycle") return GraphKind::cycle;
  if (s == "star") return GraphKind::star;
  if (s == "complete") return GraphKind::complete;
  if (s == "complete_bipartite") return GraphKind::complete_bipartite;
  if (s == "random_spanning_tree" || s == "rst") return GraphKind::random_spanning_tree;
  throw ParameterError("unknown graph kind '" + s + "'");
}

std::string to_string(GraphKind k) {
  switch (k) {
    case GraphKind::cycle: return "cycle";
    case GraphKind::star: return "star";
    case GraphKind::complete: return "complete";
    case GraphKind::complete_bipartite: return "complete_bipartite";
    case GraphKind::random_spanning_tree: return "random_spanning_tree";
  }
  return "?";
}

Graph tree_from_pruefer(int n, const std::vector<int>& seq) {
  if (n < 2 || static_cast<int>(seq.size()) != n - 2)
    throw ParameterError("Pruefer sequence must have length n-2");
  std::vector<int> degree(n, 1);
  for (int s : seq) {
    if (s < 0 || s >= n) throw ParameterError("Pruefer entry out of range");
    ++degree[s];
  }
  std::vector<std::pair<int, int>> edges;
  std::set<int> leaves;
  for (int v = 0; v < n; ++v)
    if (degree[v] == 1) leaves.insert(v);
  for (int s : seq) {
    int leaf = *leaves.begin();
    leaves.erase(leaves.begin());
    edges.emplace_back(leaf, s);
    if (--degree[s] == 1) leaves.insert(s);
  }
  int u = *leaves.begin();
  int w = *std::next(leaves.begin());
  edges.emplace_back(u, w);
  return Graph(n, std::move(edges));
}

Graph make_graph(GraphKind kind, int n, uint64_t seed) {
  std::vector<std::pair<int, int>> e;
  switch (kind) {
    case GraphKind::cycle:
      if (n < 3) throw ParameterError("cycle graph needs n >= 3");
      for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
      break;
    case GraphKind::star:
      if (n < 3) throw ParameterError("star graph needs n >= 3");
      for (int i = 1; i < n; ++i) e.emplace_back(0, i);
      break;
    case GraphKind::complete:
      if (n < 2) throw ParameterError("complete graph needs n >= 2");
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
      break;
    case GraphKind::complete_bipartite: {
      if (n < 4 || n % 2 != 0) throw ParameterError("complete bipartite K_{m,m} needs even n >= 4");
      int m = n / 2;
      for (int i = 0; i < m; ++i)
        for (int j = m; j < n; ++j) e.emplace_back(i, j);
      break;
    }
    case GraphKind::random_spanning_tree: {
      if (n < 2) throw ParameterError("random spanning tree needs n >= 2");
      if (n == 2) return Graph(2, {{0, 1}});
      Rng rng = Rng(seed).substream("random_spanning_tree", {static_cast<uint64_t>(n)});
      std::vector<int> seq(n - 2);
      for (int& s : seq) s = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
      return tree_from_pruefer(n, seq);
    }
  }
  return Graph(n, std::move(e));
}

Eigen::MatrixXd laplacian(const Graph& g) {
  const int n = g.n();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
  for (auto [a, b] : g.edges()) {
    double w = -1.0 / std::sqrt(static_cast<double>(g.degree(a)) * g.degree(b));
    lap(a, b) = w;
    lap(b, a) = w;
  }
  return lap;
}

Eigen::MatrixXd laplacian_mask(const Graph& g) {
  const int n = g.n();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (auto [a, b] : g.edges()) {
    m(a, b) = 1.0;
    m(b, a) = 1.0;
  }
  return m;
}

std::vector<int> neighborhood(const Graph& g, int v, int ell) {
  if (v < 0 || v >= g.n()) throw ParameterError("vertex index out of range");
  if (ell < 1) throw ParameterError("hop count must be >= 1");
  auto dist = g.bfs_distances(v);
  std::vector<int> out;
  for (int u = 0; u < g.n(); ++u)
    if (dist[u] == ell) out.push_back(u);
  return out;
}

int diameter(const Graph& g) {
  int best = 0;
  for (int v = 0; v < g.n(); ++v) {
    auto d = g.bfs_distances(v);
    best = std::max(best, *std::max_element(d.begin(), d.end()));
  }
  return best;
}

Eigen::MatrixXd multi_hop_operator(const Eigen::MatrixXd& lap, int ell) {
  if (ell < 1) throw ParameterError("multi_hop_operator: ell must be >= 1");
  const auto n = lap.rows();
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  return id - matrix_power(id - lap, ell);
}

PolySpaceProjection project_onto_poly_space(const Eigen::MatrixXd& a, const Eigen::MatrixXd& lap) {
  if (a.rows() != a.cols() || a.rows() != lap.rows() || lap.rows() != lap.cols())
    throw ShapeError("project_onto_poly_space: A and L must be square of equal size");
  const Eigen::Index n = lap.rows();
  auto frob = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) { return (x.array() * y.array()).sum(); };

  // Modified Gram-Schmidt with one re-orthogonalization pass over the powers.
  std::vector<Eigen::MatrixXd> basis;
  std::vector<int> kept;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::MatrixXd v = power;
    double scale = std::sqrt(frob(power, power));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) v -= frob(q, v) * q;
    double nv = std::sqrt(frob(v, v));
    if (nv > 1e-10 * std::max(1.0, scale)) {
      basis.push_back(v / nv);
      kept.push_back(static_cast<int>(k));
    }
    power = power * lap;
  }

  PolySpaceProjection out;
  out.rank = static_cast<int>(basis.size());
  Eigen::VectorXd ortho(out.rank);
  out.projection = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < out.rank; ++k) {
    ortho(k) = frob(basis[k], a);
    out.projection += ortho(k) * basis[k];
  }
  out.residual = std::sqrt(std::max(0.0, frob(a - out.projection, a - out.projection)));

  // Power-basis coefficients from the Gram system of the retained powers.
  Eigen::MatrixXd gram(out.rank, out.rank);
  Eigen::VectorXd rhs(out.rank);
  std::vector<Eigen::MatrixXd> powers;
  for (int k : kept) powers.push_back(matrix_power(lap, k));
  for (int r = 0; r < out.rank; ++r) {
    rhs(r) = frob(powers[r], a);
    for (int c = 0; c < out.rank; ++c) gram(r, c) = frob(powers[r], powers[c]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double cond = svd.singularValues()(0) / svd.singularValues()(out.rank - 1);
  if (std::isfinite(cond) && cond < 1e10) {
    Eigen::VectorXd c = svd.solve(rhs);
    out.coefficients = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < out.rank; ++r) out.coefficients(kept[r]) = c(r);
    out.power_basis = true;
  } else {
    out.coefficients = ortho;
    out.power_basis = false;
  }
  return out;
}

}  // namespace ggl
