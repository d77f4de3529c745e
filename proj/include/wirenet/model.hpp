#pragma once

#include <algorithm>
#include <complex>
#include <deque>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wirenet/rational.hpp"

namespace wirenet {

using cplx = std::complex<double>;

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One stored orientation per undirected edge; the reverse carries the negated
// translation and the conjugate weight.
struct Edge {
  int from = 0;
  int to = 0;
  std::vector<int> translation;
  cplx weight{1.0, 0.0};
};

// Finite quotient graph of a periodic wire network: vertices in a fundamental
// cell, edges with integer translation parts in the period-lattice basis.
struct QuotientGraphModel {
  std::string name;
  int dim = 0;
  std::vector<std::vector<double>> lattice_basis;  // geometric embedding, informational
  std::vector<std::string> vertices;
  std::vector<Edge> edges;
  // Fractional vertex positions in the period basis. Built-in geometries ship
  // them (the magnetic loop phases depend on them); models loaded from files
  // default to the origin.
  std::vector<RVec> positions;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }

  bool has_self_loops() const {
    for (const auto& e : edges)
      if (e.from == e.to) return true;
    return false;
  }

  // No parallel edges and no self-loops.
  bool simply_laced() const {
    if (has_self_loops()) return false;
    std::vector<std::pair<int, int>> seen;
    for (const auto& e : edges) {
      auto key = std::minmax(e.from, e.to);
      std::pair<int, int> k{key.first, key.second};
      if (std::find(seen.begin(), seen.end(), k) != seen.end()) return false;
      seen.push_back(k);
    }
    return true;
  }

  double weight_bound() const {
    double s = 0.0;
    for (const auto& e : edges) s += 2.0 * std::abs(e.weight);
    return s;
  }

  void validate() const {
    if (dim < 1) throw ModelError("model '" + name + "': dim must be >= 1");
    if (vertices.empty()) throw ModelError("model '" + name + "': needs at least one vertex");
    if (edges.empty()) throw ModelError("model '" + name + "': needs at least one edge");
    if (static_cast<int>(lattice_basis.size()) != dim)
      throw ModelError("model '" + name + "': lattice_basis needs one vector per lattice rank");
    for (const auto& v : lattice_basis)
      if (static_cast<int>(v.size()) < dim || v.size() != lattice_basis[0].size())
        throw ModelError("model '" + name +
                         "': lattice_basis vectors need equal length >= the lattice rank");
    for (size_t i = 0; i < edges.size(); ++i) {
      const Edge& e = edges[i];
      if (e.from < 0 || e.from >= vertex_count() || e.to < 0 || e.to >= vertex_count())
        throw ModelError("edge " + std::to_string(i) + ": vertex index out of range");
      if (static_cast<int>(e.translation.size()) != dim)
        throw ModelError("edge " + std::to_string(i) + ": translation length != dim");
      bool zero = std::all_of(e.translation.begin(), e.translation.end(),
                              [](int t) { return t == 0; });
      if (e.from == e.to && zero)
        throw ModelError("edge " + std::to_string(i) +
                         ": self-loop with zero translation is degenerate");
    }
    if (positions.size() != vertices.size())
      throw ModelError("model '" + name + "': positions/vertices size mismatch");
    // Connectivity over the undirected quotient graph.
    std::vector<char> seen(vertices.size(), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int found = 1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (const auto& e : edges) {
        int other = -1;
        if (e.from == v) other = e.to;
        else if (e.to == v) other = e.from;
        if (other >= 0 && !seen[other]) {
          seen[other] = 1;
          ++found;
          queue.push_back(other);
        }
      }
    }
    if (found != vertex_count())
      throw ModelError("model '" + name + "': quotient graph is not connected");
  }
};

// ---------------------------------------------------------------------------
// Model file schema (JSON): name, dim, lattice_basis, vertices, edges.
// Unknown fields are rejected.

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) ok = true;
    if (!ok) throw ModelError("unknown field '" + it.key() + "' in " + where);
  }
}

}  // namespace detail

inline QuotientGraphModel load_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(std::string("model file parse error: ") + e.what());
  }
  if (!j.is_object()) throw ModelError("model file: top level must be an object");
  detail::reject_unknown_keys(j, {"name", "dim", "lattice_basis", "vertices", "edges"},
                              "model file");
  QuotientGraphModel m;
  try {
    m.name = j.at("name").get<std::string>();
    m.dim = j.at("dim").get<int>();
    m.lattice_basis = j.at("lattice_basis").get<std::vector<std::vector<double>>>();
    m.vertices = j.at("vertices").get<std::vector<std::string>>();
    if (!j.at("edges").is_array()) throw ModelError("field 'edges' must be an array");
    int idx = 0;
    for (const auto& je : j.at("edges")) {
      if (!je.is_object())
        throw ModelError("edge " + std::to_string(idx) + ": must be an object");
      detail::reject_unknown_keys(je, {"from", "to", "translation", "weight"},
                                  "edge " + std::to_string(idx));
      Edge e;
      e.from = je.at("from").get<int>();
      e.to = je.at("to").get<int>();
      e.translation = je.at("translation").get<std::vector<int>>();
      if (je.contains("weight")) {
        const auto& w = je.at("weight");
        if (w.is_number()) e.weight = cplx(w.get<double>(), 0.0);
        else if (w.is_array() && w.size() == 2)
          e.weight = cplx(w.at(0).get<double>(), w.at(1).get<double>());
        else
          throw ModelError("edge " + std::to_string(idx) +
                           ": weight must be a number or [re,im]");
      }
      m.edges.push_back(std::move(e));
      ++idx;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model file: ") + e.what());
  }
  m.positions.assign(m.vertices.size(), RVec(static_cast<size_t>(m.dim), Rational(0)));
  m.validate();
  return m;
}

inline std::string serialize_model(const QuotientGraphModel& m) {
  nlohmann::ordered_json j;
  j["name"] = m.name;
  j["dim"] = m.dim;
  j["lattice_basis"] = m.lattice_basis;
  j["vertices"] = m.vertices;
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : m.edges) {
    nlohmann::ordered_json je;
    je["from"] = e.from;
    je["to"] = e.to;
    je["translation"] = e.translation;
    if (e.weight != cplx(1.0, 0.0)) {
      if (e.weight.imag() == 0.0) je["weight"] = e.weight.real();
      else je["weight"] = {e.weight.real(), e.weight.imag()};
    }
    j["edges"].push_back(je);
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Built-in geometries.

inline QuotientGraphModel builtin_model(const std::string& name) {
  QuotientGraphModel m;
  auto R = [](std::int64_t n, std::int64_t d) { return Rational(n, d); };
  if (name == "P") {
    // Simple cubic wire network: one site, three coordinate loops.
    m.name = "P";
    m.dim = 3;
    m.lattice_basis = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    m.vertices = {"o"};
    m.positions = {{R(0, 1), R(0, 1), R(0, 1)}};
    m.edges = {{0, 0, {1, 0, 0}}, {0, 0, {0, 1, 0}}, {0, 0, {0, 0, 1}}};
  } else if (name == "honeycomb") {
    // Two sites per cell; period vectors f2 = e2-e1, f3 = e3-e1 for the unit
    // edge vectors e1=(-1,0), e2=(1,sqrt3)/2, e3=(1,-sqrt3)/2. Site b sits at
    // e1 = -(f2+f3)/3, so the three edge vectors are e1, e2, e3.
    const double s3 = std::sqrt(3.0);
    m.name = "honeycomb";
    m.dim = 2;
    m.lattice_basis = {{1.5, s3 / 2.0}, {1.5, -s3 / 2.0}};
    m.vertices = {"a", "b"};
    m.positions = {{R(0, 1), R(0, 1)}, {R(-1, 3), R(-1, 3)}};
    m.edges = {{0, 1, {0, 0}}, {0, 1, {1, 0}}, {0, 1, {0, 1}}};
  } else if (name == "D") {
    // Diamond: fcc period basis b_i = e_{i+1} - e_1 for the four bond vectors
    // e_1 = (1,1,1)/4 ... e_4 = (1,-1,-1)/4; site b at e_1 = -(b1+b2+b3)/4.
    m.name = "D";
    m.dim = 3;
    m.lattice_basis = {{-0.5, -0.5, 0.0}, {-0.5, 0.0, -0.5}, {0.0, -0.5, -0.5}};
    m.vertices = {"a", "b"};
    m.positions = {{R(0, 1), R(0, 1), R(0, 1)}, {R(-1, 4), R(-1, 4), R(-1, 4)}};
    m.edges = {{0, 1, {0, 0, 0}}, {0, 1, {1, 0, 0}}, {0, 1, {0, 1, 0}}, {0, 1, {0, 0, 1}}};
  } else if (name == "G") {
    // Gyroid (srs) skeletal graph: K4 quotient over the bcc lattice
    // g1=(1,-1,1)/2, g2=(-1,1,1)/2, g3=(1,1,-1)/2. Sites are the channel
    // junctions (1,1,1)/8, (1,7,3)/8, (3,1,7)/8, (3,7,5)/8 written in the
    // g-basis; every pair of site classes is joined by one edge of length
    // sqrt(2)/4.
    m.name = "G";
    m.dim = 3;
    m.lattice_basis = {{0.5, -0.5, 0.5}, {-0.5, 0.5, 0.5}, {0.5, 0.5, -0.5}};
    m.vertices = {"v1", "v2", "v3", "v4"};
    m.positions = {{R(1, 4), R(1, 4), R(1, 4)},
                   {R(1, 2), R(5, 4), R(1, 1)},
                   {R(5, 4), R(1, 1), R(1, 2)},
                   {R(1, 1), R(3, 2), R(5, 4)}};
    m.edges = {{0, 1, {0, -1, -1}}, {0, 2, {-1, -1, 0}}, {0, 3, {-1, -1, -1}},
               {1, 2, {-1, 0, 0}},  {1, 3, {0, 0, 0}},   {2, 3, {0, -1, -1}}};
  } else {
    throw ModelError("unknown built-in model '" + name +
                     "' (available: P, D, G, honeycomb)");
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Spanning-tree gauge.

struct GaugeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rooted spanning tree plus vertex order; fixes the matrix form of the
// Hamiltonian. loop_vectors[e] is the net translation of the generator
// attached to edge e (zero on tree edges).
struct GaugeChoice {
  int root = 0;
  std::vector<int> tree_edges;
  std::vector<int> order;                      // order[row] = vertex
  std::vector<std::vector<int>> loop_vectors;  // per edge, length dim
  std::vector<std::vector<int>> tree_offset;   // per vertex: translation of its tree lift
  std::vector<int> parent_edge;                // per vertex, -1 at root
  std::vector<int> row_of;                     // inverse of order

  int row(int vertex) const { return row_of[vertex]; }
};

inline GaugeChoice make_gauge(const QuotientGraphModel& m, int root = 0,
                              std::optional<std::vector<int>> tree = std::nullopt,
                              std::optional<std::vector<int>> order = std::nullopt) {
  const int nv = m.vertex_count();
  const int ne = m.edge_count();
  if (root < 0 || root >= nv) throw GaugeError("gauge root out of range");

  GaugeChoice g;
  g.root = root;
  g.parent_edge.assign(nv, -1);
  g.tree_offset.assign(nv, std::vector<int>(m.dim, 0));

  std::vector<char> in_tree(ne, 0);
  if (tree) {
    if (static_cast<int>(tree->size()) != nv - 1)
      throw GaugeError("supplied tree must have |V|-1 edges");
    for (int e : *tree) {
      if (e < 0 || e >= ne) throw GaugeError("tree edge index out of range");
      if (in_tree[e]) throw GaugeError("tree edge listed twice");
      in_tree[e] = 1;
    }
  }

  // Breadth-first from the root; restricted to the supplied tree if any,
  // otherwise lowest-index discovery edges form the default tree.
  std::vector<char> seen(nv, 0);
  std::deque<int> queue{root};
  seen[root] = 1;
  std::vector<int> bfs_order{root};
  std::vector<int> tree_found;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int e = 0; e < ne; ++e) {
      if (tree && !in_tree[e]) continue;
      const Edge& ed = m.edges[e];
      int other;
      int sign;
      if (ed.from == v) { other = ed.to; sign = +1; }
      else if (ed.to == v) { other = ed.from; sign = -1; }
      else continue;
      if (seen[other]) continue;
      seen[other] = 1;
      g.parent_edge[other] = e;
      for (int d = 0; d < m.dim; ++d)
        g.tree_offset[other][d] = g.tree_offset[v][d] + sign * ed.translation[d];
      bfs_order.push_back(other);
      queue.push_back(other);
      tree_found.push_back(e);
    }
  }
  if (static_cast<int>(bfs_order.size()) != nv)
    throw GaugeError(tree ? "supplied tree does not span all vertices"
                          : "graph not connected from root");
  g.tree_edges = tree_found;
  std::sort(g.tree_edges.begin(), g.tree_edges.end());

  if (order) {
    if (static_cast<int>(order->size()) != nv) throw GaugeError("order must list every vertex");
    std::vector<char> used(nv, 0);
    for (int v : *order) {
      if (v < 0 || v >= nv || used[v]) throw GaugeError("order is not a permutation");
      used[v] = 1;
    }
    if ((*order)[0] != root) throw GaugeError("order must start at the root");
    g.order = *order;
  } else {
    g.order = bfs_order;
  }
  g.row_of.assign(nv, 0);
  for (int r = 0; r < nv; ++r) g.row_of[g.order[r]] = r;

  g.loop_vectors.assign(ne, std::vector<int>(m.dim, 0));
  for (int e = 0; e < ne; ++e) {
    const Edge& ed = m.edges[e];
    for (int d = 0; d < m.dim; ++d)
      g.loop_vectors[e][d] =
          g.tree_offset[ed.from][d] + ed.translation[d] - g.tree_offset[ed.to][d];
  }
  return g;
}

// Tree path root -> v as a list of (edge index, +1 forward / -1 reversed).
inline std::vector<std::pair<int, int>> tree_path(const QuotientGraphModel& m,
                                                  const GaugeChoice& g, int v) {
  std::vector<std::pair<int, int>> path;
  int cur = v;
  while (cur != g.root) {
    int e = g.parent_edge[cur];
    const Edge& ed = m.edges[e];
    if (ed.to == cur) { path.emplace_back(e, +1); cur = ed.from; }
    else { path.emplace_back(e, -1); cur = ed.to; }
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Random spanning tree + random order, for gauge-invariance sweeps.
inline GaugeChoice random_gauge(const QuotientGraphModel& m, std::mt19937_64& rng) {
  const int nv = m.vertex_count();
  const int ne = m.edge_count();
  std::vector<int> eidx(ne);
  std::iota(eidx.begin(), eidx.end(), 0);
  std::shuffle(eidx.begin(), eidx.end(), rng);
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) { parent[x] = parent[parent[x]]; x = parent[x]; }
    return x;
  };
  std::vector<int> tree;
  for (int e : eidx) {
    int a = find(m.edges[e].from), b = find(m.edges[e].to);
    if (a != b) { parent[a] = b; tree.push_back(e); }
  }
  int root = static_cast<int>(rng() % nv);
  std::vector<int> order(nv);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto it = std::find(order.begin(), order.end(), root);
  std::iter_swap(order.begin(), it);
  return make_gauge(m, root, tree, order);
}

}  // namespace wirenet
