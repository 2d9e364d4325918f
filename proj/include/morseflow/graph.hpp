#pragma once

// Max-min graph: bipartite graph on minima and maxima, with an edge for
// each principal-flow-line terminal. Edges are stored simple; the sign
// annotation records which of the two lines produced them.

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "morseflow/critical.hpp"
#include "morseflow/flow.hpp"

namespace morseflow {

struct MaxMinGraph {
  struct Node {
    int id;
    VecN location;
    double value;
  };
  struct Edge {
    int max_id;
    int min_id;
    bool plus = false;   // produced by the + line
    bool minus = false;  // produced by the - line
  };

  std::vector<Node> minima;  // ascending id
  std::vector<Node> maxima;  // ascending id
  std::vector<Edge> edges;   // sorted by (max_id, min_id)

  int degree_of_max(int max_id) const {
    int d = 0;
    for (const Edge& e : edges)
      if (e.max_id == max_id) ++d;
    return d;
  }

  int degree_of_min(int min_id) const {
    int d = 0;
    for (const Edge& e : edges)
      if (e.min_id == min_id) ++d;
    return d;
  }

  // Abstract max-min graph conditions; checked on every build.
  void assert_abstract() const {
    if (minima.empty()) fail(Errc::structure_violation, "|V0| >= 1 violated");
    if (maxima.empty()) fail(Errc::structure_violation, "|V1| >= 1 violated");
    for (const Node& p : maxima) {
      int d = degree_of_max(p.id);
      if (d < 1 || d > 2)
        fail(Errc::structure_violation,
             "degree of maximum " + std::to_string(p.id) + " is " + std::to_string(d) +
                 ", outside [1, 2]");
    }
    for (const Edge& e : edges) {
      bool pmax = std::any_of(maxima.begin(), maxima.end(),
                              [&](const Node& n) { return n.id == e.max_id; });
      bool pmin = std::any_of(minima.begin(), minima.end(),
                              [&](const Node& n) { return n.id == e.min_id; });
      if (!pmax || !pmin) fail(Errc::structure_violation, "edge does not join V1 to V0");
    }
  }
};

inline MaxMinGraph build_maxmin(const CriticalSet& critset,
                                const std::vector<PrincipalFlowLine>& lines) {
  MaxMinGraph g;
  for (int id : critset.minima) {
    const CriticalPoint& p = critset.points[static_cast<size_t>(id)];
    g.minima.push_back({p.id, p.location, p.value});
  }
  for (int id : critset.maxima) {
    const CriticalPoint& p = critset.points[static_cast<size_t>(id)];
    g.maxima.push_back({p.id, p.location, p.value});
  }

  std::string offenders;
  for (const PrincipalFlowLine& l : lines) {
    if (l.outcome != PrincipalFlowLine::Outcome::minimum)
      offenders += (offenders.empty() ? "" : ", ") + std::to_string(l.maximum_id);
  }
  if (!offenders.empty())
    fail(Errc::non_simple_input, "principal lines of maxima {" + offenders +
                                     "} do not terminate at minima");

  for (int id : critset.maxima) {
    int seen = 0;
    for (const PrincipalFlowLine& l : lines)
      if (l.maximum_id == id) ++seen;
    if (seen != 2)
      fail(Errc::non_simple_input,
           "maximum " + std::to_string(id) + " does not have both signed lines traced");
  }

  for (const PrincipalFlowLine& l : lines) {
    auto it = std::find_if(g.edges.begin(), g.edges.end(), [&](const MaxMinGraph::Edge& e) {
      return e.max_id == l.maximum_id && e.min_id == l.terminal_id;
    });
    if (it == g.edges.end()) {
      g.edges.push_back({l.maximum_id, l.terminal_id, l.sign > 0, l.sign < 0});
    } else {
      if (l.sign > 0) it->plus = true;
      else it->minus = true;
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const MaxMinGraph::Edge& a, const MaxMinGraph::Edge& b) {
    return a.max_id != b.max_id ? a.max_id < b.max_id : a.min_id < b.min_id;
  });
  g.assert_abstract();
  return g;
}

enum class Dim1Topology { rank0, rank1 };

struct Dim1Report {
  bool pass = false;
  std::string detail;
};

namespace detail {

inline bool has_edge(const MaxMinGraph& g, int max_id, int min_id) {
  return std::any_of(g.edges.begin(), g.edges.end(), [&](const MaxMinGraph::Edge& e) {
    return e.max_id == max_id && e.min_id == min_id;
  });
}

}  // namespace detail

// Structure theorem for one-dimensional landscapes. rank0 (interval):
// |V0| = |V1|+1 with the path ordering; rank1 (circle): |V0| = |V1| with
// the cyclic ordering and every degree equal to 2.
inline Dim1Report validate_dim1(const MaxMinGraph& g, Dim1Topology topology) {
  g.assert_abstract();
  for (const MaxMinGraph::Node& n : g.minima)
    if (n.location.n != 1) fail(Errc::precondition, "validate_dim1 requires a 1-D landscape");

  auto by_coord = [](const MaxMinGraph::Node& a, const MaxMinGraph::Node& b) {
    return a.location[0] < b.location[0];
  };
  std::vector<MaxMinGraph::Node> mins = g.minima, maxs = g.maxima;
  std::sort(mins.begin(), mins.end(), by_coord);
  std::sort(maxs.begin(), maxs.end(), by_coord);
  const size_t k = maxs.size();

  if (topology == Dim1Topology::rank0) {
    if (mins.size() != k + 1)
      fail(Errc::structure_violation, "|V0| = |V1| + 1 violated: " + std::to_string(mins.size()) +
                                          " minima, " + std::to_string(k) + " maxima");
    // alternation along the interval: m1 < p1 < m2 < ... < p_k < m_{k+1}
    for (size_t i = 0; i < k; ++i) {
      if (!(mins[i].location[0] < maxs[i].location[0] &&
            maxs[i].location[0] < mins[i + 1].location[0]))
        fail(Errc::structure_violation, "critical points do not alternate along the interval");
    }
    size_t expected_edges = 0;
    for (size_t i = 0; i < k; ++i) {
      if (!detail::has_edge(g, maxs[i].id, mins[i].id) ||
          !detail::has_edge(g, maxs[i].id, mins[i + 1].id))
        fail(Errc::structure_violation,
             "maximum " + std::to_string(maxs[i].id) + " is not joined to its neighbors");
      expected_edges += 2;
    }
    if (g.edges.size() != expected_edges)
      fail(Errc::structure_violation, "unexpected extra edges for the path ordering");
    return {true, "rank0 path structure with " + std::to_string(k) + " maxima"};
  }

  // rank1
  if (mins.size() != k)
    fail(Errc::structure_violation, "|V0| = |V1| violated: " + std::to_string(mins.size()) +
                                        " minima, " + std::to_string(k) + " maxima");
  std::vector<std::pair<double, std::pair<bool, int>>> ring;  // coord, (is_max, id)
  for (const MaxMinGraph::Node& n : mins) ring.push_back({n.location[0], {false, n.id}});
  for (const MaxMinGraph::Node& n : maxs) ring.push_back({n.location[0], {true, n.id}});
  std::sort(ring.begin(), ring.end());
  for (size_t i = 0; i < ring.size(); ++i) {
    if (ring[i].second.first == ring[(i + 1) % ring.size()].second.first)
      fail(Errc::structure_violation, "critical points do not alternate around the circle");
  }
  // expected edges: every maximum joined to its two cyclic neighbor minima
  // (a single collapsed edge when k = 1)
  std::vector<std::pair<int, int>> expected;
  for (size_t i = 0; i < ring.size(); ++i) {
    if (!ring[i].second.first) continue;
    int p = ring[i].second.second;
    int m_prev = ring[(i + ring.size() - 1) % ring.size()].second.second;
    int m_next = ring[(i + 1) % ring.size()].second.second;
    for (int m : {m_prev, m_next}) {
      std::pair<int, int> e{p, m};
      if (std::find(expected.begin(), expected.end(), e) == expected.end()) expected.push_back(e);
    }
  }
  for (const auto& [p, m] : expected)
    if (!detail::has_edge(g, p, m))
      fail(Errc::structure_violation,
           "maximum " + std::to_string(p) + " is not joined to its cyclic neighbors");
  if (g.edges.size() != expected.size())
    fail(Errc::structure_violation, "unexpected extra edges for the cyclic ordering");
  if (k >= 2) {
    for (const MaxMinGraph::Node& n : g.maxima)
      if (g.degree_of_max(n.id) != 2)
        fail(Errc::structure_violation,
             "maximum " + std::to_string(n.id) + " does not have degree 2");
    for (const MaxMinGraph::Node& n : g.minima)
      if (g.degree_of_min(n.id) != 2)
        fail(Errc::structure_violation,
             "minimum " + std::to_string(n.id) + " does not have degree 2");
  }
  return {true, "rank1 cyclic structure with " + std::to_string(k) + " maxima"};
}

inline std::string edge_signs(const MaxMinGraph::Edge& e) {
  std::string s;
  if (e.plus) s += "+";
  if (e.minus) s += "-";
  return s;
}

// Graphviz output: maxima as triangles, minima as circles, deterministic
// ordering by id.
inline std::string export_dot(const MaxMinGraph& g) {
  std::string out = "graph maxmin {\n";
  out += "  node [shape=circle];\n";
  for (const MaxMinGraph::Node& n : g.minima)
    out += "  m" + std::to_string(n.id) + " [label=\"m" + std::to_string(n.id) + "\"];\n";
  out += "  node [shape=triangle];\n";
  for (const MaxMinGraph::Node& n : g.maxima)
    out += "  p" + std::to_string(n.id) + " [label=\"p" + std::to_string(n.id) + "\"];\n";
  for (const MaxMinGraph::Edge& e : g.edges)
    out += "  p" + std::to_string(e.max_id) + " -- m" + std::to_string(e.min_id) +
           " [label=\"" + edge_signs(e) + "\"];\n";
  out += "}\n";
  return out;
}

inline nlohmann::json export_json(const MaxMinGraph& g) {
  nlohmann::json j;
  j["minima"] = nlohmann::json::array();
  for (const MaxMinGraph::Node& n : g.minima) j["minima"].push_back(n.id);
  j["maxima"] = nlohmann::json::array();
  for (const MaxMinGraph::Node& n : g.maxima) j["maxima"].push_back(n.id);
  j["edges"] = nlohmann::json::array();
  for (const MaxMinGraph::Edge& e : g.edges) {
    nlohmann::json je;
    je["max"] = e.max_id;
    je["min"] = e.min_id;
    je["signs"] = nlohmann::json::array();
    if (e.plus) je["signs"].push_back("+");
    if (e.minus) je["signs"].push_back("-");
    j["edges"].push_back(je);
  }
  return j;
}

}  // namespace morseflow
