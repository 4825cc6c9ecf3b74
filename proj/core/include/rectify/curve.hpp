#pragma once

#include "rectify/geometry.hpp"

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rect {

// Generations V_0, V_1, ... of a vertex hierarchy. Generation k has
// separation scale delta^k r0.
struct NetHierarchy {
  double r0 = 1.0;
  double delta = 0.5;
  double cstar = 2.0;
  std::vector<PointSet> generations;

  int k_last() const { return static_cast<int>(generations.size()) - 1; }
  const PointSet& V(int k) const { return generations.at(static_cast<std::size_t>(k)); }
  std::size_t count(int k) const { return static_cast<std::size_t>(V(k).cols()); }
  double scale(int k) const;  // delta^k r0
  Eigen::Index dim() const { return generations.empty() ? 0 : generations.front().rows(); }
};

struct HierarchyViolation {
  std::string kind;  // V1, V2, V3, ball
  int k = 0;
  std::size_t a = 0, b = 0;
  double value = 0.0;
};

// Exhaustive (V1)-(V3) checks plus containment in B(x0, C* r0), x0 the first
// vertex of V_0. (V2) is not checked on the last generation.
std::vector<HierarchyViolation> validate_hierarchy(const NetHierarchy& h);

// Smallest C with |succ - v| < C delta^k r0 and |pred - v| < C delta^k r0 for
// every vertex, rounded up to one decimal, strictly above that ratio and > 1.
double fit_cstar(const std::vector<PointSet>& generations, double r0, double delta);

// Nested maximal delta^k r0 nets of the points for k = 0..k_max, read off one
// farthest-point traversal. r0 <= 0 selects diam(points).
NetHierarchy hierarchy_from_points(const PointSet& points, double delta, int k_max,
                                   double r0 = 0.0, double cstar = 0.0);

struct VertexAnnotation {
  Line line;
  double alpha = 0.0;
  bool flat = true;  // alpha < epsilon
  std::size_t window_size = 0;
};
using Annotations = std::vector<std::vector<VertexAnnotation>>;  // [k][v]

inline constexpr double kDefaultEpsilon = 1.0 / 33.0;

// Line fitted (unweighted) to the distinct points of (V_{k-1} u V_k) within
// 66 C* delta^(k-2) r0 of v, alpha the sup distance over delta^k r0.
Annotations annotate(const NetHierarchy& h, double epsilon = kDefaultEpsilon, int threads = 1);

struct NodeRef {
  int gen = 0;
  std::size_t idx = 0;
  bool operator==(const NodeRef& o) const { return gen == o.gen && idx == o.idx; }
  bool operator<(const NodeRef& o) const { return gen != o.gen ? gen < o.gen : idx < o.idx; }
};

// B[k, a, b]: the segment [a, b] plus nearest-successor chains from each
// endpoint through every later generation. Chains list global node ids,
// starting with the endpoint itself.
struct Bridge {
  int k = 0;
  bool flat = false;  // added by a flat vertex (B^F) or a non-flat one (B^N)
  NodeRef a, b;
  std::size_t node_a = 0, node_b = 0;
  std::vector<NodeRef> chain_a, chain_b;
  std::vector<std::size_t> chain_nodes_a, chain_nodes_b;
  double segment_length = 0.0;
  double extension_a = 0.0, extension_b = 0.0;
  // F-T2 bridges only: |w_r - w_{r+1}| of the coarser edge it replaces.
  double parent_edge = -1.0;
  double length() const { return segment_length + extension_a + extension_b; }
};

using Edge = std::pair<std::size_t, std::size_t>;  // global node ids, first < second

// Vertices and edges spanning Gamma_k: the union of E(k), all bridges frozen
// up to k (with their chains), and isolated vertices.
struct GammaGraph {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> paths;  // bridges as node paths
};

struct Connectivity {
  bool connected = true;
  std::vector<std::vector<std::size_t>> components;  // over the queried vertices
};
Connectivity connectedness(const GammaGraph& g, const std::vector<std::size_t>& vertices);

struct PhantomEntry {
  int gen = 0;
  std::size_t idx = 0;
  bool operator<(const PhantomEntry& o) const { return gen != o.gen ? gen < o.gen : idx < o.idx; }
  bool operator==(const PhantomEntry& o) const { return gen == o.gen && idx == o.idx; }
};

struct GenerationRecord {
  int k = 0;
  std::vector<Edge> edges;                 // E(k)
  std::vector<std::size_t> bridges_flat;   // new in B^F(k), indices into CurveState::bridges
  std::vector<std::size_t> bridges_nonflat;
  std::set<PhantomEntry> phantom;
  std::size_t flat_vertices = 0, nonflat_vertices = 0;
  std::size_t sides_nt = 0, sides_t1 = 0, sides_t2 = 0;
  std::size_t semi_flat = 0, s_edges = 0, links = 0;
  std::vector<std::size_t> terminal;  // flat vertices of V_k terminal on some side
  std::vector<std::string> warnings;
};

struct CurveState {
  NetHierarchy hierarchy;
  double epsilon = kDefaultEpsilon;
  int k0 = 0;
  int k_max = 0;
  bool singleton = false;
  PointSet nodes;                                 // distinct vertex positions
  std::vector<std::vector<std::size_t>> node_of;  // [k][v] -> node id
  std::vector<Bridge> bridges;
  std::vector<GenerationRecord> records;          // [k - k0]
  Annotations annotations;

  const GenerationRecord& record(int k) const { return records.at(static_cast<std::size_t>(k - k0)); }
  // Gamma_k as a graph over node ids.
  GammaGraph gamma(int k) const;
  std::vector<std::size_t> vertices(int k) const;
};

// p_{j,u} = 3 C* delta^(j-1) r0.
double phantom_value(const CurveState& s, const PhantomEntry& e);

// Builds Gamma_{k0}, ..., Gamma_{k_max} generation by generation. k_max < 0
// means the last generation. Throws std::invalid_argument when the
// annotations do not match the hierarchy.
CurveState construct(const NetHierarchy& h, const Annotations& ann, double epsilon = kDefaultEpsilon,
                     int k_max = -1);

struct LengthRow {
  int k = 0;
  double edge_length = 0.0;
  double bridge_length = 0.0;  // bridges new at generation k
  double phantom_length = 0.0;
  double alpha_sum = 0.0;      // sum over V_k of alpha^2 delta^k r0
  std::size_t bridge_count = 0;
  // F-T2 bridges: (H1(B) + phantom of B - |w_r - w_{r+1}|) / H1(core), the
  // implied constant in front of the core length. Max over the generation.
  double core_factor = 0.0;
};

struct LengthLedger {
  std::vector<LengthRow> rows;
  double length = 0.0;       // H1(Gamma): E(k_max) plus every bridge
  double edge_length = 0.0;
  double bridge_length = 0.0;
  double alpha_sum = 0.0;    // sum over all k >= 1
  double bound = 0.0;        // r0 + alpha_sum
  double ratio = 0.0;        // length / bound
  double max_core_factor = 0.0;
  bool core_factor_within_25_27 = true;
  bool core_factor_within_23_27 = true;
  std::size_t bridges_over_32_30 = 0;      // H1(B) > 32/30 |a - b| + slack
  std::size_t extensions_over_bound = 0;   // chain length > 2 C* delta^gen r0
  double truncation_error = 0.0;           // 2 C* delta^k_max r0 per extension
};
LengthLedger length_accounting(const CurveState& s);

struct CurveChecks {
  std::vector<int> disconnected_generations;
  std::size_t edges_too_long = 0;        // |a - b| >= 30 C* delta^(k-1) r0 outside the base case
  std::size_t bridges_out_of_range = 0;  // outside [30 C* delta^(k-1), 66 C* delta^(k-2)] r0
  std::size_t bridge_freeze_violations = 0;
  std::size_t core_overlaps = 0;
  std::size_t terminal_violations = 0;
  std::size_t phantom_invalid = 0;  // entries naming no vertex
  double max_leaf_distance = 0.0;  // max over vertices of V_k0..V_kmax of dist(v, Gamma)
  double max_undrawn_distance = 0.0;  // same over generations before k0
  double leaf_tolerance = 0.0;     // 2 delta^k_max r0
  double max_hausdorff_ratio = 0.0;  // max_k HD(V_k, V_kmax) / (C* delta^k r0)
  bool ok() const;
};
CurveChecks check_curve(const CurveState& s);

// Distance from p to the point set of Gamma_{k_max}.
double distance_to_gamma(const CurveState& s, const PointRef& p);

}  // namespace rect
