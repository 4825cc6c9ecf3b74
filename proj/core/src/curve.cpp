#include "rectify/curve.hpp"

#include "rectify/beta.hpp"
#include "rectify/nets.hpp"
#include "rectify/parallel.hpp"
#include "rectify/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace rect {

namespace {

constexpr double kCoincide = 1e-12;

Eigen::Index col(std::size_t i) { return static_cast<Eigen::Index>(i); }

Edge make_edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<std::unique_ptr<BallIndex>> build_indexes(const NetHierarchy& h) {
  std::vector<std::unique_ptr<BallIndex>> out;
  for (const auto& g : h.generations) out.push_back(std::make_unique<BallIndex>(g));
  return out;
}

}  // namespace

double NetHierarchy::scale(int k) const { return std::pow(delta, k) * r0; }

std::vector<HierarchyViolation> validate_hierarchy(const NetHierarchy& h) {
  std::vector<HierarchyViolation> out;
  if (h.generations.empty()) return out;
  const auto idx = build_indexes(h);
  const Point x0 = h.V(0).col(0);
  for (int k = 0; k <= h.k_last(); ++k) {
    const PointSet& V = h.V(k);
    const double sep = h.scale(k);
    const double reach = h.cstar * h.scale(k);
    for (std::size_t a = 0; a < h.count(k); ++a) {
      const auto p = V.col(col(a));
      for (auto b : idx[static_cast<std::size_t>(k)]->query(p, sep)) {
        if (b <= a) continue;
        const double d = (V.col(col(b)) - p).norm();
        if (d < sep - kBallTol) out.push_back({"V1", k, a, b, d});
      }
      if (k < h.k_last()) {
        const auto s = idx[static_cast<std::size_t>(k + 1)]->nearest(p);
        const double d = (h.V(k + 1).col(col(s)) - p).norm();
        if (!(d < reach)) out.push_back({"V2", k, a, s, d});
      }
      if (k > 0) {
        const auto s = idx[static_cast<std::size_t>(k - 1)]->nearest(p);
        const double d = (h.V(k - 1).col(col(s)) - p).norm();
        if (!(d < reach)) out.push_back({"V3", k, a, s, d});
      }
      const double d0 = (p - x0).norm();
      if (d0 > h.cstar * h.r0 + kBallTol) out.push_back({"ball", k, a, 0, d0});
    }
  }
  return out;
}

double fit_cstar(const std::vector<PointSet>& generations, double r0, double delta) {
  double worst = 0.0;
  for (std::size_t k = 0; k < generations.size(); ++k) {
    const double s = std::pow(delta, static_cast<double>(k)) * r0;
    for (std::size_t nb : {k + 1, k - 1}) {
      if (nb >= generations.size()) continue;  // also catches k - 1 underflow
      const BallIndex idx(generations[nb]);
      for (Eigen::Index a = 0; a < generations[k].cols(); ++a) {
        const auto p = generations[k].col(a);
        const auto j = idx.nearest(p);
        worst = std::max(worst, (generations[nb].col(col(j)) - p).norm() / s);
      }
    }
  }
  const double c = std::floor(worst * 10.0 + 1e-9) / 10.0 + 0.1;
  return std::max(c, 1.1);
}

NetHierarchy hierarchy_from_points(const PointSet& points, double delta, int k_max, double r0,
                                   double cstar) {
  if (points.cols() == 0) throw std::invalid_argument("hierarchy_from_points: no points");
  if (!(delta > 0 && delta <= 0.5)) throw std::invalid_argument("hierarchy_from_points: delta must be in (0, 1/2]");
  if (k_max < 0) throw std::invalid_argument("hierarchy_from_points: k_max must be >= 0");
  NetHierarchy h;
  h.delta = delta;
  h.r0 = r0 > 0 ? r0 : diameter(points);
  if (!(h.r0 > 0)) h.r0 = 1.0;
  const auto tr = farthest_point_traversal(points, h.scale(k_max));
  for (int k = 0; k <= k_max; ++k) {
    const std::size_t m = std::max<std::size_t>(1, net_prefix(tr, h.scale(k)));
    PointSet V(points.rows(), col(m));
    for (std::size_t i = 0; i < m; ++i) V.col(col(i)) = points.col(col(tr.order[i]));
    h.generations.push_back(std::move(V));
  }
  h.cstar = cstar > 0 ? cstar : fit_cstar(h.generations, h.r0, h.delta);
  return h;
}

Annotations annotate(const NetHierarchy& h, double epsilon, int threads) {
  if (!(epsilon > 0 && epsilon < 1.0 / 32.0)) throw std::invalid_argument("annotate: epsilon must be in (0, 1/32)");
  if (h.generations.empty()) throw std::invalid_argument("annotate: empty hierarchy");
  const auto idx = build_indexes(h);
  Annotations ann(h.generations.size());
  for (int k = 0; k <= h.k_last(); ++k) {
    const PointSet& V = h.V(k);
    const double R = 66.0 * h.cstar * h.scale(k - 2);
    auto& out = ann[static_cast<std::size_t>(k)];
    out.resize(h.count(k));
    parallel_for(h.count(k), threads, [&](std::size_t v) {
      const auto p = V.col(col(v));
      const auto cur = idx[static_cast<std::size_t>(k)]->query(p, R);
      std::vector<Point> pts;
      for (auto i : cur) pts.push_back(V.col(col(i)));
      if (k > 0) {
        const PointSet& P = h.V(k - 1);
        for (auto i : idx[static_cast<std::size_t>(k - 1)]->query(p, R)) {
          const auto q = P.col(col(i));
          const auto n = idx[static_cast<std::size_t>(k)]->nearest(q);
          if ((V.col(col(n)) - q).norm() > kCoincide) pts.push_back(q);
        }
      }
      PointSet W(h.dim(), col(pts.size()));
      for (std::size_t i = 0; i < pts.size(); ++i) W.col(col(i)) = pts[i];
      std::vector<std::size_t> all(pts.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      VertexAnnotation a;
      a.line = fit_line(W, all);
      double sup = 0.0;
      for (Eigen::Index i = 0; i < W.cols(); ++i) sup = std::max(sup, dist_point_line(W.col(i), a.line));
      a.alpha = sup / h.scale(k);
      a.flat = a.alpha < epsilon;
      a.window_size = pts.size();
      out[v] = std::move(a);
    });
  }
  return ann;
}

Connectivity connectedness(const GammaGraph& g, const std::vector<std::size_t>& vertices) {
  UnionFind uf(g.node_count);
  for (const auto& [a, b] : g.edges) uf.unite(a, b);
  for (const auto& p : g.paths)
    for (std::size_t i = 1; i < p.size(); ++i) uf.unite(p[i - 1], p[i]);
  Connectivity c;
  std::map<std::size_t, std::size_t> slot;
  for (auto v : vertices) {
    const auto r = uf.find(v);
    auto it = slot.find(r);
    if (it == slot.end()) {
      slot.emplace(r, c.components.size());
      c.components.push_back({v});
    } else {
      c.components[it->second].push_back(v);
    }
  }
  c.connected = c.components.size() <= 1;
  return c;
}

GammaGraph CurveState::gamma(int k) const {
  GammaGraph g;
  g.node_count = static_cast<std::size_t>(nodes.cols());
  if (singleton || k < k0) return g;
  g.edges = record(k).edges;
  for (const auto& b : bridges) {
    if (b.k > k) continue;
    std::vector<std::size_t> path(b.chain_nodes_a.rbegin(), b.chain_nodes_a.rend());
    path.insert(path.end(), b.chain_nodes_b.begin(), b.chain_nodes_b.end());
    g.paths.push_back(std::move(path));
  }
  return g;
}

std::vector<std::size_t> CurveState::vertices(int k) const {
  std::vector<std::size_t> v = node_of.at(static_cast<std::size_t>(k));
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

double phantom_value(const CurveState& s, const PhantomEntry& e) {
  return 3.0 * s.hierarchy.cstar * s.hierarchy.scale(e.gen - 1);
}

namespace {

// Sequential construction state for one run.
class Builder {
 public:
  Builder(const NetHierarchy& h, const Annotations& ann, double eps, int k_max, CurveState& out)
      : h_(h), ann_(ann), eps_(eps), k_max_(k_max), s_(out), idx_(build_indexes(h)) {}

  void run();

 private:
  double C() const { return h_.cstar; }
  double sc(int k) const { return h_.scale(k); }
  auto pos(int k, std::size_t v) const { return h_.V(k).col(col(v)); }
  std::size_t node(int k, std::size_t v) const { return s_.node_of[static_cast<std::size_t>(k)][v]; }
  auto node_pos(std::size_t n) const { return s_.nodes.col(col(n)); }
  double node_dist(std::size_t a, std::size_t b) const { return (node_pos(a) - node_pos(b)).norm(); }

  void assign_nodes();
  std::vector<std::size_t> ordered_window(int k, const PointRef& c, double R, const Line& l) const;
  std::size_t add_bridge(int k, bool flat, NodeRef a, NodeRef b);
  void add_bridge_phantom(std::size_t bi, std::set<PhantomEntry>& ph) const;
  void base_case();
  void generation(int k);

  const NetHierarchy& h_;
  const Annotations& ann_;
  double eps_;
  int k_max_;
  CurveState& s_;
  std::vector<std::unique_ptr<BallIndex>> idx_;
  std::map<Edge, std::size_t> bridge_of_;
  std::vector<NodeRef> ref_of_node_;  // finest generation carrying each node
};

void Builder::assign_nodes() {
  const int last = k_max_;
  s_.node_of.assign(static_cast<std::size_t>(last + 1), {});
  std::vector<Point> pts;
  for (int k = last; k >= 0; --k) {
    auto& ids = s_.node_of[static_cast<std::size_t>(k)];
    ids.resize(h_.count(k));
    for (std::size_t v = 0; v < h_.count(k); ++v) {
      if (k < last) {
        const auto n = idx_[static_cast<std::size_t>(k + 1)]->nearest(pos(k, v));
        if ((pos(k + 1, n) - pos(k, v)).norm() <= kCoincide) {
          ids[v] = node(k + 1, n);
          continue;
        }
      }
      ids[v] = pts.size();
      pts.push_back(pos(k, v));
      ref_of_node_.push_back({k, v});
    }
  }
  s_.nodes.resize(h_.dim(), col(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) s_.nodes.col(col(i)) = pts[i];
}

std::vector<std::size_t> Builder::ordered_window(int k, const PointRef& c, double R, const Line& l) const {
  return order_by_projection(h_.V(k), idx_[static_cast<std::size_t>(k)]->query(c, R), l);
}

std::size_t Builder::add_bridge(int k, bool flat, NodeRef a, NodeRef b) {
  const auto na = node(a.gen, a.idx), nb = node(b.gen, b.idx);
  const Edge key = make_edge(na, nb);
  if (auto it = bridge_of_.find(key); it != bridge_of_.end()) return it->second;
  Bridge br;
  br.k = k;
  br.flat = flat;
  br.a = a;
  br.b = b;
  br.node_a = na;
  br.node_b = nb;
  br.segment_length = node_dist(na, nb);
  auto chain = [&](NodeRef start, std::vector<NodeRef>& refs, std::vector<std::size_t>& ids, double& len) {
    refs.push_back(start);
    ids.push_back(node(start.gen, start.idx));
    NodeRef cur = start;
    for (int g = start.gen + 1; g <= k_max_; ++g) {
      const auto nx = idx_[static_cast<std::size_t>(g)]->nearest(pos(cur.gen, cur.idx));
      len += (pos(g, nx) - pos(cur.gen, cur.idx)).norm();
      cur = {g, nx};
      refs.push_back(cur);
      ids.push_back(node(g, nx));
    }
  };
  chain(a, br.chain_a, br.chain_nodes_a, br.extension_a);
  chain(b, br.chain_b, br.chain_nodes_b, br.extension_b);
  s_.bridges.push_back(std::move(br));
  bridge_of_.emplace(key, s_.bridges.size() - 1);
  auto& rec = s_.records.back();
  (flat ? rec.bridges_flat : rec.bridges_nonflat).push_back(s_.bridges.size() - 1);
  return s_.bridges.size() - 1;
}

void Builder::add_bridge_phantom(std::size_t bi, std::set<PhantomEntry>& ph) const {
  const auto& b = s_.bridges[bi];
  for (const auto& r : b.chain_a) ph.insert({r.gen, r.idx});
  for (const auto& r : b.chain_b) ph.insert({r.gen, r.idx});
}

void Builder::base_case() {
  const int k = s_.k0;
  GenerationRecord rec;
  rec.k = k;
  std::vector<std::size_t> order(h_.count(k));
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& A = ann_[static_cast<std::size_t>(k)];
  std::optional<Line> line;
  for (std::size_t v = 0; v < A.size() && !line; ++v)
    if (A[v].flat) line = A[v].line;
  if (!line && k + 1 <= k_max_) {
    const auto& An = ann_[static_cast<std::size_t>(k + 1)];
    for (std::size_t v = 0; v < A.size() && !line; ++v) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (auto y : idx_[static_cast<std::size_t>(k + 1)]->query(pos(k, v), 32.0 * C() * sc(k))) {
        if (An[y].alpha > eps_) continue;
        const double d = (pos(k + 1, y) - pos(k, v)).norm();
        if (d < bd) {
          bd = d;
          best = y;
        }
      }
      if (std::isfinite(bd)) line = An[best].line;
    }
  }
  if (line) order = order_by_projection(h_.V(k), *line);
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const auto a = node(k, order[i]), b = node(k, order[i + 1]);
    if (a != b) rec.edges.push_back(make_edge(a, b));
  }
  std::sort(rec.edges.begin(), rec.edges.end());
  rec.edges.erase(std::unique(rec.edges.begin(), rec.edges.end()), rec.edges.end());
  for (std::size_t v = 0; v < h_.count(k); ++v) {
    rec.phantom.insert({k, v});
    (A[v].flat ? rec.flat_vertices : rec.nonflat_vertices)++;
  }
  s_.records.push_back(std::move(rec));
}

void Builder::generation(int k) {
  s_.records.push_back({});
  auto& rec = s_.records.back();
  rec.k = k;
  const auto& prev = s_.records[s_.records.size() - 2];
  for (const auto& e : prev.phantom)
    if (e.gen != k - 1 && e.gen != k) rec.phantom.insert(e);

  const auto& A = ann_[static_cast<std::size_t>(k)];
  const auto& Ap = ann_[static_cast<std::size_t>(k - 1)];
  const PointSet& V = h_.V(k);
  const PointSet& P = h_.V(k - 1);
  const BallIndex& Vi = *idx_[static_cast<std::size_t>(k)];
  const BallIndex& Pi = *idx_[static_cast<std::size_t>(k - 1)];
  const double edge_max = 30.0 * C() * sc(k - 1);
  const double wide = 66.0 * C() * sc(k - 2);
  const double mid = 33.0 * C() * sc(k - 2);

  std::set<Edge> flat_edges;
  std::vector<Edge> flat_bridge_pairs;

  // Case F.
  for (std::size_t v = 0; v < h_.count(k); ++v) {
    if (!A[v].flat) {
      rec.nonflat_vertices++;
      continue;
    }
    rec.flat_vertices++;
    const Line& l = A[v].line;
    const auto W = ordered_window(k, V.col(col(v)), wide, l);
    const auto at = static_cast<std::ptrdiff_t>(std::find(W.begin(), W.end(), v) - W.begin());
    bool terminal = false;
    for (int side : {+1, -1}) {
      std::ptrdiff_t i = at;
      std::size_t t = 0;
      while (true) {
        const std::ptrdiff_t j = i + side;
        if (j < 0 || j >= static_cast<std::ptrdiff_t>(W.size())) break;
        const auto a = W[static_cast<std::size_t>(i)], b = W[static_cast<std::size_t>(j)];
        if ((V.col(col(b)) - V.col(col(a))).norm() >= edge_max) break;
        if ((V.col(col(b)) - V.col(col(v))).norm() > edge_max + kBallTol) break;
        flat_edges.insert(make_edge(node(k, a), node(k, b)));
        ++t;
        i = j;
      }
      if (t > 0) {
        rec.sides_nt++;
        continue;
      }
      terminal = true;
      const auto wv = Pi.nearest(V.col(col(v)));
      const auto Wp = ordered_window(k - 1, V.col(col(v)), mid, l);
      auto it = std::find(Wp.begin(), Wp.end(), wv);
      std::vector<std::size_t> walk;
      if (it == Wp.end()) {
        walk.push_back(wv);
      } else if (side > 0) {
        walk.assign(it, Wp.end());
      } else {
        walk.assign(std::make_reverse_iterator(it + 1), Wp.rend());
      }
      std::size_t r = 0;
      for (std::size_t q = 0; q < walk.size(); ++q)
        if ((P.col(col(walk[q])) - V.col(col(v))).norm() <= C() * sc(k - 2) + kBallTol) r = q;
      const bool t1 = r + 1 >= walk.size() ||
                      (P.col(col(walk[r])) - P.col(col(walk[r + 1]))).norm() >= 30.0 * C() * sc(k - 2);
      const std::ptrdiff_t j = at + side;
      const bool has_v1 = j >= 0 && j < static_cast<std::ptrdiff_t>(W.size());
      if (t1 || !has_v1) {
        if (!t1) rec.warnings.push_back("F-T2 without a neighbour on the line at k=" + std::to_string(k) +
                                        " v=" + std::to_string(v) + "; treated as F-T1");
        rec.sides_t1++;
        rec.phantom.insert({k, v});
        continue;
      }
      rec.sides_t2++;
      const auto v1 = W[static_cast<std::size_t>(j)];
      const std::size_t before = s_.bridges.size();
      const auto bi = add_bridge(k, true, {k, v}, {k, v1});
      if (s_.bridges.size() > before)
        s_.bridges[bi].parent_edge = (P.col(col(walk[r])) - P.col(col(walk[r + 1]))).norm();
      flat_bridge_pairs.push_back(make_edge(node(k, v), node(k, v1)));
      rec.phantom.insert({k, v});
      add_bridge_phantom(bi, rec.phantom);
    }
    if (terminal) rec.terminal.push_back(v);
  }

  // Semi-flat edges S_k between vertices of V_{k-1}.
  std::set<Edge> s_edges;
  for (std::size_t y = 0; y < h_.count(k - 1); ++y) {
    if (Ap[y].alpha < eps_) continue;
    std::size_t partner = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (auto v : Vi.query(P.col(col(y)), 32.0 * C() * sc(k - 1))) {
      if (A[v].alpha > eps_) continue;
      const double d = (V.col(col(v)) - P.col(col(y))).norm();
      if (d < bd) {
        bd = d;
        partner = v;
      }
    }
    if (!std::isfinite(bd)) continue;
    rec.semi_flat++;
    const auto Wy = ordered_window(k - 1, P.col(col(y)), mid, A[partner].line);
    const auto at = static_cast<std::ptrdiff_t>(std::find(Wy.begin(), Wy.end(), y) - Wy.begin());
    for (int side : {+1, -1}) {
      for (std::ptrdiff_t i = at;; i += side) {
        const std::ptrdiff_t j = i + side;
        if (j < 0 || j >= static_cast<std::ptrdiff_t>(Wy.size())) break;
        const auto a = Wy[static_cast<std::size_t>(i)], b = Wy[static_cast<std::size_t>(j)];
        if ((P.col(col(a)) - P.col(col(b))).norm() >= 30.0 * C() * sc(k - 2)) break;
        const auto na = node(k - 1, a), nb = node(k - 1, b);
        if (na != nb) s_edges.insert(make_edge(na, nb));
      }
    }
  }
  rec.s_edges = s_edges.size();

  // Case N.
  std::set<Edge> new_pairs;
  std::map<Edge, std::size_t> origin;  // new pair -> non-flat vertex whose window produced it
  if (rec.nonflat_vertices > 0) {
    struct Candidate {
      Edge e;
      bool is_new;  // S_k pair not already part of Gamma_k^Flat
    };
    std::vector<Candidate> cand;
    std::set<Edge> flat_pairs(flat_edges.begin(), flat_edges.end());
    flat_pairs.insert(flat_bridge_pairs.begin(), flat_bridge_pairs.end());
    for (const auto& e : flat_pairs) cand.push_back({e, false});
    for (const auto& e : s_edges)
      if (!flat_pairs.count(e)) cand.push_back({e, true});

    std::unordered_map<std::size_t, std::size_t> vk_of_node;
    for (std::size_t v = 0; v < h_.count(k); ++v) vk_of_node.emplace(node(k, v), v);

    std::vector<Edge> links;
    for (std::size_t v = 0; v < h_.count(k); ++v) {
      if (A[v].flat) continue;
      const auto c = V.col(col(v));
      auto inside = [&](std::size_t n) { return (node_pos(n) - c).norm() <= mid + kBallTol; };
      std::vector<Edge> Ev;
      for (const auto& cd : cand) {
        if (!inside(cd.e.first) && !inside(cd.e.second)) continue;
        Ev.push_back(cd.e);
        if (cd.is_new && new_pairs.insert(cd.e).second) origin.emplace(cd.e, v);
      }
      std::vector<std::size_t> verts;
      for (auto u : Vi.query(c, mid)) {
        verts.push_back(node(k, u));
        if (!A[u].flat) rec.phantom.insert({k, u});
      }
      for (const auto& e : Ev) {
        verts.push_back(e.first);
        verts.push_back(e.second);
      }
      std::sort(verts.begin(), verts.end());
      verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
      std::unordered_map<std::size_t, std::size_t> local;
      for (std::size_t i = 0; i < verts.size(); ++i) local.emplace(verts[i], i);
      UnionFind uf(verts.size());
      for (const auto& e : Ev) uf.unite(local[e.first], local[e.second]);
      std::map<std::size_t, std::vector<std::size_t>> comps;
      for (std::size_t i = 0; i < verts.size(); ++i) comps[uf.find(i)].push_back(verts[i]);
      if (comps.size() <= 1) continue;
      // Representative: the non-flat V_k vertex nearest v, else any V_k
      // vertex, else any vertex; ties by node id.
      std::vector<std::pair<double, std::size_t>> reps;
      for (const auto& [root, members] : comps) {
        std::size_t best = members.front();
        int best_rank = 3;
        double best_d = std::numeric_limits<double>::infinity();
        for (auto n : members) {
          int rank = 2;
          if (auto it = vk_of_node.find(n); it != vk_of_node.end()) rank = A[it->second].flat ? 1 : 0;
          const double d = (node_pos(n) - c).norm();
          if (rank < best_rank || (rank == best_rank && d < best_d)) {
            best_rank = rank;
            best_d = d;
            best = n;
          }
        }
        reps.emplace_back(A[v].line.param(node_pos(best)), best);
      }
      std::stable_sort(reps.begin(), reps.end());
      for (std::size_t i = 0; i + 1 < reps.size(); ++i) {
        const Edge e = make_edge(reps[i].second, reps[i + 1].second);
        links.push_back(e);
        origin.emplace(e, v);
      }
    }

    // Break cycles among the links: breadth-first spanning forest from the
    // lowest node id, neighbours visited by (length, node id).
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());
    std::map<std::size_t, std::vector<std::pair<double, std::size_t>>> adj;
    for (const auto& [a, b] : links) {
      const double d = node_dist(a, b);
      adj[a].emplace_back(d, b);
      adj[b].emplace_back(d, a);
    }
    for (auto& [n, nb] : adj) std::sort(nb.begin(), nb.end());
    std::set<std::size_t> seen;
    for (const auto& entry : adj) {
      const auto root = entry.first;
      if (seen.count(root)) continue;
      std::queue<std::size_t> q;
      q.push(root);
      seen.insert(root);
      while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        for (const auto& [d, w] : adj[u]) {
          if (seen.count(w)) continue;
          seen.insert(w);
          q.push(w);
          const Edge e = make_edge(u, w);
          if (!flat_pairs.count(e)) new_pairs.insert(e);
          rec.links++;
        }
      }
    }
  }

  std::set<Edge> edges = flat_edges;
  for (const auto& e : new_pairs) {
    if (node_dist(e.first, e.second) < edge_max) {
      edges.insert(e);
      continue;
    }
    const NodeRef a = ref_of_node_[e.first], b = ref_of_node_[e.second];
    const std::size_t before = s_.bridges.size();
    const auto bi = add_bridge(k, false, a, b);
    if (s_.bridges.size() > before) add_bridge_phantom(bi, rec.phantom);
  }
  rec.edges.assign(edges.begin(), edges.end());
}

void Builder::run() {
  assign_nodes();
  s_.k0 = k_max_;
  while (s_.k0 > 0 && h_.count(s_.k0 - 1) >= 2) --s_.k0;
  if (h_.count(k_max_) < 2) {
    s_.singleton = true;
    s_.k0 = k_max_;
    GenerationRecord rec;
    rec.k = k_max_;
    for (std::size_t v = 0; v < h_.count(k_max_); ++v) rec.phantom.insert({k_max_, v});
    s_.records.push_back(std::move(rec));
    return;
  }
  base_case();
  for (int k = s_.k0 + 1; k <= k_max_; ++k) generation(k);
}

}  // namespace

CurveState construct(const NetHierarchy& h, const Annotations& ann, double epsilon, int k_max) {
  if (h.generations.empty()) throw std::invalid_argument("construct: empty hierarchy");
  if (k_max < 0) k_max = h.k_last();
  if (k_max > h.k_last()) throw std::invalid_argument("construct: k_max beyond the last generation");
  if (ann.size() != h.generations.size())
    throw std::invalid_argument("construct: annotations do not match the hierarchy generations");
  for (int k = 0; k <= h.k_last(); ++k) {
    if (h.count(k) == 0) throw std::invalid_argument("construct: empty generation");
    if (ann[static_cast<std::size_t>(k)].size() != h.count(k))
      throw std::invalid_argument("construct: annotation count mismatch at generation " + std::to_string(k));
    for (const auto& a : ann[static_cast<std::size_t>(k)])
      if (a.flat != (a.alpha < epsilon))
        throw std::invalid_argument("construct: annotations computed with a different epsilon");
  }
  CurveState s;
  s.hierarchy = h;
  s.hierarchy.generations.resize(static_cast<std::size_t>(k_max + 1));
  s.epsilon = epsilon;
  s.k_max = k_max;
  s.annotations = Annotations(ann.begin(), ann.begin() + k_max + 1);
  Builder(h, ann, epsilon, k_max, s).run();
  return s;
}

namespace {

double bridge_phantom(const CurveState& s, const Bridge& b) {
  double p = 0.0;
  for (const auto& r : b.chain_a) p += phantom_value(s, {r.gen, r.idx});
  for (const auto& r : b.chain_b) p += phantom_value(s, {r.gen, r.idx});
  return p;
}

// Neumaier-compensated sum; long edge lists otherwise drift below telescoping totals.
class Sum {
 public:
  void add(double x) {
    const double t = s_ + x;
    c_ += std::abs(s_) >= std::abs(x) ? (s_ - t) + x : (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

}  // namespace

LengthLedger length_accounting(const CurveState& s) {
  LengthLedger L;
  const auto& h = s.hierarchy;
  const double C = h.cstar;
  Sum alpha_sum, bridge_length, length;
  for (int k = 1; k <= s.k_max; ++k)
    for (const auto& a : s.annotations[static_cast<std::size_t>(k)]) alpha_sum.add(a.alpha * a.alpha * h.scale(k));
  L.alpha_sum = alpha_sum.value();
  L.bound = h.r0 + L.alpha_sum;
  for (const auto& rec : s.records) {
    LengthRow row;
    row.k = rec.k;
    Sum row_edges;
    for (const auto& [a, b] : rec.edges) row_edges.add((s.nodes.col(col(a)) - s.nodes.col(col(b))).norm());
    row.edge_length = row_edges.value();
    if (rec.k == s.k_max)
      for (const auto& [a, b] : rec.edges) length.add((s.nodes.col(col(a)) - s.nodes.col(col(b))).norm());
    for (const auto& e : rec.phantom) row.phantom_length += phantom_value(s, e);
    for (const auto& a : s.annotations[static_cast<std::size_t>(rec.k)]) row.alpha_sum += a.alpha * a.alpha * h.scale(rec.k);
    for (const auto* list : {&rec.bridges_flat, &rec.bridges_nonflat}) {
      for (auto bi : *list) {
        const auto& b = s.bridges[bi];
        row.bridge_length += b.length();
        row.bridge_count++;
        if (b.flat && b.parent_edge >= 0) {
          const double f = (b.length() + bridge_phantom(s, b) - b.parent_edge) / (0.9 * b.segment_length);
          row.core_factor = std::max(row.core_factor, f);
        }
      }
    }
    L.max_core_factor = std::max(L.max_core_factor, row.core_factor);
    L.rows.push_back(row);
  }
  for (const auto& b : s.bridges) {
    bridge_length.add(b.length());
    length.add(b.length());
    if (b.length() > 32.0 / 30.0 * b.segment_length + 1e-12) L.bridges_over_32_30++;
    if (b.extension_a > 2.0 * C * h.scale(b.a.gen) + 1e-12) L.extensions_over_bound++;
    if (b.extension_b > 2.0 * C * h.scale(b.b.gen) + 1e-12) L.extensions_over_bound++;
  }
  if (!s.records.empty()) L.edge_length = L.rows.back().edge_length;
  L.bridge_length = bridge_length.value();
  L.length = length.value();
  L.ratio = L.length / L.bound;
  L.core_factor_within_25_27 = L.max_core_factor <= 25.0 / 27.0 + 1e-12;
  L.core_factor_within_23_27 = L.max_core_factor <= 23.0 / 27.0 + 1e-12;
  L.truncation_error = 2.0 * C * h.scale(s.k_max);
  return L;
}

double distance_to_gamma(const CurveState& s, const PointRef& p) {
  double best = std::numeric_limits<double>::infinity();
  const auto& top = s.node_of.at(static_cast<std::size_t>(s.k_max));
  for (auto n : top) best = std::min(best, (s.nodes.col(col(n)) - p).norm());
  if (best == 0.0 || s.singleton) return best;
  for (const auto& [a, b] : s.record(s.k_max).edges)
    best = std::min(best, dist_point_segment(p, s.nodes.col(col(a)), s.nodes.col(col(b))));
  for (const auto& br : s.bridges) {
    best = std::min(best, dist_point_segment(p, s.nodes.col(col(br.node_a)), s.nodes.col(col(br.node_b))));
    for (const auto* ch : {&br.chain_nodes_a, &br.chain_nodes_b})
      for (std::size_t i = 1; i < ch->size(); ++i)
        best = std::min(best, dist_point_segment(p, s.nodes.col(col((*ch)[i - 1])), s.nodes.col(col((*ch)[i]))));
  }
  return best;
}

bool CurveChecks::ok() const {
  return disconnected_generations.empty() && edges_too_long == 0 && bridges_out_of_range == 0 &&
         bridge_freeze_violations == 0 && core_overlaps == 0 && terminal_violations == 0 && phantom_invalid == 0 &&
         max_leaf_distance <= leaf_tolerance + 1e-12 && max_hausdorff_ratio <= 3.0 + 1e-12;
}

CurveChecks check_curve(const CurveState& s) {
  CurveChecks c;
  const auto& h = s.hierarchy;
  const double C = h.cstar;
  c.leaf_tolerance = 2.0 * h.scale(s.k_max);

  std::vector<int> seen(s.bridges.size(), 0);
  for (const auto& rec : s.records) {
    const int k = rec.k;
    if (!connectedness(s.gamma(k), s.vertices(k)).connected) c.disconnected_generations.push_back(k);
    if (k > s.k0) {
      for (const auto& [a, b] : rec.edges)
        if ((s.nodes.col(col(a)) - s.nodes.col(col(b))).norm() >= 30.0 * C * h.scale(k - 1)) c.edges_too_long++;
    }
    std::vector<std::size_t> cores;
    for (const auto* list : {&rec.bridges_flat, &rec.bridges_nonflat}) {
      for (auto bi : *list) {
        seen[bi]++;
        const auto& b = s.bridges[bi];
        if (b.k != k) c.bridge_freeze_violations++;
        if (b.segment_length < 30.0 * C * h.scale(k - 1) - 1e-12 ||
            b.segment_length > 66.0 * C * h.scale(k - 2) + 1e-12)
          c.bridges_out_of_range++;
      }
    }
    // Cores: the concentric 9/10 of each flat bridge segment.
    std::vector<std::pair<Point, Point>> seg;
    for (auto bi : rec.bridges_flat) {
      const auto& b = s.bridges[bi];
      const Point pa = s.nodes.col(col(b.node_a)), pb = s.nodes.col(col(b.node_b));
      seg.emplace_back(pa + 0.05 * (pb - pa), pb + 0.05 * (pa - pb));
    }
    for (std::size_t i = 0; i < seg.size(); ++i)
      for (std::size_t j = i + 1; j < seg.size(); ++j)
        if (dist_segment_segment(seg[i].first, seg[i].second, seg[j].first, seg[j].second) <= 1e-12) c.core_overlaps++;
    for (const auto& e : rec.phantom)
      if (e.gen < 0 || e.gen > s.k_max || e.idx >= h.count(e.gen)) c.phantom_invalid++;
    if (k > s.k0) {
      const auto& A = s.annotations[static_cast<std::size_t>(k)];
      for (std::size_t v = 0; v < A.size(); ++v)
        if (!A[v].flat && !rec.phantom.count({k, v})) c.terminal_violations++;
      for (auto v : rec.terminal)
        if (!rec.phantom.count({k, v})) c.terminal_violations++;
    }
  }
  for (auto n : seen)
    if (n != 1) c.bridge_freeze_violations++;

  std::vector<char> drawn(static_cast<std::size_t>(s.nodes.cols()), 0);
  for (int k = s.k0; k <= s.k_max; ++k)
    for (auto n : s.node_of[static_cast<std::size_t>(k)]) drawn[n] = 1;
  for (Eigen::Index n = 0; n < s.nodes.cols(); ++n) {
    const double d = distance_to_gamma(s, s.nodes.col(n));
    auto& slot = drawn[static_cast<std::size_t>(n)] ? c.max_leaf_distance : c.max_undrawn_distance;
    slot = std::max(slot, d);
  }
  const PointSet& last = h.V(s.k_max);
  for (int k = 0; k <= s.k_max; ++k)
    c.max_hausdorff_ratio = std::max(c.max_hausdorff_ratio, hausdorff_distance(h.V(k), last) / (C * h.scale(k)));
  return c;
}

}  // namespace rect
