#include "rectify/trees.hpp"

#include "rectify/beta.hpp"
#include "rectify/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

namespace rect {

namespace {

// Ball centres per level with a kd-tree on each.
struct LevelCenters {
  std::vector<PointSet> centers;
  std::vector<std::unique_ptr<BallIndex>> index;
  int k0 = 0;

  LevelCenters(const MultiresolutionFamily& fam, const DiscreteMeasure& mu) : k0(fam.k0) {
    for (int k = fam.k0; k <= fam.k_max; ++k) {
      const auto& lvl = fam.level(k);
      PointSet c(mu.dim(), static_cast<Eigen::Index>(lvl.indices.size()));
      for (std::size_t j = 0; j < lvl.indices.size(); ++j)
        c.col(static_cast<Eigen::Index>(j)) = mu.atoms.col(static_cast<Eigen::Index>(lvl.indices[j]));
      centers.push_back(std::move(c));
    }
    for (const auto& c : centers) index.push_back(std::make_unique<BallIndex>(c));
  }
  auto center(const BallId& b) const {
    return centers[static_cast<std::size_t>(b.k - k0)].col(static_cast<Eigen::Index>(b.j));
  }
  std::vector<std::size_t> query(int k, const PointRef& p, double r) const {
    return index[static_cast<std::size_t>(k - k0)]->query(p, r);
  }
};

Point ball_center(const MultiresolutionFamily& fam, const DiscreteMeasure& mu, const BallId& b) {
  return fam.center(mu, b.k, b.j);
}

double max_reach(const CoreFamilies& cf, int k) {
  double m = 0.0;
  for (const auto& q : cf.cores.at(static_cast<std::size_t>(k - cf.k0))) m = std::max(m, q.reach);
  return m;
}

void check_ball_id(const MultiresolutionFamily& fam, const BallId& b) {
  if (b.k < fam.k0 || b.k > fam.k_max || b.j >= fam.count(b.k))
    throw std::invalid_argument("ball (" + std::to_string(b.k) + ", " + std::to_string(b.j) +
                                ") is not in the family");
}

}  // namespace

double CoreFamilies::radius(int k) const { return c * lambda2 * std::ldexp(1.0, -k); }

CoreFamilies build_cores(const MultiresolutionFamily& fam, const DiscreteMeasure& mu, double c, int J) {
  if (!(c > 0)) throw std::invalid_argument("build_cores: c must be positive");
  if (c > default_core_constant(fam.lambda2) * (1.0 + 1e-12))
    throw std::invalid_argument("build_cores: c must not exceed 1/(4 lambda2)");
  if (J < 10) throw std::invalid_argument("build_cores: J must be >= 10");
  if (!(fam.lambda2 > min_lambda2(J)))
    throw std::invalid_argument("build_cores: lambda2 must exceed (1 - 2^-J)^-2");

  CoreFamilies cf;
  cf.c = c;
  cf.J = J;
  cf.lambda2 = fam.lambda2;
  cf.k0 = fam.k0;
  cf.k_max = fam.k_max;
  const LevelCenters lc(fam, mu);

  for (int k = fam.k0; k <= fam.k_max; ++k) {
    std::vector<Core> level(fam.count(k));
    for (std::size_t j = 0; j < level.size(); ++j) {
      Core& q = level[j];
      q.ball = {k, j};
      q.family = (k - fam.k0) % J;
      q.members = {q.ball};
      for (int l = k + J; l <= fam.k_max; l += J) {
        std::vector<BallId> add;
        for (const auto& m : q.members)
          for (auto jj : lc.query(l, lc.center(m), cf.radius(m.k) + cf.radius(l))) add.push_back({l, jj});
        std::sort(add.begin(), add.end());
        add.erase(std::unique(add.begin(), add.end()), add.end());
        if (add.empty()) break;
        q.members.insert(q.members.end(), add.begin(), add.end());
      }
      const auto x = lc.center(q.ball);
      for (const auto& m : q.members) q.reach = std::max(q.reach, (lc.center(m) - x).norm() + cf.radius(m.k));
    }
    cf.cores.push_back(std::move(level));
  }
  return cf;
}

bool cores_intersect(const CoreFamilies& cf, const MultiresolutionFamily& fam, const DiscreteMeasure& mu,
                     const BallId& a, const BallId& b) {
  return core_distance(cf, fam, mu, a, b) <= kBallTol;
}

double core_diameter(const CoreFamilies& cf, const MultiresolutionFamily& fam, const DiscreteMeasure& mu,
                     const BallId& b) {
  const auto& q = cf.core(b);
  double d = 0.0;
  for (std::size_t i = 0; i < q.members.size(); ++i) {
    const Point ci = ball_center(fam, mu, q.members[i]);
    for (std::size_t j = i; j < q.members.size(); ++j)
      d = std::max(d, (ci - ball_center(fam, mu, q.members[j])).norm() + cf.radius(q.members[i].k) +
                          cf.radius(q.members[j].k));
  }
  return d;
}

double core_distance(const CoreFamilies& cf, const MultiresolutionFamily& fam, const DiscreteMeasure& mu,
                     const BallId& a, const BallId& b) {
  const auto& qa = cf.core(a);
  const auto& qb = cf.core(b);
  double d = std::numeric_limits<double>::infinity();
  for (const auto& m : qa.members) {
    const Point cm = ball_center(fam, mu, m);
    for (const auto& n : qb.members) {
      const double g = (cm - ball_center(fam, mu, n)).norm() - cf.radius(m.k) - cf.radius(n.k);
      d = std::min(d, std::max(g, 0.0));
      if (d == 0.0) return 0.0;
    }
  }
  return d;
}

CoreReport check_cores(const CoreFamilies& cf, const MultiresolutionFamily& fam, const DiscreteMeasure& mu) {
  CoreReport rep;
  rep.min_gap_ratio = std::numeric_limits<double>::infinity();
  const LevelCenters lc(fam, mu);
  const double hi_factor = 2.0 * (1.0 + 4.0 * std::ldexp(1.0, -cf.J + 1));
  for (int k = cf.k0; k <= cf.k_max; ++k) {
    const auto& level = cf.cores[static_cast<std::size_t>(k - cf.k0)];
    const double base = cf.radius(k);  // c lambda2 2^-k
    const double gap_min = std::ldexp(1.0, -k - 1);
    const double reach_k = max_reach(cf, k);
    for (std::size_t j = 0; j < level.size(); ++j) {
      ++rep.cores;
      const BallId id{k, j};
      const double d = core_diameter(cf, fam, mu, id);
      if (d < 2.0 * base - kGeomTol || d > hi_factor * base + kGeomTol) ++rep.diameter_violations;

      const auto x = lc.center(id);
      for (auto jj : lc.query(k, x, 2.0 * reach_k + gap_min)) {
        if (jj <= j) continue;
        const double g = core_distance(cf, fam, mu, id, {k, jj});
        rep.min_gap_ratio = std::min(rep.min_gap_ratio, g / gap_min);
        if (g < gap_min - kBallTol) ++rep.gap_violations;
      }

      for (int l = k + cf.J; l <= cf.k_max; l += cf.J) {
        const auto& mem = level[j].members;
        for (auto jj : lc.query(l, x, level[j].reach + max_reach(cf, l))) {
          const BallId other{l, jj};
          if (!cores_intersect(cf, fam, mu, id, other)) continue;
          const auto& sub = cf.core(other).members;
          if (!std::includes(mem.begin(), mem.end(), sub.begin(), sub.end())) ++rep.nesting_violations;
        }
      }

      if (k - cf.J >= cf.k0) {
        std::size_t parents = 0;
        for (auto jj : lc.query(k - cf.J, x, level[j].reach + max_reach(cf, k - cf.J)))
          if (cores_intersect(cf, fam, mu, id, {k - cf.J, jj})) ++parents;
        if (parents > 1) ++rep.parent_conflicts;
      }
    }
  }
  return rep;
}

std::vector<std::size_t> BallTree::at_depth(int d) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].depth == d) out.push_back(i);
  return out;
}

BallTree build_tree(const CoreFamilies& cf, const MultiresolutionFamily& fam, const DiscreteMeasure& mu,
                    const BallId& top) {
  check_ball_id(fam, top);
  const LevelCenters lc(fam, mu);
  BallTree t;
  t.J = cf.J;
  t.bottom_depth = (fam.k_max - top.k) / cf.J;
  t.nodes.push_back({top, -1, {}, 0, false});
  std::map<BallId, std::size_t> claimed{{top, 0}};
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const BallId b = t.nodes[i].ball;
    const int l = b.k + cf.J;
    if (l > fam.k_max) continue;
    const auto x = lc.center(b);
    for (auto jj : lc.query(l, x, cf.core(b).reach + max_reach(cf, l))) {
      const BallId child{l, jj};
      if (!cores_intersect(cf, fam, mu, b, child)) continue;
      if (claimed.count(child)) {
        ++t.parent_conflicts;
        continue;
      }
      if ((lc.center(child) - x).norm() + fam.radius(l) > fam.radius(b.k) + kGeomTol) ++t.containment_violations;
      claimed.emplace(child, t.nodes.size());
      t.nodes[i].children.push_back(t.nodes.size());
      t.nodes.push_back({child, static_cast<long>(i), {}, t.nodes[i].depth + 1, false});
    }
  }
  for (std::size_t i = t.nodes.size(); i-- > 0;) {
    auto& n = t.nodes[i];
    if (n.depth == t.bottom_depth) n.alive = true;
    if (n.alive && n.parent >= 0) t.nodes[static_cast<std::size_t>(n.parent)].alive = true;
  }
  return t;
}

std::vector<double> beta_payoff(const BallTree& t, const MultiresolutionFamily& fam, const DiscreteMeasure& mu) {
  const BallIndex atoms(mu.atoms);
  std::vector<double> b(t.nodes.size(), 0.0);
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& id = t.nodes[i].ball;
    const double r = fam.radius(id.k);
    const double beta = beta2_atoms(mu, atoms.query(fam.center(mu, id.k, id.j), 2.0 * r), 4.0 * r).value;
    b[i] = beta * beta * 2.0 * r;
  }
  return b;
}

GoodBadPartition good_bad(const BallTree& t, const CoreFamilies& cf, const MultiresolutionFamily& fam,
                          const DiscreteMeasure& mu, const std::vector<double>& b, double N, double eps,
                          double a) {
  if (t.nodes.empty()) throw std::invalid_argument("good_bad: empty tree");
  if (b.size() != t.nodes.size()) throw std::invalid_argument("good_bad: payoff size does not match the tree");
  if (!(eps > 0)) throw std::invalid_argument("good_bad: eps must be positive");
  if (!(a > 0)) throw std::invalid_argument("good_bad: a must be positive");
  if (!(N >= 0)) throw std::invalid_argument("good_bad: N must be non-negative");

  GoodBadPartition p;
  p.N = N;
  p.eps = eps;
  p.a = a;
  if (a > cf.c * (1.0 + 1e-12)) p.warnings.push_back("a exceeds the core constant c; mu(aB) <= mu(Q_B) may fail");

  const BallIndex atoms(mu.atoms);
  const std::size_t n = t.nodes.size();
  const auto w = [&](std::size_t i) { return mu.weights[static_cast<Eigen::Index>(i)]; };
  std::vector<std::vector<std::size_t>> in_ball(n);
  std::vector<double> mass(n, 0.0), core_mass(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = t.nodes[i].ball;
    const Point x = fam.center(mu, id.k, id.j);
    in_ball[i] = atoms.query(x, fam.radius(id.k));
    for (auto q : in_ball[i]) mass[i] += w(q);
    double small = 0.0;
    for (auto q : atoms.query(x, a * fam.radius(id.k))) small += w(q);
    p.D_T = std::max(p.D_T, mass[i] / small);
    std::vector<std::size_t> qa;
    for (const auto& m : cf.core(id).members) {
      auto s = atoms.query(fam.center(mu, m.k, m.j), cf.radius(m.k));
      qa.insert(qa.end(), s.begin(), s.end());
    }
    std::sort(qa.begin(), qa.end());
    qa.erase(std::unique(qa.begin(), qa.end()), qa.end());
    for (auto q : qa) core_mass[i] += w(q);
  }
  p.mass_top = mass[0];
  if (eps * p.mass_top >= 1.0) p.warnings.push_back("eps * mu(Top) >= 1: the measure bound is vacuous");

  std::vector<double> S(static_cast<std::size_t>(mu.size()), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (mass[i] > 0)
      for (auto q : in_ball[i]) S[q] += b[i] / mass[i];

  std::vector<char> in_top(S.size(), 0), in_leaves(S.size(), 0), in_E(S.size(), 0);
  for (auto q : in_ball[0]) in_top[q] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (t.nodes[i].alive && t.nodes[i].depth == t.bottom_depth)
      for (auto q : in_ball[i]) in_leaves[q] = 1;
  for (std::size_t q = 0; q < S.size(); ++q) {
    if (!in_top[q] || S[q] > N) continue;
    p.mass_E_top += w(q);
    if (in_leaves[q]) {
      in_E[q] = 1;
      p.E.push_back(q);
      p.mass_E += w(q);
    }
  }

  p.good.assign(n, 0);
  if (p.mass_E > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (auto q : in_ball[i])
        if (in_E[q]) e += w(q);
      const bool bad_self = e <= eps * p.mass_E * core_mass[i];
      const bool parent_good = t.nodes[i].parent < 0 || p.good[static_cast<std::size_t>(t.nodes[i].parent)];
      p.good[i] = (!bad_self && parent_good) ? 1 : 0;
    }
  }

  std::vector<char> in_good_leaves(S.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (p.good[i]) p.good_sum += b[i];
    if (p.good[i] && t.nodes[i].alive && t.nodes[i].depth == t.bottom_depth)
      for (auto q : in_ball[i]) in_good_leaves[q] = 1;
  }
  for (auto q : p.E)
    if (in_good_leaves[q]) {
      p.E_prime.push_back(q);
      p.mass_E_prime += w(q);
    }

  for (std::size_t i = 1; i < n; ++i) {
    const bool parent_good = p.good[static_cast<std::size_t>(t.nodes[i].parent)];
    if (!parent_good && p.good[i]) p.bad_closed_downward = false;
    if (p.good[i] && !parent_good) p.good_is_tree = false;
  }
  if (!p.good[0]) {
    for (std::size_t i = 1; i < n; ++i)
      if (p.good[i]) p.good_is_tree = false;
  }

  p.sum_bound = N * p.D_T / eps;
  p.sum_bound_holds = p.good_sum <= p.sum_bound + 1e-12 * std::max(1.0, p.sum_bound);
  p.measure_bound_holds = p.mass_E_prime >= (1.0 - eps * p.mass_top) * p.mass_E - 1e-12;
  return p;
}

LeavesCurve leaves_curve(const BallTree& t, const MultiresolutionFamily& fam, const DiscreteMeasure& mu,
                         double eps) {
  if (t.nodes.empty()) throw std::invalid_argument("leaves_curve: empty tree");
  LeavesCurve out;
  const int J = t.J;
  const double delta = std::ldexp(1.0, -J);
  const double cstar = 5.0 * std::ldexp(1.0, J);
  const auto& top = t.top().ball;
  const double r0 = 2.0 * fam.radius(top.k);
  const BallIndex atoms(mu.atoms);

  const std::size_t n = t.nodes.size();
  std::vector<Point> x(n);
  std::vector<double> rad(n), mass(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = t.nodes[i].ball;
    x[i] = fam.center(mu, id.k, id.j);
    rad[i] = fam.radius(id.k);
    for (auto q : atoms.query(x[i], rad[i])) mass[i] += mu.weights[static_cast<Eigen::Index>(q)];
  }
  for (std::size_t i = 1; i < n; ++i)
    if (t.nodes[i].alive && mass[i] > 0)
      out.d_T = std::max(out.d_T, mass[static_cast<std::size_t>(t.nodes[i].parent)] / mass[i]);

  const auto payoff = beta_payoff(t, fam, mu);
  for (std::size_t i = 0; i < n; ++i)
    if (t.nodes[i].alive) out.S2 += payoff[i];
  out.rhs = r0 + std::pow(out.d_T, 6 + J) * out.S2;

  NetHierarchy& h = out.hierarchy;
  h.r0 = r0;
  h.delta = delta;
  h.cstar = cstar;
  const int depth_max = t.top().alive ? t.bottom_depth : 0;
  for (int d = 0; d <= depth_max; ++d) {
    std::vector<std::size_t> alive;
    for (auto i : t.at_depth(d))
      if (t.nodes[i].alive || d == 0) alive.push_back(i);
    PointSet Z(mu.dim(), static_cast<Eigen::Index>(alive.size()));
    for (std::size_t q = 0; q < alive.size(); ++q)
      Z.col(static_cast<Eigen::Index>(q)) = center_of_mass(mu, Ball{x[alive[q]], rad[alive[q]]});
    const auto pick = maximal_net(Z, std::pow(delta, d) * r0);
    PointSet V(mu.dim(), static_cast<Eigen::Index>(pick.size()));
    std::vector<std::size_t> node;
    for (std::size_t q = 0; q < pick.size(); ++q) {
      V.col(static_cast<Eigen::Index>(q)) = Z.col(static_cast<Eigen::Index>(pick[q]));
      node.push_back(alive[pick[q]]);
    }
    h.generations.push_back(std::move(V));
    out.vertex_node.push_back(std::move(node));
  }

  // Each window ball's line and beta are shared by many vertices.
  std::map<std::size_t, BetaResult> fits;
  const auto fit = [&](std::size_t i) -> const BetaResult& {
    auto it = fits.find(i);
    if (it == fits.end())
      it = fits.emplace(i, beta2_atoms(mu, atoms.query(x[i], 2.0 * rad[i]), 4.0 * rad[i])).first;
    return it->second;
  };

  const double amp = std::pow(4.0 * out.d_T, 6 + J);
  out.annotations.resize(h.generations.size());
  out.hat_node.resize(h.generations.size());
  for (int k = 0; k <= h.k_last(); ++k) {
    const double win = 66.0 * cstar * std::pow(delta, k - 2) * r0;
    const auto& Vk = h.V(k);
    for (Eigen::Index v = 0; v < Vk.cols(); ++v) {
      std::vector<std::size_t> window;
      for (int j = std::max(k - 1, 0); j <= k; ++j) {
        const auto& Vj = h.V(j);
        for (Eigen::Index u = 0; u < Vj.cols(); ++u)
          if ((Vj.col(u) - Vk.col(v)).norm() <= win + kBallTol)
            window.push_back(out.vertex_node[static_cast<std::size_t>(j)][static_cast<std::size_t>(u)]);
      }
      const std::size_t self = out.vertex_node[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)];
      std::size_t hat = 0;
      bool found = false;
      for (long a = static_cast<long>(self); a >= 0; a = t.nodes[static_cast<std::size_t>(a)].parent) {
        const auto ai = static_cast<std::size_t>(a);
        bool contains = true;
        for (auto wi : window)
          if ((x[wi] - x[ai]).norm() + rad[wi] > rad[ai] + kGeomTol) {
            contains = false;
            break;
          }
        if (contains) {
          hat = ai;
          found = true;
          break;
        }
      }
      if (!found) ++out.hat_fallbacks;
      out.hat_node[static_cast<std::size_t>(k)].push_back(hat);
      out.max_hat_ratio = std::max(out.max_hat_ratio, rad[hat] / rad[self]);

      const auto& f = fit(hat);
      VertexAnnotation ann;
      ann.line = f.has_line ? f.line : Line(Vk.col(v), Point::Unit(mu.dim(), 0));
      ann.alpha = amp * f.value * 2.0 * rad[self] / h.scale(k);
      ann.flat = ann.alpha < eps;
      ann.window_size = window.size();
      out.annotations[static_cast<std::size_t>(k)].push_back(std::move(ann));
    }
  }

  out.violations = validate_hierarchy(h);
  out.state = construct(h, out.annotations, eps);
  out.ledger = length_accounting(out.state);
  out.checks = check_curve(out.state);
  out.leaf_tolerance = 2.0 * h.scale(h.k_last());
  for (std::size_t i = 0; i < n; ++i)
    if (t.nodes[i].alive && t.nodes[i].depth == depth_max)
      out.max_leaf_distance = std::max(out.max_leaf_distance, distance_to_gamma(out.state, x[i]));
  return out;
}

}  // namespace rect
