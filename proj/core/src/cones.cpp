#include "rectify/cones.hpp"

#include "rectify/beta.hpp"
#include "rectify/parallel.hpp"
#include "rectify/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rect {

void ConeSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("cone: alpha must lie in (0, 1)");
  if (apex.size() != plane.dim()) throw DimensionError("cone: apex and plane dimensions differ");
  if (plane.m() < 1 || plane.m() >= plane.dim()) throw std::invalid_argument("cone: need 0 < m < d");
  if (radius && !(*radius > 0)) throw std::invalid_argument("cone: radius must be positive");
}

double cone_sine(const MPlane& V, const PointRef& w) {
  const double n = w.norm();
  if (n == 0.0) return 0.0;
  return (w - V.basis * (V.basis.transpose() * w)).norm() / n;
}

bool in_good_cone(const ConeSpec& c, const PointRef& y) {
  const Point w = y - c.apex;
  return (w - c.plane.basis * (c.plane.basis.transpose() * w)).norm() <= c.alpha * w.norm() + kBallTol;
}

double cone_mass_ratio(const DiscreteMeasure& mu, const ConeSpec& c) {
  c.validate();
  if (mu.dim() != c.apex.size()) throw DimensionError("cone_mass_ratio: dimension mismatch");
  double total = 0.0, bad = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const auto y = mu.atoms.col(i);
    if (c.radius && (y - c.apex).norm() > *c.radius + kBallTol) continue;
    total += mu.weights[i];
    if (!in_good_cone(c, y)) bad += mu.weights[i];
  }
  if (!(total > 0)) throw std::domain_error("cone_mass_ratio: ball carries no mass");
  return bad / total;
}

double eta_alpha(double alpha, bool* out_of_domain) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("eta_alpha: alpha must lie in (0, 1)");
  if (out_of_domain) *out_of_domain = alpha > 0.5;
  const double t1 = 1.0 - alpha;
  const double t2 = 1.0 - 2.0 * alpha;
  const double inner = std::min(1.0, t2 * t1 + std::sqrt(std::max(0.0, (1.0 - t2 * t2) * (1.0 - t1 * t1))));
  return std::sqrt(1.0 - inner);
}

double eta_alpha_geometric(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("eta_alpha_geometric: alpha must lie in (0, 1)");
  return std::sin(std::asin(alpha + (1.0 - alpha) / 2.0) - std::asin(alpha));
}

ContainmentReport eta_containment_check(double alpha, int d, int m, std::size_t samples, std::uint64_t seed,
                                        double shrink) {
  if (d < 2 || m < 1 || m >= d) throw std::invalid_argument("eta_containment_check: need 0 < m < d");
  ContainmentReport rep;
  rep.samples = samples;
  rep.shrink = shrink;
  rep.eta = eta_alpha(alpha);
  rep.exact_margin = eta_alpha_geometric(alpha);
  const double outer = alpha + (1.0 - alpha) / 2.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto gaussian = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
  };
  Eigen::MatrixXd span(d, m);
  for (int j = 0; j < m; ++j) span.col(j) = gaussian(d);
  const MPlane V(Point::Zero(d), span);
  const Eigen::MatrixXd P = V.basis * V.basis.transpose();

  for (std::size_t s = 0; s < samples; ++s) {
    Eigen::VectorXd p = P * gaussian(d);
    Eigen::VectorXd q = gaussian(d);
    q -= P * q;
    p.normalize();
    q.normalize();
    const double len = 1.0 - unit(rng);  // (0, 1]
    const Point y = len * (std::sqrt(1.0 - outer * outer) * p + outer * q);
    Eigen::VectorXd u = gaussian(d);
    u.normalize();
    const Point z = y + shrink * rep.eta * len * u;
    if (cone_sine(V, z) <= alpha) ++rep.violations;
  }
  return rep;
}

GraphExtraction graph_extract(const PointSet& points, const MPlane& V, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("graph_extract: alpha must lie in [0, 1)");
  if (points.rows() != V.dim()) throw DimensionError("graph_extract: dimension mismatch");
  GraphExtraction g;
  const double c = std::sqrt(1.0 - alpha * alpha);
  g.bound = 1.0 / c;
  const Eigen::MatrixXd proj = V.basis.transpose() * points;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    long conflict = -1;
    double worst = 1.0;
    for (auto j : g.accepted) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double full = (points.col(i) - points.col(jj)).norm();
      const double flat = (proj.col(i) - proj.col(jj)).norm();
      if (flat < c * full - kBallTol * std::max(1.0, full)) {
        conflict = static_cast<long>(j);
        break;
      }
      if (full > 0.0) worst = std::max(worst, flat > 0.0 ? full / flat : 1.0);
    }
    if (conflict >= 0) {
      g.rejected.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(conflict));
    } else {
      g.accepted.push_back(static_cast<std::size_t>(i));
      g.lipschitz = std::max(g.lipschitz, worst);
    }
  }
  g.within_bound = g.lipschitz <= g.bound * (1.0 + 1e-12);
  return g;
}

std::vector<MPlane> coordinate_plane_grid(int d, int m) {
  if (m < 1 || m >= d) throw std::invalid_argument("coordinate_plane_grid: need 0 < m < d");
  std::vector<MPlane> out;
  std::vector<int> pick(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) pick[static_cast<std::size_t>(i)] = i;
  while (true) {
    Eigen::MatrixXd span = Eigen::MatrixXd::Zero(d, m);
    for (int j = 0; j < m; ++j) span(pick[static_cast<std::size_t>(j)], j) = 1.0;
    out.emplace_back(Point::Zero(d), span);
    int i = m - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == d - m + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

std::vector<MPlane> angle_line_grid(int d, int count) {
  if (d < 2 || count < 1) throw std::invalid_argument("angle_line_grid: need d >= 2 and count >= 1");
  std::vector<MPlane> out;
  for (int i = 0; i < count; ++i) {
    const double t = M_PI * i / count;
    Eigen::MatrixXd span = Eigen::MatrixXd::Zero(d, 1);
    span(0, 0) = std::cos(t);
    span(1, 0) = std::sin(t);
    out.emplace_back(Point::Zero(d), span);
  }
  return out;
}

std::vector<MPlane> local_principal_planes(const DiscreteMeasure& mu, double r, int m, double dedup_tol) {
  const int d = static_cast<int>(mu.dim());
  if (m < 1 || m >= d) throw std::invalid_argument("local_principal_planes: need 0 < m < d");
  const BallIndex index(mu.atoms);
  std::vector<MPlane> out;
  std::vector<Eigen::MatrixXd> projectors;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const auto idx = index.query(mu.atoms.col(i), r);
    if (idx.size() <= static_cast<std::size_t>(m)) continue;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
    double w = 0.0;
    for (auto j : idx) {
      c += mu.weights[static_cast<Eigen::Index>(j)] * mu.atoms.col(static_cast<Eigen::Index>(j));
      w += mu.weights[static_cast<Eigen::Index>(j)];
    }
    c /= w;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (auto j : idx) {
      const Eigen::VectorXd v = mu.atoms.col(static_cast<Eigen::Index>(j)) - c;
      cov += mu.weights[static_cast<Eigen::Index>(j)] * v * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::MatrixXd span = es.eigenvectors().rightCols(m);
    if (es.eigenvalues()[d - m] <= 0.0) continue;
    const Eigen::MatrixXd Pm = span * span.transpose();
    bool seen = false;
    for (const auto& P : projectors)
      if ((P - Pm).norm() < dedup_tol) {
        seen = true;
        break;
      }
    if (seen) continue;
    projectors.push_back(Pm);
    out.emplace_back(Point::Zero(d), span);
  }
  return out;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> a;
  for (int i = 1; i <= 9; ++i) a.push_back(i / 10.0);
  return a;
}

std::vector<double> default_radius_grid(const DiscreteMeasure& mu, int steps) {
  if (steps < 2) throw std::invalid_argument("default_radius_grid: need at least 2 steps");
  const double lo = 4.0 * min_atom_gap(mu);
  const double hi = diameter(mu.atoms) / 4.0;
  if (!(lo > 0) || !(hi > lo))
    throw std::domain_error("default_radius_grid: atoms too close together or too few for a radius grid");
  std::vector<double> r;
  for (int i = 0; i < steps; ++i) r.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (steps - 1)));
  return r;
}

std::vector<ConeLabel> classify_graph_rectifiable(const DiscreteMeasure& mu, const std::vector<MPlane>& planes,
                                                  const std::vector<double>& alphas,
                                                  const std::vector<double>& radii, double ratio_threshold,
                                                  int threads) {
  if (planes.empty() || alphas.empty() || radii.empty())
    throw std::invalid_argument("classify_graph_rectifiable: empty grid");
  for (const auto& V : planes)
    if (V.dim() != mu.dim()) throw DimensionError("classify_graph_rectifiable: plane dimension mismatch");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("classify_graph_rectifiable: alpha must lie in (0, 1)");
  std::vector<double> r = radii;
  std::sort(r.begin(), r.end());
  if (!(r.front() > 0)) throw std::invalid_argument("classify_graph_rectifiable: radii must be positive");
  r.resize((r.size() + 1) / 2);
  std::vector<double> a = alphas;
  std::sort(a.begin(), a.end());

  const BallIndex index(mu.atoms);
  std::vector<ConeLabel> out(static_cast<std::size_t>(mu.size()));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const auto x = mu.atoms.col(static_cast<Eigen::Index>(i));
    const auto nbrs = index.query(x, r.back());
    std::vector<double> dist(nbrs.size());
    for (std::size_t q = 0; q < nbrs.size(); ++q) dist[q] = (mu.atoms.col(static_cast<Eigen::Index>(nbrs[q])) - x).norm();
    std::vector<double> total(r.size(), 0.0);
    for (std::size_t q = 0; q < nbrs.size(); ++q)
      for (std::size_t s = 0; s < r.size(); ++s)
        if (dist[q] <= r[s] + kBallTol) total[s] += mu.weights[static_cast<Eigen::Index>(nbrs[q])];

    ConeLabel& lab = out[i];
    std::vector<double> sine(nbrs.size()), bad(r.size());
    for (std::size_t p = 0; p < planes.size(); ++p) {
      for (std::size_t q = 0; q < nbrs.size(); ++q)
        sine[q] = cone_sine(planes[p], mu.atoms.col(static_cast<Eigen::Index>(nbrs[q])) - x);
      for (double al : a) {
        std::fill(bad.begin(), bad.end(), 0.0);
        for (std::size_t q = 0; q < nbrs.size(); ++q) {
          // Same test as in_good_cone, on the precomputed sine.
          if (sine[q] * dist[q] <= al * dist[q] + kBallTol) continue;
          for (std::size_t s = 0; s < r.size(); ++s)
            if (dist[q] <= r[s] + kBallTol) bad[s] += mu.weights[static_cast<Eigen::Index>(nbrs[q])];
        }
        double worst = 0.0;
        for (std::size_t s = 0; s < r.size(); ++s) worst = std::max(worst, bad[s] / total[s]);
        lab.min_ratio = std::min(lab.min_ratio, worst);
        if (worst < ratio_threshold && (!lab.positive || al < lab.alpha)) {
          lab.positive = true;
          lab.plane = static_cast<long>(p);
          lab.alpha = al;
        }
      }
    }
  });
  return out;
}

}  // namespace rect
