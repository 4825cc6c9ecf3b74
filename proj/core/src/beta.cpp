#include "rectify/beta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rect {

namespace {

Eigen::VectorXd top_direction(const Eigen::MatrixXd& cov) {
  const auto d = cov.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  const double top = ev[d - 1];
  const double tol = 1e-9 * std::max(std::abs(top), 1e-300);
  Eigen::Index first = d - 1;
  while (first > 0 && ev[first - 1] >= top - tol) --first;
  if (first == d - 1) {
    Eigen::VectorXd v = es.eigenvectors().col(d - 1);
    canonicalize_sign(v);
    return v;
  }
  const Eigen::MatrixXd U = es.eigenvectors().rightCols(d - first);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd v = U * U.row(i).transpose();  // projection of e_i
    const double n = v.norm();
    if (n > 1e-9) {
      v /= n;
      canonicalize_sign(v);
      return v;
    }
  }
  return Eigen::VectorXd::Unit(d, 0);
}

}  // namespace

Line fit_line(const PointSet& points, const std::vector<std::size_t>& idx,
              const Eigen::VectorXd* weights) {
  if (idx.empty()) throw std::invalid_argument("fit_line: no points");
  const auto d = points.rows();
  double mass = 0.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  for (auto i : idx) {
    const double w = weights ? (*weights)[static_cast<Eigen::Index>(i)] : 1.0;
    c += w * points.col(static_cast<Eigen::Index>(i));
    mass += w;
  }
  if (!(mass > 0)) throw std::invalid_argument("fit_line: zero mass");
  c /= mass;
  if (idx.size() == 1) return Line(c, Eigen::VectorXd::Unit(d, 0));
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (auto i : idx) {
    const double w = weights ? (*weights)[static_cast<Eigen::Index>(i)] : 1.0;
    const Eigen::VectorXd y = points.col(static_cast<Eigen::Index>(i)) - c;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(y, w / mass);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  return Line(c, top_direction(cov));
}

Line best_fit_line(const DiscreteMeasure& mu, const Ball& window) {
  const auto idx = atoms_in_ball(mu, window.center, window.radius);
  if (idx.empty()) throw std::domain_error("best_fit_line: zero mass in window");
  return fit_line(mu.atoms, idx, &mu.weights);
}

Point center_of_mass(const DiscreteMeasure& mu, const Ball& window) {
  const auto idx = atoms_in_ball(mu, window.center, window.radius);
  if (idx.empty()) throw std::domain_error("center_of_mass: zero mass in window");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(mu.dim());
  double m = 0.0;
  for (auto i : idx) {
    c += mu.weights[static_cast<Eigen::Index>(i)] * mu.atoms.col(static_cast<Eigen::Index>(i));
    m += mu.weights[static_cast<Eigen::Index>(i)];
  }
  return c / m;
}

BetaResult beta2_atoms(const DiscreteMeasure& mu, const std::vector<std::size_t>& idx, double diamE) {
  BetaResult r;
  r.window_diam = diamE;
  for (auto i : idx) r.window_mass += mu.weights[static_cast<Eigen::Index>(i)];
  if (idx.empty() || !(r.window_mass > 0)) return r;
  r.line = fit_line(mu.atoms, idx, &mu.weights);
  r.has_line = true;
  double s = 0.0;
  for (auto i : idx) {
    const double dd = dist_point_line(mu.atoms.col(static_cast<Eigen::Index>(i)), r.line);
    s += mu.weights[static_cast<Eigen::Index>(i)] * dd * dd;
  }
  r.value = diamE > 0 ? std::sqrt(s / r.window_mass) / diamE : 0.0;
  return r;
}

BetaResult beta2(const DiscreteMeasure& mu, const Ball& window, double dilation) {
  if (dilation < 1.0) throw std::invalid_argument("beta2: dilation must be >= 1");
  const Ball E = window.dilate(dilation);
  return beta2_atoms(mu, atoms_in_ball(mu, E.center, E.radius), E.diam());
}

double beta2_line(const DiscreteMeasure& mu, const Ball& window, double dilation, const Line& l) {
  const Ball E = window.dilate(dilation);
  const auto idx = atoms_in_ball(mu, E.center, E.radius);
  double m = 0.0, s = 0.0;
  for (auto i : idx) {
    const double w = mu.weights[static_cast<Eigen::Index>(i)];
    const double dd = dist_point_line(mu.atoms.col(static_cast<Eigen::Index>(i)), l);
    m += w;
    s += w * dd * dd;
  }
  if (!(m > 0) || !(E.diam() > 0)) return 0.0;
  return std::sqrt(s / m) / E.diam();
}

namespace {

std::vector<std::size_t> points_in_ball(const PointSet& points, const Ball& Q) {
  std::vector<std::size_t> idx;
  for (Eigen::Index i = 0; i < points.cols(); ++i)
    if (Q.contains(points.col(i))) idx.push_back(static_cast<std::size_t>(i));
  return idx;
}

}  // namespace

BetaResult beta_sup(const PointSet& points, const Ball& window) {
  BetaResult r;
  r.window_diam = window.diam();
  const auto idx = points_in_ball(points, window);
  r.window_mass = static_cast<double>(idx.size());
  if (idx.empty()) return r;
  r.line = fit_line(points, idx);
  r.has_line = true;
  double sup = 0.0;
  for (auto i : idx) sup = std::max(sup, dist_point_line(points.col(static_cast<Eigen::Index>(i)), r.line));
  r.value = r.window_diam > 0 ? sup / r.window_diam : 0.0;
  return r;
}

BetaResult beta_sup_exact_2d(const PointSet& points, const Ball& window) {
  if (points.rows() != 2) throw DimensionError("beta_sup_exact_2d: planar points only");
  BetaResult r;
  r.window_diam = window.diam();
  const auto idx = points_in_ball(points, window);
  r.window_mass = static_cast<double>(idx.size());
  if (idx.empty()) return r;
  std::vector<Eigen::Vector2d> p;
  for (auto i : idx) p.emplace_back(points(0, static_cast<Eigen::Index>(i)), points(1, static_cast<Eigen::Index>(i)));
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() == 1) {
    r.line = Line(Eigen::Vector2d(p[0]), Eigen::Vector2d(1.0, 0.0));
    r.has_line = true;
    return r;
  }
  // Andrew's monotone chain.
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
  };
  std::vector<Eigen::Vector2d> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d best_dir(1.0, 0.0);
  double best_off = 0.0;
  for (std::size_t e = 0; e < hull.size(); ++e) {
    const Eigen::Vector2d a = hull[e], b = hull[(e + 1) % hull.size()];
    Eigen::Vector2d dir = b - a;
    if (dir.norm() == 0) continue;
    dir.normalize();
    const Eigen::Vector2d nrm(-dir.y(), dir.x());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& q : hull) {
      lo = std::min(lo, q.dot(nrm));
      hi = std::max(hi, q.dot(nrm));
    }
    if ((hi - lo) / 2 < best) {
      best = (hi - lo) / 2;
      best_dir = dir;
      best_off = (hi + lo) / 2;
    }
  }
  const Eigen::Vector2d nrm(-best_dir.y(), best_dir.x());
  r.line = Line(Eigen::Vector2d(best_off * nrm), Eigen::Vector2d(best_dir));
  r.has_line = true;
  r.value = r.window_diam > 0 ? best / r.window_diam : 0.0;
  return r;
}

}  // namespace rect
