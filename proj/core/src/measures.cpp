#include "rectify/measures.hpp"

#include "rectify/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace rect {

DiscreteMeasure::DiscreteMeasure(PointSet a, Eigen::VectorXd w)
    : atoms(std::move(a)), weights(std::move(w)) {
  if (atoms.cols() != weights.size())
    throw std::invalid_argument("DiscreteMeasure: atoms/weights length mismatch");
  if (atoms.rows() < 1 && atoms.cols() > 0)
    throw std::invalid_argument("DiscreteMeasure: dimension must be >= 1");
  if (!atoms.allFinite()) throw std::invalid_argument("DiscreteMeasure: non-finite coordinate");
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw std::invalid_argument("DiscreteMeasure: weights must be positive and finite");
}

double ball_mass(const DiscreteMeasure& mu, const PointRef& center, double r) {
  if (r < 0) throw std::invalid_argument("ball_mass: negative radius");
  const double lim = r + kBallTol;
  double m = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if ((mu.atoms.col(i) - center).norm() <= lim) m += mu.weights[i];
  return m;
}

std::vector<std::size_t> atoms_in_ball(const DiscreteMeasure& mu, const PointRef& center,
                                       double r) {
  std::vector<std::size_t> out;
  const double lim = r + kBallTol;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if ((mu.atoms.col(i) - center).norm() <= lim) out.push_back(static_cast<std::size_t>(i));
  return out;
}

DoublingReport doubling_profile(const DiscreteMeasure& mu, std::size_t point_index, double r_min,
                                double r_max, int steps) {
  if (!(r_min > 0) || !(r_max > r_min) || steps < 1)
    throw std::invalid_argument("doubling_profile: need 0 < r_min < r_max and steps >= 1");
  if (point_index >= static_cast<std::size_t>(mu.size()))
    throw std::out_of_range("doubling_profile: point index");
  const auto x = mu.atoms.col(static_cast<Eigen::Index>(point_index));
  if (ball_mass(mu, x, r_min) <= 0.0)
    throw std::domain_error("doubling_profile: zero mass at r_min");
  DoublingReport rep;
  rep.point_index = point_index;
  const double q = steps > 1 ? std::pow(r_max / r_min, 1.0 / (steps - 1)) : 1.0;
  for (int s = 0; s < steps; ++s) {
    const double r = s + 1 == steps ? r_max : r_min * std::pow(q, s);
    const double den = ball_mass(mu, x, r);
    const double ratio = den > 0 ? ball_mass(mu, x, 2 * r) / den
                                 : std::numeric_limits<double>::infinity();
    rep.radii.push_back(r);
    rep.ratios.push_back(ratio);
    rep.sup_ratio = std::max(rep.sup_ratio, ratio);
  }
  return rep;
}

double min_atom_gap(const DiscreteMeasure& mu) {
  if (mu.size() < 2) return 0.0;
  BallIndex index(mu.atoms);
  double best = std::numeric_limits<double>::infinity();
  // Grow the query radius until a distinct neighbour shows up.
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    double r = std::isfinite(best) ? best : 1e-3;
    for (;;) {
      const auto near = index.query(mu.atoms.col(i), r);
      double local = std::numeric_limits<double>::infinity();
      for (auto j : near) {
        if (static_cast<Eigen::Index>(j) == i) continue;
        const double d = (mu.atoms.col(i) - mu.atoms.col(static_cast<Eigen::Index>(j))).norm();
        if (d > 0) local = std::min(local, d);
      }
      if (std::isfinite(local)) {
        best = std::min(best, local);
        break;
      }
      if (near.size() == static_cast<std::size_t>(mu.size())) break;
      if (std::isfinite(best) && r >= best) break;
      r *= 2;
    }
  }
  return std::isfinite(best) ? best : 0.0;
}

double empirical_doubling_constant(const DiscreteMeasure& mu, double r_max, int steps) {
  const double gap = min_atom_gap(mu);
  if (!(gap > 0)) return 1.0;
  const double r_min = 2.0 * gap;
  if (!(r_max > r_min)) return 1.0;
  BallIndex index(mu.atoms);
  auto mass = [&](Eigen::Index i, double r) {
    double m = 0.0;
    for (auto j : index.query(mu.atoms.col(i), r)) m += mu.weights[static_cast<Eigen::Index>(j)];
    return m;
  };
  const double q = std::pow(r_max / r_min, 1.0 / std::max(steps - 1, 1));
  double sup = 1.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    for (int s = 0; s < steps; ++s) {
      const double r = r_min * std::pow(q, s);
      sup = std::max(sup, mass(i, 2 * r) / mass(i, r));
    }
  }
  return sup;
}

double lower_density(const DiscreteMeasure& mu, const PointRef& x, double r) {
  if (!(r > 0)) throw std::invalid_argument("lower_density: r must be positive");
  return ball_mass(mu, x, r) / r;
}

void lipschitz_knots(const GenParams& params, std::uint64_t seed, std::vector<double>& t,
                     std::vector<double>& f) {
  if (!params.knot_t.empty()) {
    if (params.knot_t.size() != params.knot_f.size() || params.knot_t.size() < 2)
      throw std::invalid_argument("lipschitz_graph: knot_t and knot_f must match, >= 2 knots");
    t = params.knot_t;
    f = params.knot_f;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (!(t[i] > t[i - 1])) throw std::invalid_argument("lipschitz_graph: knots must increase");
      const double slope = std::abs((f[i] - f[i - 1]) / (t[i] - t[i - 1]));
      if (slope > params.lipschitz + 1e-12)
        throw std::invalid_argument("lipschitz_graph: knots exceed the stated Lipschitz constant");
    }
    return;
  }
  if (params.pieces < 1) throw std::invalid_argument("lipschitz_graph: pieces must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> slope(-params.lipschitz, params.lipschitz);
  t.assign(1, 0.0);
  f.assign(1, 0.0);
  for (int p = 0; p < params.pieces; ++p) {
    const double s = params.zigzag ? (p % 2 == 0 ? params.lipschitz : -params.lipschitz) : slope(rng);
    const double t1 = static_cast<double>(p + 1) / params.pieces;
    f.push_back(f.back() + s * (t1 - t.back()));
    t.push_back(t1);
  }
}

namespace {

DiscreteMeasure uniform_weights(PointSet atoms) {
  const auto n = atoms.cols();
  return DiscreteMeasure(std::move(atoms), Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

double eval_piecewise(const std::vector<double>& t, const std::vector<double>& f, double x) {
  auto it = std::upper_bound(t.begin(), t.end(), x);
  std::size_t i = it == t.begin() ? 1 : static_cast<std::size_t>(it - t.begin());
  i = std::clamp<std::size_t>(i, 1, t.size() - 1);
  const double a = (x - t[i - 1]) / (t[i] - t[i - 1]);
  return f[i - 1] + a * (f[i] - f[i - 1]);
}

}  // namespace

DiscreteMeasure generate(const std::string& kind, const GenParams& p, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
  if (p.dim < 1) throw std::invalid_argument("generate: dim must be >= 1");
  const int d = p.dim;
  if (kind == "segment") {
    PointSet a = PointSet::Zero(d, n);
    for (int i = 0; i < n; ++i) a(0, i) = n == 1 ? 0.0 : p.length * i / (n - 1);
    return uniform_weights(std::move(a));
  }
  if (kind == "circle") {
    if (d < 2) throw std::invalid_argument("generate: circle needs dim >= 2");
    PointSet a = PointSet::Zero(d, n);
    for (int i = 0; i < n; ++i) {
      const double th = 2.0 * std::numbers::pi * i / n;
      a(0, i) = p.radius * std::cos(th);
      a(1, i) = p.radius * std::sin(th);
    }
    return uniform_weights(std::move(a));
  }
  if (kind == "lipschitz_graph") {
    if (d < 2) throw std::invalid_argument("generate: lipschitz_graph needs dim >= 2");
    std::vector<double> t, f;
    lipschitz_knots(p, seed, t, f);
    const double t0 = t.front(), t1 = t.back();
    PointSet a = PointSet::Zero(d, n);
    for (int i = 0; i < n; ++i) {
      const double x = n == 1 ? t0 : t0 + (t1 - t0) * i / (n - 1);
      a(0, i) = x;
      a(1, i) = eval_piecewise(t, f, x);
    }
    return uniform_weights(std::move(a));
  }
  if (kind == "cantor4") {
    if (d < 2) throw std::invalid_argument("generate: cantor4 needs dim >= 2");
    if (p.depth < 0 || p.depth > 12) throw std::invalid_argument("generate: cantor4 depth in [0, 12]");
    // Centres of the 4^depth squares; n is ignored.
    const long count = 1L << (2 * p.depth);
    PointSet a = PointSet::Zero(d, count);
    for (long code = 0; code < count; ++code) {
      double x = 0.0, y = 0.0, side = 1.0;
      for (int lvl = 0; lvl < p.depth; ++lvl) {
        const long digit = (code >> (2 * (p.depth - 1 - lvl))) & 3L;
        side /= 4.0;
        x += (digit & 1L) ? 3.0 * side : 0.0;
        y += (digit & 2L) ? 3.0 * side : 0.0;
      }
      a(0, code) = x + side / 2.0;
      a(1, code) = y + side / 2.0;
    }
    return uniform_weights(std::move(a));
  }
  if (kind == "plane_stack") {
    if (d < 3) throw std::invalid_argument("generate: plane_stack needs dim >= 3");
    if (p.planes < 1) throw std::invalid_argument("generate: plane_stack needs planes >= 1");
    std::vector<double> c = p.coefficients;
    if (c.empty())
      for (int i = 0; i < p.planes; ++i) c.push_back(std::ldexp(1.0, -i));
    if (static_cast<int>(c.size()) != p.planes)
      throw std::invalid_argument("generate: plane_stack coefficient count != planes");
    double csum = 0.0;
    for (double ci : c) {
      if (!(ci > 0) || !std::isfinite(ci))
        throw std::invalid_argument("generate: plane_stack coefficients must be positive and finite");
      csum += ci;
    }
    if (!std::isfinite(csum)) throw std::invalid_argument("generate: plane_stack coefficients not summable");
    const int side = std::max(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
    const long per = static_cast<long>(side) * side;
    PointSet a = PointSet::Zero(d, per * p.planes);
    Eigen::VectorXd w(per * p.planes);
    for (int i = 0; i < p.planes; ++i) {
      // Offset x_i lies in the orthogonal complement of span{e1, e2}.
      const int axis = 2 + (i == 0 ? 0 : (i - 1) % (d - 2));
      const double off = p.plane_gap * i;
      for (int gx = 0; gx < side; ++gx)
        for (int gy = 0; gy < side; ++gy) {
          const long col = i * per + gx * side + gy;
          a(0, col) = static_cast<double>(gx) / (side - 1);
          a(1, col) = static_cast<double>(gy) / (side - 1);
          a(axis, col) = off;
          w[col] = c[static_cast<std::size_t>(i)] / static_cast<double>(per);
        }
    }
    return DiscreteMeasure(std::move(a), std::move(w));
  }
  throw std::invalid_argument("generate: unknown kind '" + kind + "'");
}

DiscreteMeasure mix(const DiscreteMeasure& mu, double a, const DiscreteMeasure& nu, double b) {
  if (mu.dim() != nu.dim()) throw DimensionError("mix: dimension mismatch");
  PointSet atoms(mu.dim(), mu.size() + nu.size());
  atoms << mu.atoms, nu.atoms;
  Eigen::VectorXd w(mu.size() + nu.size());
  w << a * mu.weights, b * nu.weights;
  return DiscreteMeasure(std::move(atoms), std::move(w));
}

DiscreteMeasure transform(const DiscreteMeasure& mu, const Eigen::MatrixXd& linear,
                          const Point& shift) {
  if (linear.cols() != mu.dim() || linear.rows() != shift.size())
    throw DimensionError("transform: shape mismatch");
  PointSet a = linear * mu.atoms;
  a.colwise() += shift;
  return DiscreteMeasure(std::move(a), mu.weights);
}

}  // namespace rect
