#pragma once

// Brute-force reference computations that do not call into the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline double dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double ball_mass(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& w, const Eigen::VectorXd& c,
                        double r) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < atoms.cols(); ++i)
    if (dist(atoms.col(i), c) <= r + 1e-12) m += w[i];
  return m;
}

inline double excess(const Eigen::MatrixXd& S, const Eigen::MatrixXd& T) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < S.cols(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < T.cols(); ++j) best = std::min(best, dist(S.col(i), T.col(j)));
    e = std::max(e, best);
  }
  return e;
}

inline double hausdorff(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  return std::max(excess(A, B), excess(B, A));
}

// Random orthogonal matrix from the QR factor of a Gaussian matrix.
inline Eigen::MatrixXd random_rotation(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  return Q;
}

// dist(w, span(B)) by least squares.
inline double dist_to_span(const Eigen::VectorXd& w, const Eigen::MatrixXd& B) {
  const Eigen::VectorXd coef = B.colPivHouseholderQr().solve(w);
  return (w - B * coef).norm();
}

// Planar line {p : <p, n(theta)> = c}; minimum over a grid of angle/offset
// pairs of the weighted mean squared distance.
struct GridLine {
  double theta = 0.0, offset = 0.0, value = std::numeric_limits<double>::infinity();
};

inline GridLine planar_l2_grid(const Eigen::MatrixXd& pts, const Eigen::VectorXd& w, int angles, int offsets) {
  GridLine best;
  const double mass = w.sum();
  for (int a = 0; a < angles; ++a) {
    const double th = std::numbers::pi * a / angles;
    const double nx = -std::sin(th), ny = std::cos(th);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      const double s = nx * pts(0, i) + ny * pts(1, i);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    for (int o = 0; o < offsets; ++o) {
      const double c = offsets == 1 ? lo : lo + (hi - lo) * o / (offsets - 1);
      double s2 = 0.0;
      for (Eigen::Index i = 0; i < pts.cols(); ++i) {
        const double dd = nx * pts(0, i) + ny * pts(1, i) - c;
        s2 += w[i] * dd * dd;
      }
      s2 /= mass;
      if (s2 < best.value) best = {th, c, s2};
    }
  }
  return best;
}

// Minimal strip half-width of planar points over an angle grid.
inline double planar_sup_grid(const Eigen::MatrixXd& pts, int angles) {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < angles; ++a) {
    const double th = std::numbers::pi * a / angles;
    const double nx = -std::sin(th), ny = std::cos(th);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      const double s = nx * pts(0, i) + ny * pts(1, i);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    best = std::min(best, (hi - lo) / 2.0);
  }
  return best;
}

inline double point_segment(const Eigen::VectorXd& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            int samples = 20001) {
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double t = static_cast<double>(s) / (samples - 1);
    best = std::min(best, dist(p, (1 - t) * a + t * b));
  }
  return best;
}

inline Eigen::MatrixXd random_points(int d, int n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd P(d, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i) P(i, j) = u(rng);
  return P;
}

}  // namespace oracle
