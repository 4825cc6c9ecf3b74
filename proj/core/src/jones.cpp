#include "rectify/jones.hpp"

#include "rectify/beta.hpp"
#include "rectify/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rect {

BallTermCache::BallTermCache(const DiscreteMeasure& mu, const MultiresolutionFamily& fam)
    : mu_(mu), fam_(fam), atoms_(mu.atoms) {
  for (int k = fam.k0; k <= fam.k_max; ++k) {
    const auto& lvl = fam.level(k);
    PointSet c(mu.dim(), static_cast<Eigen::Index>(lvl.indices.size()));
    for (std::size_t j = 0; j < lvl.indices.size(); ++j)
      c.col(static_cast<Eigen::Index>(j)) = mu.atoms.col(static_cast<Eigen::Index>(lvl.indices[j]));
    centers_.push_back(std::move(c));
    entries_.emplace_back(lvl.indices.size());
  }
  // Indices hold references into centers_, so build them after it stops growing.
  for (const auto& c : centers_) center_index_.push_back(std::make_unique<BallIndex>(c));
}

BallTermCache::Entry BallTermCache::compute(int k, std::size_t j) const {
  const auto c = centers_[static_cast<std::size_t>(k - fam_.k0)].col(static_cast<Eigen::Index>(j));
  const double rad = fam_.radius(k);
  Entry e;
  e.diam = 2.0 * rad;
  for (auto a : atoms_.query(c, rad)) e.mass += mu_.weights[static_cast<Eigen::Index>(a)];
  e.beta2 = beta2_atoms(mu_, atoms_.query(c, 2.0 * rad), 4.0 * rad).value;
  e.term = e.mass > 0 ? e.beta2 * e.beta2 * e.diam / e.mass : 0.0;
  return e;
}

const BallTermCache::Entry& BallTermCache::get(int k, std::size_t j) {
  auto& slot = entries_.at(static_cast<std::size_t>(k - fam_.k0)).at(j);
  if (!slot) slot = compute(k, j);
  return *slot;
}

void BallTermCache::prefetch(const std::vector<std::pair<int, std::size_t>>& balls, int threads) {
  std::vector<std::pair<int, std::size_t>> todo;
  for (const auto& [k, j] : balls)
    if (!entries_.at(static_cast<std::size_t>(k - fam_.k0)).at(j)) todo.emplace_back(k, j);
  std::sort(todo.begin(), todo.end());
  todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
  std::vector<Entry> out(todo.size());
  parallel_for(todo.size(), threads, [&](std::size_t i) { out[i] = compute(todo[i].first, todo[i].second); });
  for (std::size_t i = 0; i < todo.size(); ++i)
    entries_[static_cast<std::size_t>(todo[i].first - fam_.k0)][todo[i].second] = out[i];
}

std::vector<std::size_t> BallTermCache::balls_containing(int k, const PointRef& x) const {
  return center_index_.at(static_cast<std::size_t>(k - fam_.k0))->query(x, fam_.radius(k));
}

JonesProfile jones_profile(BallTermCache& cache, const PointRef& x, double r) {
  if (!(r > 0)) throw std::invalid_argument("jones_profile: r must be positive");
  const auto& fam = cache.family();
  JonesProfile p;
  p.x = x;
  p.r = r;
  p.k0 = fam.k0;
  p.k_max = fam.k_max;
  p.lambda2 = fam.lambda2;
  bool inside = false;
  double acc = 0.0;
  for (int k = fam.k0; k <= fam.k_max; ++k) {
    const auto balls = cache.balls_containing(k, x);
    inside = inside || !balls.empty();
    if (fam.radius(k) <= r) {
      for (auto j : balls) {
        const double v = cache.get(k, j).term;
        p.terms.push_back({k, j, v});
        acc += v;
      }
    }
    p.partial_sums.push_back(acc);
  }
  p.outside = !inside;
  return p;
}

JonesProfile jones_profile(const DiscreteMeasure& mu, const MultiresolutionFamily& fam,
                           const PointRef& x, double r) {
  BallTermCache cache(mu, fam);
  return jones_profile(cache, x, r);
}

double truncation_invariance_gap(const JonesProfile& a, const JonesProfile& b) {
  if (a.k0 != b.k0 || a.k_max != b.k_max || a.lambda2 != b.lambda2)
    throw std::invalid_argument("truncation_invariance_gap: profiles from different families");
  if (a.x.size() != b.x.size() || a.x != b.x)
    throw std::invalid_argument("truncation_invariance_gap: profiles at different points");
  const JonesProfile& big = a.r >= b.r ? a : b;
  const double rp = std::min(a.r, b.r);
  double gap = 0.0;
  for (const auto& t : big.terms)
    if (big.lambda2 * std::ldexp(1.0, -t.k) > rp) gap += t.value;
  return gap;
}

const char* to_string(JonesLabel l) { return l == JonesLabel::bounded ? "bounded" : "divergent"; }

double growth_slope(const JonesProfile& p) {
  const std::size_t L = p.partial_sums.size();
  if (L < 4) throw std::invalid_argument("growth_slope: need at least 4 scales");
  const std::size_t h = (L + 1) / 2;
  const std::size_t start = L - h;
  double mk = 0.0, ms = 0.0;
  for (std::size_t i = start; i < L; ++i) {
    mk += static_cast<double>(i);
    ms += p.partial_sums[i];
  }
  mk /= static_cast<double>(h);
  ms /= static_cast<double>(h);
  double num = 0.0, den = 0.0;
  for (std::size_t i = start; i < L; ++i) {
    const double dk = static_cast<double>(i) - mk;
    num += dk * (p.partial_sums[i] - ms);
    den += dk * dk;
  }
  return num / den;
}

JonesClassification classify(const DiscreteMeasure& mu, const MultiresolutionFamily& fam,
                             const std::vector<std::size_t>& sample_points, double slope_threshold,
                             int threads) {
  if (fam.k_max - fam.k0 + 1 < 4) throw std::invalid_argument("classify: need at least 4 scales");
  BallTermCache cache(mu, fam);
  std::vector<std::pair<int, std::size_t>> needed;
  for (auto i : sample_points) {
    if (i >= static_cast<std::size_t>(mu.size())) throw std::out_of_range("classify: sample index");
    for (int k = fam.k0; k <= fam.k_max; ++k)
      for (auto j : cache.balls_containing(k, mu.atoms.col(static_cast<Eigen::Index>(i))))
        needed.emplace_back(k, j);
  }
  cache.prefetch(needed, threads);
  JonesClassification out;
  out.points = sample_points;
  for (auto i : sample_points) {
    auto prof = jones_profile(cache, mu.atoms.col(static_cast<Eigen::Index>(i)));
    const double s = growth_slope(prof);
    out.slopes.push_back(s);
    out.labels.push_back(s > slope_threshold ? JonesLabel::divergent : JonesLabel::bounded);
    out.profiles.push_back(std::move(prof));
  }
  return out;
}

}  // namespace rect
