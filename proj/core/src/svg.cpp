#include "rectify/svg.hpp"

#include "rectify/io.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace rect {

namespace {

struct Frame {
  double x0 = 0, y0 = 0, w = 1, h = 1;
  double stroke = 0.002;
};

Frame fit(const PointSet& p, int ax0, int ax1) {
  Frame f;
  if (p.cols() == 0) return f;
  double lx = std::numeric_limits<double>::infinity(), ly = lx, hx = -lx, hy = -lx;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    lx = std::min(lx, p(ax0, j));
    hx = std::max(hx, p(ax0, j));
    ly = std::min(ly, p(ax1, j));
    hy = std::max(hy, p(ax1, j));
  }
  double w = hx - lx, h = hy - ly;
  if (!(std::max(w, h) > 0)) {
    f.x0 = lx - 0.5;
    f.y0 = ly - 0.5;
    return f;
  }
  // A flat box keeps a sliver of height so the picture stays visible.
  w = std::max(w, 1e-3 * h);
  h = std::max(h, 1e-3 * w);
  f.x0 = lx - 0.05 * w;
  f.y0 = ly - 0.05 * h;
  f.w = 1.1 * w;
  f.h = 1.1 * h;
  f.stroke = 0.002 * std::max(f.w, f.h);
  return f;
}

void check_axes(Eigen::Index d, int ax0, int ax1) {
  if (ax0 < 0 || ax1 < 0 || ax0 >= d || ax1 >= d || ax0 == ax1)
    throw std::invalid_argument("render: need two distinct axes below the dimension");
}

std::string header(const Frame& f) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + format_number(f.x0) + " " + format_number(f.y0) +
         " " + format_number(f.w) + " " + format_number(f.h) + "\">\n";
}

}  // namespace

std::string render_svg(const CurveState& s, int ax0, int ax1) {
  const PointSet& p = s.nodes;
  if (p.cols() > 0) check_axes(p.rows(), ax0, ax1);
  const Frame f = fit(p, ax0, ax1);
  const std::string sw = format_number(f.stroke);
  const auto X = [&](std::size_t n) { return format_number(p(ax0, static_cast<Eigen::Index>(n))); };
  const auto Y = [&](std::size_t n) { return format_number(p(ax1, static_cast<Eigen::Index>(n))); };

  std::string out = header(f);
  if (!s.records.empty()) {
    for (const auto& e : s.record(s.k_max).edges)
      out += "<line x1=\"" + X(e.first) + "\" y1=\"" + Y(e.first) + "\" x2=\"" + X(e.second) + "\" y2=\"" +
             Y(e.second) + "\" stroke=\"black\" stroke-width=\"" + sw + "\"/>\n";
  }
  for (const auto& b : s.bridges) {
    std::vector<std::size_t> path(b.chain_nodes_a.rbegin(), b.chain_nodes_a.rend());
    path.insert(path.end(), b.chain_nodes_b.begin(), b.chain_nodes_b.end());
    out += "<polyline fill=\"none\" stroke=\"" + std::string(b.flat ? "steelblue" : "firebrick") +
           "\" stroke-dasharray=\"" + format_number(4 * f.stroke) + "\" stroke-width=\"" + sw + "\" points=\"";
    for (std::size_t i = 0; i < path.size(); ++i) out += (i ? " " : "") + X(path[i]) + "," + Y(path[i]);
    out += "\"/>\n";
  }
  const std::string rad = format_number(1.5 * f.stroke);
  for (Eigen::Index n = 0; n < p.cols(); ++n)
    out += "<circle cx=\"" + X(static_cast<std::size_t>(n)) + "\" cy=\"" + Y(static_cast<std::size_t>(n)) +
           "\" r=\"" + rad + "\"/>\n";
  return out + "</svg>\n";
}

std::string render_labels_svg(const DiscreteMeasure& mu, const std::vector<ConeLabel>& labels, int ax0, int ax1) {
  if (labels.size() != static_cast<std::size_t>(mu.size()))
    throw std::invalid_argument("render_labels_svg: one label per atom required");
  if (mu.size() > 0) check_axes(mu.dim(), ax0, ax1);
  const Frame f = fit(mu.atoms, ax0, ax1);
  const std::string rad = format_number(2 * f.stroke);
  std::string out = header(f);
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const bool pos = labels[static_cast<std::size_t>(i)].positive;
    out += "<circle cx=\"" + format_number(mu.atoms(ax0, i)) + "\" cy=\"" + format_number(mu.atoms(ax1, i)) +
           "\" r=\"" + rad + "\" fill=\"" + (pos ? "seagreen" : "none") + "\" stroke=\"" +
           (pos ? "seagreen" : "gray") + "\" stroke-width=\"" + format_number(0.5 * f.stroke) + "\"/>\n";
  }
  return out + "</svg>\n";
}

}  // namespace rect
