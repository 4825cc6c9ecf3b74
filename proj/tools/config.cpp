#include "config.hpp"

#include "rectify/io.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <cmath>
#include <set>

namespace rect::cli {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& msg) { throw InputError(where + ": " + msg); }

class Section {
 public:
  Section(const toml::table& t, std::string name, std::set<std::string> allowed)
      : t_(t), name_(std::move(name)) {
    for (const auto& [k, v] : t_) {
      (void)v;
      if (!allowed.count(std::string(k.str()))) bad(name_, "unknown key \"" + std::string(k.str()) + "\"");
    }
  }

  void get(const char* key, double& out) const {
    if (const auto* n = t_.get(key)) {
      if (const auto v = n->value<double>(); v && std::isfinite(*v)) out = *v;
      else bad(where(key), "expected a finite number");
    }
  }
  void get(const char* key, int& out) const {
    if (const auto* n = t_.get(key)) {
      if (!n->is_integer()) bad(where(key), "expected an integer");
      const auto v = n->value<std::int64_t>();
      if (*v < -(1 << 30) || *v > (1 << 30)) bad(where(key), "out of range");
      out = static_cast<int>(*v);
    }
  }
  void get(const char* key, std::uint64_t& out) const {
    if (const auto* n = t_.get(key)) {
      if (!n->is_integer() || *n->value<std::int64_t>() < 0) bad(where(key), "expected a non-negative integer");
      out = static_cast<std::uint64_t>(*n->value<std::int64_t>());
    }
  }
  void get(const char* key, bool& out) const {
    if (const auto* n = t_.get(key)) {
      if (!n->is_boolean()) bad(where(key), "expected a boolean");
      out = *n->value<bool>();
    }
  }
  void get(const char* key, std::string& out) const {
    if (const auto* n = t_.get(key)) {
      if (!n->is_string()) bad(where(key), "expected a string");
      out = *n->value<std::string>();
    }
  }
  void get(const char* key, std::vector<double>& out) const {
    if (const auto* n = t_.get(key)) {
      const auto* arr = n->as_array();
      if (!arr) bad(where(key), "expected an array of numbers");
      out.clear();
      for (const auto& e : *arr) {
        const auto v = e.value<double>();
        if (!v || !std::isfinite(*v)) bad(where(key), "expected an array of numbers");
        out.push_back(*v);
      }
    }
  }

 private:
  std::string where(const char* key) const { return name_ + "." + key; }
  const toml::table& t_;
  std::string name_;
};

const toml::table* sub(const toml::table& root, const char* key) {
  const auto* n = root.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) bad(key, "expected a table");
  return n->as_table();
}

void require(bool ok, const std::string& where, const std::string& msg) {
  if (!ok) bad(where, msg);
}

}  // namespace

void validate(const MeasureConfig& c) {
  if (c.file.empty()) {
    static const std::set<std::string> kinds{"segment", "circle", "lipschitz_graph", "cantor4", "plane_stack"};
    require(kinds.count(c.kind) > 0, "measure.kind", "unknown generator \"" + c.kind + "\"");
    require(c.n >= 1, "measure.n", "must be >= 1");
  }
  require(c.params.dim >= 1, "measure.dim", "must be >= 1");
  require(c.params.lipschitz >= 0, "measure.lipschitz", "must be >= 0");
  require(c.params.pieces >= 1, "measure.pieces", "must be >= 1");
  require(c.params.depth >= 0 && c.params.depth <= 12, "measure.depth", "must lie in [0, 12]");
  require(c.params.planes >= 1, "measure.planes", "must be >= 1");
}

void validate(const FamilyConfig& c) {
  require(c.k_max >= c.k0, "family.k_max", "must be >= k0");
  require(c.J >= 1, "family.J", "must be >= 1");
  require(c.lambda2 > min_lambda2(c.J), "family.lambda2", "must exceed (1 - 2^-J)^-2");
}

void validate(const CurveConfig& c) {
  require(c.delta > 0 && c.delta < 1, "curve.delta", "must lie in (0, 1)");
  require(c.k_max >= 0, "curve.k_max", "must be >= 0");
  require(c.epsilon > 0, "curve.epsilon", "must be positive");
  require(c.cstar == 0 || c.cstar > 1, "curve.cstar", "must be 0 (fit) or exceed 1");
  require(c.r0 >= 0, "curve.r0", "must be >= 0");
}

void validate(const JonesConfig& c) {
  require(c.samples >= 1, "jones.samples", "must be >= 1");
  require(c.slope_threshold >= 0, "jones.slope_threshold", "must be >= 0");
}

void validate(const TreesConfig& c, const FamilyConfig& f) {
  require(f.J >= 10, "family.J", "trees need J >= 10");
  require(c.top_k >= f.k0 && c.top_k <= f.k_max, "trees.top", "level outside the family");
  require(c.c >= 0 && c.c <= 1.0 / (4.0 * f.lambda2) * (1 + 1e-12), "trees.c", "must lie in (0, 1/(4 lambda2)]");
  require(c.N >= 0, "trees.N", "must be >= 0");
  require(c.eps > 0, "trees.eps", "must be positive");
  require(c.a >= 0, "trees.a", "must be >= 0");
}

void validate(const ConesConfig& c) {
  require(c.m >= 1, "cones.m", "must be >= 1");
  require(!c.alphas.empty(), "cones.alphas", "must be non-empty");
  for (double a : c.alphas) require(a > 0 && a < 1, "cones.alphas", "entries must lie in (0, 1)");
  for (double r : c.radii) require(r > 0, "cones.radii", "entries must be positive");
  require(c.threshold > 0 && c.threshold <= 1, "cones.threshold", "must lie in (0, 1]");
  const bool known = c.planes == "coordinate" || c.planes == "local" || c.planes.rfind("angles:", 0) == 0 ||
                     c.planes.rfind("local:", 0) == 0;
  require(known, "cones.planes", "expected coordinate, local, angles:<count> or local:<radius>");
}

std::vector<MPlane> make_planes(const ConesConfig& c, const DiscreteMeasure& mu) {
  const int d = static_cast<int>(mu.dim());
  if (c.m >= d) bad("cones.m", "must be below the dimension");
  if (c.planes == "coordinate") return coordinate_plane_grid(d, c.m);
  if (c.planes == "local") {
    // Neighbourhoods at the middle of the radius grid.
    const auto radii = c.radii.empty() ? default_radius_grid(mu) : c.radii;
    return local_principal_planes(mu, radii[radii.size() / 2], c.m);
  }
  const auto colon = c.planes.find(':');
  const std::string arg = c.planes.substr(colon + 1);
  try {
    if (c.planes.rfind("angles:", 0) == 0) {
      if (c.m != 1) bad("cones.planes", "angles grids are lines (m = 1)");
      return angle_line_grid(d, std::stoi(arg));
    }
    const auto planes = local_principal_planes(mu, std::stod(arg), c.m);
    if (planes.empty()) bad("cones.planes", "no local plane found at radius " + arg);
    return planes;
  } catch (const std::logic_error&) {
    bad("cones.planes", "cannot read \"" + arg + "\"");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    const auto& src = e.source().begin;
    bad(origin, std::string(e.description()) + " at line " + std::to_string(src.line));
  }
  ExperimentConfig cfg;
  const Section top(root, origin,
                    {"seed", "threads", "out_dir", "svg", "measure", "family", "curve", "jones", "trees", "cones"});
  top.get("seed", cfg.seed);
  top.get("threads", cfg.threads);
  top.get("out_dir", cfg.out_dir);
  top.get("svg", cfg.svg);
  require(cfg.threads >= 1, "threads", "must be >= 1");

  if (const auto* t = sub(root, "measure")) {
    const Section s(*t, "measure",
                    {"kind", "file", "n", "dim", "length", "radius", "knot_t", "knot_f", "lipschitz", "pieces",
                     "zigzag", "depth", "planes", "coefficients", "plane_gap"});
    auto& m = cfg.measure;
    s.get("kind", m.kind);
    s.get("file", m.file);
    s.get("n", m.n);
    s.get("dim", m.params.dim);
    s.get("length", m.params.length);
    s.get("radius", m.params.radius);
    s.get("knot_t", m.params.knot_t);
    s.get("knot_f", m.params.knot_f);
    s.get("lipschitz", m.params.lipschitz);
    s.get("pieces", m.params.pieces);
    s.get("zigzag", m.params.zigzag);
    s.get("depth", m.params.depth);
    s.get("planes", m.params.planes);
    s.get("coefficients", m.params.coefficients);
    s.get("plane_gap", m.params.plane_gap);
  }
  validate(cfg.measure);

  if (const auto* t = sub(root, "family")) {
    const Section s(*t, "family", {"k0", "k_max", "lambda2", "J"});
    FamilyConfig f;
    s.get("k0", f.k0);
    s.get("k_max", f.k_max);
    s.get("lambda2", f.lambda2);
    s.get("J", f.J);
    validate(f);
    cfg.family = f;
  }
  if (const auto* t = sub(root, "curve")) {
    const Section s(*t, "curve", {"delta", "k_max", "epsilon", "cstar", "r0"});
    CurveConfig c;
    s.get("delta", c.delta);
    s.get("k_max", c.k_max);
    s.get("epsilon", c.epsilon);
    s.get("cstar", c.cstar);
    s.get("r0", c.r0);
    validate(c);
    cfg.curve = c;
  }
  if (const auto* t = sub(root, "jones")) {
    if (!cfg.family) bad("jones", "needs a [family] section");
    const Section s(*t, "jones", {"samples", "slope_threshold"});
    JonesConfig j;
    s.get("samples", j.samples);
    s.get("slope_threshold", j.slope_threshold);
    validate(j);
    cfg.jones = j;
  }
  if (const auto* t = sub(root, "trees")) {
    if (!cfg.family) bad("trees", "needs a [family] section");
    const Section s(*t, "trees", {"top_k", "top_j", "c", "N", "eps", "a"});
    TreesConfig tr;
    tr.top_k = cfg.family->k0;
    int top_j = 0;
    s.get("top_k", tr.top_k);
    s.get("top_j", top_j);
    require(top_j >= 0, "trees.top_j", "must be >= 0");
    tr.top_j = static_cast<std::size_t>(top_j);
    s.get("c", tr.c);
    s.get("N", tr.N);
    s.get("eps", tr.eps);
    s.get("a", tr.a);
    validate(tr, *cfg.family);
    cfg.trees = tr;
  }
  if (const auto* t = sub(root, "cones")) {
    const Section s(*t, "cones", {"m", "planes", "alphas", "radii", "threshold"});
    ConesConfig c;
    s.get("m", c.m);
    s.get("planes", c.planes);
    s.get("alphas", c.alphas);
    s.get("radii", c.radii);
    s.get("threshold", c.threshold);
    validate(c);
    cfg.cones = c;
  }
  return cfg;
}

}  // namespace rect::cli
