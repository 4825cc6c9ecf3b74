#include "rectify/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rect {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json point_json(const PointRef& p) {
  json a = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

json points_json(const PointSet& pts) {
  json a = json::array();
  for (Eigen::Index j = 0; j < pts.cols(); ++j) a.push_back(point_json(pts.col(j)));
  return a;
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

double finite_number(const json& v, const char* what) {
  if (!v.is_number()) throw InputError(std::string(what) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(std::string(what) + ": non-finite number");
  return d;
}

const json& field(const json& o, const char* key, const char* what) {
  if (!o.is_object() || !o.contains(key))
    throw InputError(std::string(what) + ": missing field \"" + key + "\"");
  return o.at(key);
}

int int_field(const json& o, const char* key, const char* what) {
  const json& v = field(o, key, what);
  if (!v.is_number_integer()) throw InputError(std::string(what) + ": \"" + key + "\" must be an integer");
  return v.get<int>();
}

PointSet points_from(const json& a, const char* what, Eigen::Index dim = -1) {
  if (!a.is_array()) throw InputError(std::string(what) + ": expected an array of points");
  if (a.empty()) return PointSet(dim < 0 ? 0 : dim, 0);
  if (!a.front().is_array()) throw InputError(std::string(what) + ": points must be arrays");
  const auto d = static_cast<Eigen::Index>(a.front().size());
  if (d < 1) throw InputError(std::string(what) + ": empty point");
  if (dim >= 0 && d != dim) throw InputError(std::string(what) + ": dimension mismatch");
  PointSet p(d, static_cast<Eigen::Index>(a.size()));
  for (std::size_t j = 0; j < a.size(); ++j) {
    const json& pt = a[j];
    if (!pt.is_array() || static_cast<Eigen::Index>(pt.size()) != d)
      throw InputError(std::string(what) + ": point " + std::to_string(j) + " has the wrong dimension");
    for (Eigen::Index i = 0; i < d; ++i)
      p(i, static_cast<Eigen::Index>(j)) = finite_number(pt[static_cast<std::size_t>(i)], what);
  }
  return p;
}

std::string key(const BallId& b) { return std::to_string(b.k) + ":" + std::to_string(b.j); }

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed: " + path);
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string points_to_json(const PointSet& pts) {
  if (!pts.allFinite()) throw std::invalid_argument("points_to_json: non-finite coordinate");
  return points_json(pts).dump() + "\n";
}

PointSet points_from_json(const std::string& text) { return points_from(parse(text, "points"), "points"); }

std::string measure_to_json(const DiscreteMeasure& mu) {
  json o;
  o["dim"] = mu.dim();
  o["atoms"] = points_json(mu.atoms);
  json w = json::array();
  for (Eigen::Index i = 0; i < mu.size(); ++i) w.push_back(mu.weights[i]);
  o["weights"] = w;
  return o.dump() + "\n";
}

DiscreteMeasure measure_from_json(const std::string& text) {
  const json o = parse(text, "measure");
  const int d = int_field(o, "dim", "measure");
  if (d < 1) throw InputError("measure: dim must be >= 1");
  PointSet atoms = points_from(field(o, "atoms", "measure"), "measure", d);
  const json& w = field(o, "weights", "measure");
  if (!w.is_array() || static_cast<Eigen::Index>(w.size()) != atoms.cols())
    throw InputError("measure: weights must match the atom count");
  Eigen::VectorXd weights(atoms.cols());
  for (std::size_t i = 0; i < w.size(); ++i) weights[static_cast<Eigen::Index>(i)] = finite_number(w[i], "measure");
  try {
    return DiscreteMeasure(std::move(atoms), std::move(weights));
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("measure: ") + e.what());
  }
}

std::string family_to_json(const MultiresolutionFamily& fam) {
  json o;
  o["k0"] = fam.k0;
  o["k_max"] = fam.k_max;
  o["lambda2"] = fam.lambda2;
  o["J"] = fam.J;
  json levels = json::array();
  for (const auto& l : fam.levels) levels.push_back({{"k", l.k}, {"indices", l.indices}});
  o["levels"] = levels;
  return o.dump() + "\n";
}

MultiresolutionFamily family_from_json(const std::string& text, const DiscreteMeasure& mu) {
  const json o = parse(text, "family");
  MultiresolutionFamily fam;
  fam.k0 = int_field(o, "k0", "family");
  fam.lambda2 = finite_number(field(o, "lambda2", "family"), "family");
  fam.J = o.contains("J") ? int_field(o, "J", "family") : kDefaultJ;
  const json& levels = field(o, "levels", "family");
  if (!levels.is_array() || levels.empty()) throw InputError("family: levels must be a non-empty array");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    NetLevel l;
    l.k = int_field(levels[i], "k", "family");
    if (l.k != fam.k0 + static_cast<int>(i)) throw InputError("family: levels must be consecutive from k0");
    l.separation = std::ldexp(1.0, -l.k);
    const json& idx = field(levels[i], "indices", "family");
    if (!idx.is_array() || idx.empty()) throw InputError("family: level indices must be a non-empty array");
    for (const auto& v : idx) {
      if (!v.is_number_unsigned() || v.get<std::size_t>() >= static_cast<std::size_t>(mu.size()))
        throw InputError("family: atom index out of range");
      l.indices.push_back(v.get<std::size_t>());
    }
    fam.levels.push_back(std::move(l));
  }
  fam.k_max = fam.k0 + static_cast<int>(fam.levels.size()) - 1;
  if (o.contains("k_max") && int_field(o, "k_max", "family") != fam.k_max)
    throw InputError("family: k_max does not match the levels");
  if (!(fam.lambda2 > min_lambda2(fam.J))) throw InputError("family: lambda2 must exceed (1 - 2^-J)^-2");
  return fam;
}

std::string hierarchy_to_json(const NetHierarchy& h) {
  json o;
  o["r0"] = h.r0;
  o["delta"] = h.delta;
  o["cstar"] = h.cstar;
  json g = json::array();
  for (const auto& V : h.generations) g.push_back(points_json(V));
  o["generations"] = g;
  return o.dump() + "\n";
}

NetHierarchy hierarchy_from_json(const std::string& text) {
  const json o = parse(text, "hierarchy");
  NetHierarchy h;
  h.r0 = finite_number(field(o, "r0", "hierarchy"), "hierarchy");
  h.delta = finite_number(field(o, "delta", "hierarchy"), "hierarchy");
  h.cstar = finite_number(field(o, "cstar", "hierarchy"), "hierarchy");
  if (!(h.r0 > 0)) throw InputError("hierarchy: r0 must be positive");
  if (!(h.delta > 0 && h.delta < 1)) throw InputError("hierarchy: delta must lie in (0, 1)");
  if (!(h.cstar > 1)) throw InputError("hierarchy: cstar must exceed 1");
  const json& g = field(o, "generations", "hierarchy");
  if (!g.is_array() || g.empty()) throw InputError("hierarchy: generations must be a non-empty array");
  Eigen::Index d = -1;
  for (const auto& V : g) {
    h.generations.push_back(points_from(V, "hierarchy", d));
    if (h.generations.back().cols() == 0) throw InputError("hierarchy: empty generation");
    d = h.generations.back().rows();
  }
  return h;
}

std::string gamma_to_json(const CurveState& s, const LengthLedger& ledger, const CurveChecks& checks) {
  json o;
  o["r0"] = s.hierarchy.r0;
  o["delta"] = s.hierarchy.delta;
  o["cstar"] = s.hierarchy.cstar;
  o["epsilon"] = s.epsilon;
  o["k0"] = s.k0;
  o["k_max"] = s.k_max;
  o["singleton"] = s.singleton;
  o["nodes"] = points_json(s.nodes);
  json edges = json::array();
  if (!s.records.empty())
    for (const auto& e : s.record(s.k_max).edges) edges.push_back({e.first, e.second});
  o["edges"] = edges;
  json bridges = json::array();
  for (const auto& b : s.bridges) {
    bridges.push_back({{"k", b.k},
                       {"flat", b.flat},
                       {"a", b.node_a},
                       {"b", b.node_b},
                       {"chain_a", b.chain_nodes_a},
                       {"chain_b", b.chain_nodes_b},
                       {"segment_length", b.segment_length},
                       {"length", b.length()}});
  }
  o["bridges"] = bridges;
  json rows = json::array();
  for (const auto& r : ledger.rows) {
    rows.push_back({{"k", r.k},
                    {"edge_length", r.edge_length},
                    {"bridge_length", r.bridge_length},
                    {"phantom_length", r.phantom_length},
                    {"alpha_sum", r.alpha_sum},
                    {"bridge_count", r.bridge_count},
                    {"core_factor", r.core_factor}});
  }
  json gens = json::array();
  for (const auto& r : s.records) {
    gens.push_back({{"k", r.k},
                    {"edges", r.edges.size()},
                    {"bridges_flat", r.bridges_flat.size()},
                    {"bridges_nonflat", r.bridges_nonflat.size()},
                    {"phantom", r.phantom.size()},
                    {"flat", r.flat_vertices},
                    {"nonflat", r.nonflat_vertices},
                    {"warnings", r.warnings}});
  }
  o["generations"] = gens;
  o["ledger"] = {{"rows", rows},
                 {"length", ledger.length},
                 {"edge_length", ledger.edge_length},
                 {"bridge_length", ledger.bridge_length},
                 {"alpha_sum", ledger.alpha_sum},
                 {"bound", ledger.bound},
                 {"max_core_factor", ledger.max_core_factor},
                 {"core_factor_within_25_27", ledger.core_factor_within_25_27},
                 {"core_factor_within_23_27", ledger.core_factor_within_23_27},
                 {"bridges_over_32_30", ledger.bridges_over_32_30},
                 {"extensions_over_bound", ledger.extensions_over_bound},
                 {"truncation_error", ledger.truncation_error}};
  o["length"] = ledger.length;
  o["ratio"] = number(ledger.ratio);
  o["checks"] = {{"ok", checks.ok()},
                 {"disconnected_generations", checks.disconnected_generations},
                 {"edges_too_long", checks.edges_too_long},
                 {"bridges_out_of_range", checks.bridges_out_of_range},
                 {"bridge_freeze_violations", checks.bridge_freeze_violations},
                 {"core_overlaps", checks.core_overlaps},
                 {"terminal_violations", checks.terminal_violations},
                 {"phantom_invalid", checks.phantom_invalid},
                 {"max_leaf_distance", checks.max_leaf_distance},
                 {"max_undrawn_distance", checks.max_undrawn_distance},
                 {"leaf_tolerance", checks.leaf_tolerance},
                 {"max_hausdorff_ratio", checks.max_hausdorff_ratio}};
  return o.dump(1) + "\n";
}

CurveState gamma_from_json(const std::string& text) {
  const json o = parse(text, "gamma");
  CurveState s;
  s.nodes = points_from(field(o, "nodes", "gamma"), "gamma");
  s.k_max = int_field(o, "k_max", "gamma");
  s.k0 = s.k_max;
  const auto n = static_cast<std::size_t>(s.nodes.cols());
  const auto node = [&](const json& v) {
    if (!v.is_number_unsigned() || v.get<std::size_t>() >= n) throw InputError("gamma: node index out of range");
    return v.get<std::size_t>();
  };
  GenerationRecord rec;
  rec.k = s.k_max;
  const json& edges = field(o, "edges", "gamma");
  if (!edges.is_array()) throw InputError("gamma: edges must be an array");
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2) throw InputError("gamma: edges must be index pairs");
    rec.edges.emplace_back(node(e[0]), node(e[1]));
  }
  s.records.push_back(std::move(rec));
  const json& bridges = field(o, "bridges", "gamma");
  if (!bridges.is_array()) throw InputError("gamma: bridges must be an array");
  for (const auto& b : bridges) {
    Bridge br;
    br.k = int_field(b, "k", "gamma");
    br.flat = field(b, "flat", "gamma").is_boolean() && b.at("flat").get<bool>();
    br.node_a = node(field(b, "a", "gamma"));
    br.node_b = node(field(b, "b", "gamma"));
    for (const auto& v : field(b, "chain_a", "gamma")) br.chain_nodes_a.push_back(node(v));
    for (const auto& v : field(b, "chain_b", "gamma")) br.chain_nodes_b.push_back(node(v));
    s.bridges.push_back(std::move(br));
  }
  return s;
}

std::string beta_table_csv(const DiscreteMeasure& mu, const MultiresolutionFamily& fam, int threads) {
  BallTermCache cache(mu, fam);
  std::vector<std::pair<int, std::size_t>> all;
  for (int k = fam.k0; k <= fam.k_max; ++k)
    for (std::size_t j = 0; j < fam.count(k); ++j) all.emplace_back(k, j);
  cache.prefetch(all, threads);
  std::string out = "k,ball_index,beta2,mass,diam\n";
  for (const auto& [k, j] : all) {
    const auto& e = cache.get(k, j);
    out += std::to_string(k) + "," + std::to_string(j) + "," + format_number(e.beta2) + "," +
           format_number(e.mass) + "," + format_number(e.diam) + "\n";
  }
  return out;
}

std::string jones_csv(const JonesClassification& c) {
  std::string out = "point_id,k,partial_sum,label\n";
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const auto& p = c.profiles[i];
    for (std::size_t q = 0; q < p.partial_sums.size(); ++q)
      out += std::to_string(c.points[i]) + "," + std::to_string(p.k0 + static_cast<int>(q)) + "," +
             format_number(p.partial_sums[q]) + "," + to_string(c.labels[i]) + "\n";
  }
  return out;
}

std::string cones_csv(const std::vector<ConeLabel>& labels) {
  std::string out = "atom_id,label,best_V,best_alpha,min_ratio\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    out += std::to_string(i) + "," + (l.positive ? "1" : "0") + "," + std::to_string(l.plane) + "," +
           format_number(l.alpha) + "," + format_number(l.min_ratio) + "\n";
  }
  return out;
}

std::string tree_to_json(const BallTree& t, const CoreReport& cores, const GoodBadPartition* partition,
                         const LeavesCurve* leaves) {
  json o;
  o["J"] = t.J;
  o["top"] = t.nodes.empty() ? json(nullptr) : json(key(t.top().ball));
  o["bottom_depth"] = t.bottom_depth;
  o["parent_conflicts"] = t.parent_conflicts;
  o["containment_violations"] = t.containment_violations;
  json adj = json::object();
  for (const auto& n : t.nodes) {
    json ch = json::array();
    for (auto c : n.children) ch.push_back(key(t.nodes[c].ball));
    adj[key(n.ball)] = {{"children", ch},
                        {"parent", n.parent < 0 ? json(nullptr) : json(key(t.nodes[static_cast<std::size_t>(n.parent)].ball))},
                        {"depth", n.depth},
                        {"alive", n.alive}};
  }
  o["nodes"] = adj;
  o["cores"] = {{"count", cores.cores},
                {"diameter_violations", cores.diameter_violations},
                {"gap_violations", cores.gap_violations},
                {"min_gap_ratio", number(cores.min_gap_ratio)},
                {"nesting_violations", cores.nesting_violations},
                {"parent_conflicts", cores.parent_conflicts}};
  if (partition) {
    json good = json::array(), bad = json::array();
    for (std::size_t i = 0; i < t.nodes.size(); ++i) (partition->good[i] ? good : bad).push_back(key(t.nodes[i].ball));
    o["partition"] = {{"N", partition->N},
                      {"eps", partition->eps},
                      {"a", partition->a},
                      {"good", good},
                      {"bad", bad},
                      {"D_T", partition->D_T},
                      {"mass_top", partition->mass_top},
                      {"mass_E", partition->mass_E},
                      {"mass_E_top", partition->mass_E_top},
                      {"mass_E_prime", partition->mass_E_prime},
                      {"good_sum", partition->good_sum},
                      {"sum_bound", partition->sum_bound},
                      {"sum_bound_holds", partition->sum_bound_holds},
                      {"measure_bound_holds", partition->measure_bound_holds},
                      {"bad_closed_downward", partition->bad_closed_downward},
                      {"good_is_tree", partition->good_is_tree},
                      {"warnings", partition->warnings}};
  }
  if (leaves) {
    o["leaves_curve"] = {{"length", leaves->ledger.length},
                         {"rhs", number(leaves->rhs)},
                         {"d_T", leaves->d_T},
                         {"S2", leaves->S2},
                         {"max_hat_ratio", leaves->max_hat_ratio},
                         {"hat_fallbacks", leaves->hat_fallbacks},
                         {"max_leaf_distance", leaves->max_leaf_distance},
                         {"leaf_tolerance", leaves->leaf_tolerance},
                         {"checks_ok", leaves->checks.ok()},
                         {"hierarchy_violations", leaves->violations.size()}};
  }
  return o.dump(1) + "\n";
}

}  // namespace rect
