#include "config.hpp"

#include "rectify/io.hpp"
#include "rectify/svg.hpp"
#include "rectify/trees.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace rect;
using namespace rect::cli;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";
};

// Files are collected during the run and written together at the end.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string text) {
    if (name.empty()) return;
    const fs::path p(name);
    files_.emplace_back(p.is_absolute() ? p : fs::path(dir_) / p, std::move(text));
  }
  void flush() const {
    for (const auto& [path, text] : files_) {
      if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw InputError("cannot create directory " + path.parent_path().string());
      }
      write_text_file(path.string(), text);
      std::cout << "wrote " << path.string() << "\n";
    }
  }

 private:
  std::string dir_;
  std::vector<std::pair<fs::path, std::string>> files_;
};

DiscreteMeasure load_measure(const std::string& path) { return measure_from_json(read_text_file(path)); }

DiscreteMeasure make_measure(const MeasureConfig& m, std::uint64_t seed) {
  if (!m.file.empty()) return load_measure(m.file);
  return generate(m.kind, m.params, m.n, seed);
}

std::vector<std::size_t> sample_atoms(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (count >= n) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::size_t> read_sample(const std::string& path, std::size_t n) {
  std::istringstream in(read_text_file(path));
  std::string tok;
  std::vector<std::size_t> out;
  char c;
  while (in >> c) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      in.putback(c);
      std::size_t v;
      in >> v;
      if (v >= n) throw InputError(path + ": atom index " + std::to_string(v) + " out of range");
      out.push_back(v);
    } else if (c != '[' && c != ']' && c != ',') {
      throw InputError(path + ": expected a JSON array of atom indices");
    }
  }
  if (out.empty()) throw InputError(path + ": no atom indices");
  return out;
}

struct CurveRun {
  NetHierarchy h;
  CurveState s;
  LengthLedger ledger;
  CurveChecks checks;
};

CurveRun run_curve(const NetHierarchy& h, double eps, int threads) {
  CurveRun r;
  r.h = h;
  r.s = construct(h, annotate(h, eps, threads), eps);
  r.ledger = length_accounting(r.s);
  r.checks = check_curve(r.s);
  return r;
}

void report_curve(const CurveRun& r) {
  std::cout << "curve: length " << format_number(r.ledger.length) << " bound " << format_number(r.ledger.bound)
            << " ratio " << format_number(r.ledger.ratio) << " bridges " << r.s.bridges.size() << " checks "
            << (r.checks.ok() ? "ok" : "failed") << "\n";
}

std::vector<ConeLabel> run_cones(const DiscreteMeasure& mu, const ConesConfig& c, int threads) {
  const auto planes = make_planes(c, mu);
  const auto radii = c.radii.empty() ? default_radius_grid(mu) : c.radii;
  auto labels = classify_graph_rectifiable(mu, planes, c.alphas, radii, c.threshold, threads);
  const auto pos = std::count_if(labels.begin(), labels.end(), [](const ConeLabel& l) { return l.positive; });
  std::cout << "cones: " << pos << " of " << labels.size() << " atoms positive over " << planes.size()
            << " planes\n";
  return labels;
}

struct TreesRun {
  BallTree tree;
  CoreReport cores;
  GoodBadPartition partition;
  LeavesCurve leaves;
};

TreesRun run_trees(const DiscreteMeasure& mu, const MultiresolutionFamily& fam, const TreesConfig& t) {
  TreesRun r;
  const double c = t.c > 0 ? t.c : default_core_constant(fam.lambda2);
  const auto cf = build_cores(fam, mu, c, fam.J);
  r.cores = check_cores(cf, fam, mu);
  r.tree = build_tree(cf, fam, mu, {t.top_k, t.top_j});
  r.partition = good_bad(r.tree, cf, fam, mu, beta_payoff(r.tree, fam, mu), t.N, t.eps, t.a > 0 ? t.a : c);
  r.leaves = leaves_curve(r.tree, fam, mu);
  std::cout << "trees: " << r.tree.nodes.size() << " nodes, cores " << (r.cores.ok() ? "ok" : "violations")
            << ", good sum " << format_number(r.partition.good_sum) << " <= " << format_number(r.partition.sum_bound)
            << (r.partition.sum_bound_holds ? " holds" : " fails") << ", measure bound "
            << (r.partition.measure_bound_holds ? "holds" : "fails") << ", leaves curve length "
            << format_number(r.leaves.ledger.length) << "\n";
  for (const auto& w : r.partition.warnings) std::cerr << "warning: " << w << "\n";
  return r;
}

void run_config(const ExperimentConfig& cfg, Outputs& out) {
  const auto mu = make_measure(cfg.measure, cfg.seed);
  out.add("measure.json", measure_to_json(mu));
  std::optional<MultiresolutionFamily> fam;
  if (cfg.family) {
    const auto& f = *cfg.family;
    fam = build_family(mu, f.k0, f.k_max, f.lambda2, f.J);
    out.add("family.json", family_to_json(*fam));
  }
  if (cfg.curve) {
    const auto& c = *cfg.curve;
    const auto h = hierarchy_from_points(mu.atoms, c.delta, c.k_max, c.r0, c.cstar);
    const auto r = run_curve(h, c.epsilon, cfg.threads);
    report_curve(r);
    out.add("hierarchy.json", hierarchy_to_json(h));
    out.add("gamma.json", gamma_to_json(r.s, r.ledger, r.checks));
    if (cfg.svg) out.add("gamma.svg", render_svg(r.s));
  }
  if (cfg.jones) {
    const auto pts = sample_atoms(static_cast<std::size_t>(mu.size()), static_cast<std::size_t>(cfg.jones->samples),
                                  cfg.seed);
    const auto cls = classify(mu, *fam, pts, cfg.jones->slope_threshold, cfg.threads);
    out.add("jones.csv", jones_csv(cls));
  }
  if (cfg.trees) {
    const auto r = run_trees(mu, *fam, *cfg.trees);
    out.add("tree.json", tree_to_json(r.tree, r.cores, &r.partition, &r.leaves));
    if (cfg.svg) out.add("leaves.svg", render_svg(r.leaves.state));
  }
  if (cfg.cones) {
    const auto labels = run_cones(mu, *cfg.cones, cfg.threads);
    out.add("labels.csv", cones_csv(labels));
    if (cfg.svg && mu.dim() >= 2) out.add("labels.svg", render_labels_svg(mu, labels));
  }
}

std::vector<ConeLabel> read_labels_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);
  if (line.rfind("atom_id,label", 0) != 0) throw InputError(path + ": not a labels CSV");
  std::vector<ConeLabel> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, label;
    std::getline(row, id, ',');
    std::getline(row, label, ',');
    if (label != "0" && label != "1") throw InputError(path + ": bad label in \"" + line + "\"");
    ConeLabel l;
    l.positive = label == "1";
    out.push_back(l);
  }
  return out;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rectify: multiscale rectifiability experiments on discrete measures"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for relative output paths")->capture_default_str();

  std::function<void(Outputs&)> action;

  // gen
  MeasureConfig gen;
  std::string gen_out;
  auto* g_gen = app.add_subcommand("gen", "Generate a measure");
  g_gen->add_option("--kind", gen.kind, "segment, circle, lipschitz_graph, cantor4, plane_stack")->required();
  g_gen->add_option("--n", gen.n, "Number of atoms")->capture_default_str();
  g_gen->add_option("--dim", gen.params.dim, "Ambient dimension")->capture_default_str();
  g_gen->add_option("--length", gen.params.length, "Segment length");
  g_gen->add_option("--radius", gen.params.radius, "Circle radius");
  g_gen->add_option("--lipschitz", gen.params.lipschitz, "Lipschitz bound of the graph");
  g_gen->add_option("--pieces", gen.params.pieces, "Linear pieces of the graph");
  g_gen->add_flag("--zigzag", gen.params.zigzag, "Alternate slopes +L, -L");
  g_gen->add_option("--knot-t", gen.params.knot_t, "Graph knots (abscissae)");
  g_gen->add_option("--knot-f", gen.params.knot_f, "Graph knots (values)");
  g_gen->add_option("--depth", gen.params.depth, "Cantor depth");
  g_gen->add_option("--planes", gen.params.planes, "Plane stack size");
  g_gen->add_option("--coefficients", gen.params.coefficients, "Plane stack weights");
  g_gen->add_option("--plane-gap", gen.params.plane_gap, "Spacing between stacked planes");
  g_gen->add_option("--out", gen_out, "Measure JSON")->required();
  g_gen->callback([&] {
    action = [&](Outputs& out) {
      validate(gen);
      out.add(gen_out, measure_to_json(generate(gen.kind, gen.params, gen.n, g.seed)));
    };
  });

  // family
  FamilyConfig fam_cfg;
  std::string fam_measure, fam_out, fam_beta;
  bool fam_check = false;
  auto* g_fam = app.add_subcommand("family", "Build nested ball families");
  g_fam->add_option("--measure", fam_measure, "Measure JSON")->required();
  g_fam->add_option("--k0", fam_cfg.k0)->capture_default_str();
  g_fam->add_option("--k-max", fam_cfg.k_max)->capture_default_str();
  g_fam->add_option("--lambda2", fam_cfg.lambda2)->capture_default_str();
  g_fam->add_option("--J", fam_cfg.J)->capture_default_str();
  g_fam->add_option("--out", fam_out, "Family JSON")->required();
  g_fam->add_option("--beta-csv", fam_beta, "Per-ball beta table");
  g_fam->add_flag("--check", fam_check, "Verify separation, maximality and nesting");
  g_fam->callback([&] {
    action = [&](Outputs& out) {
      validate(fam_cfg);
      const auto mu = load_measure(fam_measure);
      const auto fam = build_family(mu, fam_cfg.k0, fam_cfg.k_max, fam_cfg.lambda2, fam_cfg.J);
      if (fam_check) {
        const auto v = check_family(fam, mu);
        std::cout << "family: " << v.size() << " violations\n";
        if (!v.empty()) throw std::runtime_error("family check failed at k = " + std::to_string(v.front().k));
      }
      out.add(fam_out, family_to_json(fam));
      if (!fam_beta.empty()) out.add(fam_beta, beta_table_csv(mu, fam, g.threads));
    };
  });

  // jones
  std::string j_measure, j_family, j_points, j_out;
  JonesConfig j_cfg;
  auto* g_jones = app.add_subcommand("jones", "Jones-function profiles and labels");
  g_jones->add_option("--measure", j_measure, "Measure JSON")->required();
  g_jones->add_option("--family", j_family, "Family JSON")->required();
  g_jones->add_option("--points", j_points, "JSON array of atom indices");
  g_jones->add_option("--samples", j_cfg.samples, "Random atoms when --points is absent")->capture_default_str();
  g_jones->add_option("--threshold", j_cfg.slope_threshold, "Growth-slope threshold")->capture_default_str();
  g_jones->add_option("--out", j_out, "Profile CSV")->required();
  g_jones->callback([&] {
    action = [&](Outputs& out) {
      validate(j_cfg);
      const auto mu = load_measure(j_measure);
      const auto fam = family_from_json(read_text_file(j_family), mu);
      const auto n = static_cast<std::size_t>(mu.size());
      const auto pts = j_points.empty() ? sample_atoms(n, static_cast<std::size_t>(j_cfg.samples), g.seed)
                                        : read_sample(j_points, n);
      const auto cls = classify(mu, fam, pts, j_cfg.slope_threshold, g.threads);
      const auto div = std::count(cls.labels.begin(), cls.labels.end(), JonesLabel::divergent);
      std::cout << "jones: " << cls.points.size() - static_cast<std::size_t>(div) << " bounded, " << div
                << " divergent\n";
      out.add(j_out, jones_csv(cls));
    };
  });

  // curve
  std::string c_hier, c_measure, c_out, c_svg, c_hier_out;
  CurveConfig c_cfg;
  auto* g_curve = app.add_subcommand("curve", "Construct a connected curve through a vertex hierarchy");
  auto* o_hier = g_curve->add_option("--hierarchy", c_hier, "Hierarchy JSON");
  auto* o_cm = g_curve->add_option("--measure", c_measure, "Build the hierarchy from these atoms");
  o_hier->excludes(o_cm);
  g_curve->add_option("--delta", c_cfg.delta)->capture_default_str();
  g_curve->add_option("--k-max", c_cfg.k_max)->capture_default_str();
  g_curve->add_option("--r0", c_cfg.r0, "0 selects the diameter")->capture_default_str();
  g_curve->add_option("--cstar", c_cfg.cstar, "0 fits the constant")->capture_default_str();
  g_curve->add_option("--epsilon", c_cfg.epsilon)->capture_default_str();
  g_curve->add_option("--out", c_out, "Gamma JSON")->required();
  g_curve->add_option("--svg", c_svg, "Gamma SVG");
  g_curve->add_option("--hierarchy-out", c_hier_out, "Write the hierarchy used");
  g_curve->callback([&] {
    action = [&](Outputs& out) {
      validate(c_cfg);
      if (c_hier.empty() && c_measure.empty()) throw InputError("curve: one of --hierarchy or --measure is required");
      const NetHierarchy h = !c_hier.empty()
                                 ? hierarchy_from_json(read_text_file(c_hier))
                                 : hierarchy_from_points(load_measure(c_measure).atoms, c_cfg.delta, c_cfg.k_max,
                                                         c_cfg.r0, c_cfg.cstar);
      const auto r = run_curve(h, c_cfg.epsilon, g.threads);
      report_curve(r);
      out.add(c_out, gamma_to_json(r.s, r.ledger, r.checks));
      if (!c_svg.empty()) out.add(c_svg, render_svg(r.s));
      if (!c_hier_out.empty()) out.add(c_hier_out, hierarchy_to_json(h));
    };
  });

  // trees
  std::string t_measure, t_family, t_out, t_svg;
  FamilyConfig t_fam;
  TreesConfig t_cfg;
  std::vector<long> t_top{0, 0};
  auto* g_trees = app.add_subcommand("trees", "Core families, ball tree, localization and leaves curve");
  g_trees->add_option("--measure", t_measure, "Measure JSON")->required();
  g_trees->add_option("--family", t_family, "Family JSON (built from --k0/--k-max otherwise)");
  g_trees->add_option("--k0", t_fam.k0)->capture_default_str();
  g_trees->add_option("--k-max", t_fam.k_max)->capture_default_str();
  g_trees->add_option("--lambda2", t_fam.lambda2)->capture_default_str();
  g_trees->add_option("--J", t_fam.J)->capture_default_str();
  g_trees->add_option("--top", t_top, "Top ball as k j")->expected(2);
  g_trees->add_option("--c", t_cfg.c, "Core constant, 0 selects 1/(4 lambda2)")->capture_default_str();
  g_trees->add_option("--N", t_cfg.N)->capture_default_str();
  g_trees->add_option("--eps", t_cfg.eps)->capture_default_str();
  g_trees->add_option("--a", t_cfg.a, "Doubling dilation, 0 selects c")->capture_default_str();
  g_trees->add_option("--out", t_out, "Tree JSON")->required();
  g_trees->add_option("--svg", t_svg, "Leaves curve SVG");
  g_trees->callback([&] {
    action = [&](Outputs& out) {
      const auto mu = load_measure(t_measure);
      MultiresolutionFamily fam;
      if (!t_family.empty()) {
        fam = family_from_json(read_text_file(t_family), mu);
        t_fam = {fam.k0, fam.k_max, fam.lambda2, fam.J};
      } else {
        validate(t_fam);
        fam = build_family(mu, t_fam.k0, t_fam.k_max, t_fam.lambda2, t_fam.J);
      }
      if (t_top[1] < 0) throw InputError("trees.top: ball index must be >= 0");
      t_cfg.top_k = static_cast<int>(t_top[0]);
      t_cfg.top_j = static_cast<std::size_t>(t_top[1]);
      validate(t_cfg, t_fam);
      const auto r = run_trees(mu, fam, t_cfg);
      out.add(t_out, tree_to_json(r.tree, r.cores, &r.partition, &r.leaves));
      if (!t_svg.empty()) out.add(t_svg, render_svg(r.leaves.state));
    };
  });

  // cones
  std::string k_measure, k_out, k_svg;
  ConesConfig k_cfg;
  auto* g_cones = app.add_subcommand("cones", "Cone-based graph rectifiability labels");
  g_cones->add_option("--measure", k_measure, "Measure JSON")->required();
  g_cones->add_option("--m", k_cfg.m, "Plane dimension")->capture_default_str();
  g_cones->add_option("--planes", k_cfg.planes, "coordinate, local, angles:<count> or local:<radius>")->capture_default_str();
  g_cones->add_option("--alphas", k_cfg.alphas, "Aperture grid");
  g_cones->add_option("--radii", k_cfg.radii, "Radius grid (default: geometric)");
  g_cones->add_option("--threshold", k_cfg.threshold, "Bad-cone ratio threshold")->capture_default_str();
  g_cones->add_option("--out", k_out, "Labels CSV")->required();
  g_cones->add_option("--svg", k_svg, "Labels SVG");
  g_cones->callback([&] {
    action = [&](Outputs& out) {
      validate(k_cfg);
      const auto mu = load_measure(k_measure);
      const auto labels = run_cones(mu, k_cfg, g.threads);
      out.add(k_out, cones_csv(labels));
      if (!k_svg.empty()) out.add(k_svg, render_labels_svg(mu, labels));
    };
  });

  // run
  std::string r_config;
  auto* g_run = app.add_subcommand("run", "Run an experiment described by a TOML config");
  g_run->add_option("--config", r_config, "Config TOML")->required();
  g_run->callback([&] {
    action = [&](Outputs&) {
      auto cfg = parse_config(read_text_file(r_config), r_config);
      if (app.count("--seed")) cfg.seed = g.seed;
      if (app.count("--threads")) cfg.threads = g.threads;
      if (app.count("--out-dir")) cfg.out_dir = g.out_dir;
      Outputs out(cfg.out_dir);
      run_config(cfg, out);
      out.flush();
    };
  });

  // render
  std::string v_gamma, v_measure, v_labels, v_out;
  std::vector<int> v_axes{0, 1};
  auto* g_render = app.add_subcommand("render", "Render a curve or cone labels as SVG");
  auto* o_gamma = g_render->add_option("--gamma", v_gamma, "Gamma JSON");
  auto* o_lab = g_render->add_option("--labels", v_labels, "Labels CSV (with --measure)");
  g_render->add_option("--measure", v_measure, "Measure JSON");
  o_gamma->excludes(o_lab);
  g_render->add_option("--axes", v_axes, "Projection axes")->expected(2);
  g_render->add_option("--out", v_out, "SVG")->required();
  g_render->callback([&] {
    action = [&](Outputs& out) {
      if (!v_gamma.empty()) {
        out.add(v_out, render_svg(gamma_from_json(read_text_file(v_gamma)), v_axes[0], v_axes[1]));
      } else if (!v_labels.empty() && !v_measure.empty()) {
        out.add(v_out, render_labels_svg(load_measure(v_measure), read_labels_csv(v_labels), v_axes[0], v_axes[1]));
      } else {
        throw InputError("render: give --gamma, or --labels with --measure");
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    Outputs out(g.out_dir);
    action(out);
    out.flush();
  } catch (const InputError& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
