#pragma once

#include "rectify/cones.hpp"
#include "rectify/curve.hpp"
#include "rectify/jones.hpp"
#include "rectify/nets.hpp"
#include "rectify/trees.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rect {

// Malformed or unreadable input.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Shortest round-trip decimal form.
std::string format_number(double v);

// [[x0, x1, ...], ...], one array per point.
std::string points_to_json(const PointSet& pts);
PointSet points_from_json(const std::string& text);

// {"dim": d, "atoms": [[...]], "weights": [...]}
std::string measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const std::string& text);

// {"k0", "k_max", "lambda2", "J", "levels": [{"k", "indices"}]}
std::string family_to_json(const MultiresolutionFamily& fam);
MultiresolutionFamily family_from_json(const std::string& text, const DiscreteMeasure& mu);

// {"r0", "delta", "cstar", "generations": [[[...]...]...]}
std::string hierarchy_to_json(const NetHierarchy& h);
NetHierarchy hierarchy_from_json(const std::string& text);

// Nodes, final edges, bridges with chains, per-generation ledger and checks.
std::string gamma_to_json(const CurveState& s, const LengthLedger& ledger, const CurveChecks& checks);
// Enough of a curve to draw it: nodes, final edges and bridge paths.
CurveState gamma_from_json(const std::string& text);

// k,ball_index,beta2,mass,diam
std::string beta_table_csv(const DiscreteMeasure& mu, const MultiresolutionFamily& fam, int threads = 1);
// point_id,k,partial_sum,label
std::string jones_csv(const JonesClassification& c);
// atom_id,label,best_V,best_alpha,min_ratio
std::string cones_csv(const std::vector<ConeLabel>& labels);

// Adjacency lists keyed by "k:j"; the partition and the leaves curve summary
// are added when given.
std::string tree_to_json(const BallTree& t, const CoreReport& cores, const GoodBadPartition* partition = nullptr,
                         const LeavesCurve* leaves = nullptr);

}  // namespace rect
