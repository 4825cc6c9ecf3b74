#pragma once

#include "rectify/cones.hpp"
#include "rectify/curve.hpp"
#include "rectify/jones.hpp"
#include "rectify/measures.hpp"
#include "rectify/nets.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rect::cli {

struct MeasureConfig {
  std::string kind = "segment";  // generator kind, ignored when file is set
  std::string file;
  int n = 1000;
  GenParams params;
};

struct FamilyConfig {
  int k0 = 0;
  int k_max = 10;
  double lambda2 = kDefaultLambda2;
  int J = kDefaultJ;
};

struct CurveConfig {
  double delta = 0.5;
  int k_max = 10;
  double epsilon = kDefaultEpsilon;
  double cstar = 0.0;  // 0: fitted
  double r0 = 0.0;     // 0: diameter of the atoms
};

struct JonesConfig {
  int samples = 200;
  double slope_threshold = kDefaultSlopeThreshold;
};

struct TreesConfig {
  int top_k = 0;
  std::size_t top_j = 0;
  double c = 0.0;  // 0: 1/(4 lambda2)
  double N = 10.0;
  double eps = 0.1;
  double a = 0.0;  // 0: c
};

struct ConesConfig {
  int m = 1;
  std::string planes = "local";  // coordinate, local, angles:<count>, local:<radius>
  std::vector<double> alphas = default_alpha_grid();
  std::vector<double> radii;  // empty: default grid
  double threshold = kDefaultRatioThreshold;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";
  bool svg = true;
  MeasureConfig measure;
  std::optional<FamilyConfig> family;
  std::optional<CurveConfig> curve;
  std::optional<JonesConfig> jones;
  std::optional<TreesConfig> trees;
  std::optional<ConesConfig> cones;
};

// Parses and validates; throws InputError naming the offending key.
ExperimentConfig parse_config(const std::string& text, const std::string& origin);

// Upstream parameter bounds, shared with the subcommand flags.
void validate(const MeasureConfig& c);
void validate(const FamilyConfig& c);
void validate(const CurveConfig& c);
void validate(const JonesConfig& c);
void validate(const TreesConfig& c, const FamilyConfig& f);
void validate(const ConesConfig& c);

std::vector<MPlane> make_planes(const ConesConfig& c, const DiscreteMeasure& mu);

}  // namespace rect::cli
