#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "symstab/dynamics.hpp"
#include "symstab/slice.hpp"

namespace symstab::cli {

// Exit codes shared by the subcommands:
//   0 success / stability certified
//   1 validation failure or not a relative equilibrium
//   2 parse, file or usage errors
//   3 analysis completed but inconclusive
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitInconclusive = 3;

struct AnalyzeArgs {
  std::string path;
  std::vector<double> point;
  std::optional<std::vector<double>> xi;  // empty: solve for it
  std::string json_path;
  double re_residual_tol = 1e-9;
  double refine_tolerance = 1e-13;
  /// A refinement that moves the point further than this is rejected:
  /// analyze certifies the given point, it does not hunt for equilibria.
  double refine_radius = 1e-2;
  std::uint64_t seed = 0;
};

struct ProbeArgs {
  AnalyzeArgs analyze;
  std::vector<double> radii;
  double horizon = 100.0;
  double dt = 1e-3;
  int samples_per_radius = 16;
  double escape_radius = 0.0;  // 0 = auto
  std::vector<std::pair<std::string, double>> offset;  // coordinate name -> value
  std::vector<std::string> perturb;                    // coordinate names; empty = all
  std::string csv_dir;
};

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err);
int cmd_probe(const ProbeArgs& args, std::ostream& out, std::ostream& err);
int cmd_examples(const std::string& name, const std::string& outdir, std::ostream& out,
                 std::ostream& err);

}  // namespace symstab::cli
