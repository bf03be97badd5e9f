#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "symstab/version.hpp"

namespace {

std::vector<double> parse_number_list(const std::string& text) {
  std::string s = text;
  for (auto& c : s)
    if (c == ',') c = ' ';
  std::vector<double> out;
  std::istringstream in(s);
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw CLI::ValidationError("expected a comma- or space-separated number list");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::string s = text;
  for (auto& c : s)
    if (c == ',') c = ' ';
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stability analysis of relative equilibria in symmetric Hamiltonian systems"};
  app.set_version_flag("--version", std::string("symstab ") + symstab::kVersion);
  app.require_subcommand(1);

  // validate
  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a system file against all invariants");
  validate->add_option("file", validate_path, "system file")->required();

  // analyze
  symstab::cli::AnalyzeArgs analyze_args;
  std::string analyze_point, analyze_xi = "auto";
  auto* analyze = app.add_subcommand("analyze", "certify stability at a phase-space point");
  analyze->add_option("file", analyze_args.path, "system file")->required();
  analyze->add_option("--point", analyze_point, "phase-space point, comma-separated")->required();
  analyze->add_option("--xi", analyze_xi, "velocity: 'auto' or comma-separated components");
  analyze->add_option("--json", analyze_args.json_path, "write the full report to this file");
  analyze->add_option("--seed", analyze_args.seed, "seed recorded in the report");
  analyze->add_option("--refine-radius", analyze_args.refine_radius,
                      "max distance Newton refinement may move the input point");
  analyze->add_option("--residual-tol", analyze_args.re_residual_tol,
                      "relative-equilibrium residual tolerance");

  // probe
  symstab::cli::ProbeArgs probe_args;
  std::string probe_point, probe_xi = "auto", probe_radii, probe_offset, probe_perturb;
  auto* probe = app.add_subcommand("probe", "empirical stability probe around an equilibrium");
  probe->add_option("file", probe_args.analyze.path, "system file")->required();
  probe->add_option("--point", probe_point, "phase-space point, comma-separated")->required();
  probe->add_option("--xi", probe_xi, "velocity: 'auto' or comma-separated components");
  probe->add_option("--radii", probe_radii, "perturbation radii, comma-separated")->required();
  probe->add_option("--horizon", probe_args.horizon, "integration horizon T");
  probe->add_option("--dt", probe_args.dt, "integrator step size");
  probe->add_option("--seed", probe_args.analyze.seed, "sampling seed");
  probe->add_option("--samples", probe_args.samples_per_radius, "samples per radius");
  probe->add_option("--escape-radius", probe_args.escape_radius,
                    "escape threshold (default 100 x largest radius)");
  probe->add_option("--offset", probe_offset,
                    "fixed perturbation offset, e.g. 'ptheta=1e-3,q1=0'");
  probe->add_option("--perturb", probe_perturb,
                    "coordinates carrying the random perturbation (default: all)");
  probe->add_option("--csv", probe_args.csv_dir, "dump one CSV per sample into this directory");
  probe->add_option("--json", probe_args.analyze.json_path, "write the full report to this file");
  probe->add_option("--refine-radius", probe_args.analyze.refine_radius,
                    "max distance Newton refinement may move the input point");

  // examples
  std::string example_name, example_outdir = ".";
  auto* examples = app.add_subcommand("examples", "write bundled example system files");
  examples->add_option("name", example_name, "EX16 | SO3-oscillator | trivial-oscillator | all")
      ->required();
  examples->add_option("--outdir", example_outdir, "output directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : symstab::cli::kExitParse;
  }

  try {
    if (*validate) return symstab::cli::cmd_validate(validate_path, std::cout, std::cerr);
    if (*analyze) {
      analyze_args.point = parse_number_list(analyze_point);
      if (analyze_xi != "auto") analyze_args.xi = parse_number_list(analyze_xi);
      return symstab::cli::cmd_analyze(analyze_args, std::cout, std::cerr);
    }
    if (*probe) {
      probe_args.analyze.point = parse_number_list(probe_point);
      if (probe_xi != "auto") probe_args.analyze.xi = parse_number_list(probe_xi);
      if (!probe_radii.empty()) probe_args.radii = parse_number_list(probe_radii);
      for (const auto& part : split_names(probe_offset)) {
        auto eq = part.find('=');
        if (eq == std::string::npos)
          throw CLI::ValidationError("--offset parts must be name=value");
        probe_args.offset.emplace_back(part.substr(0, eq), std::stod(part.substr(eq + 1)));
      }
      probe_args.perturb = split_names(probe_perturb);
      return symstab::cli::cmd_probe(probe_args, std::cout, std::cerr);
    }
    if (*examples)
      return symstab::cli::cmd_examples(example_name, example_outdir, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return symstab::cli::kExitParse;
  }
  return symstab::cli::kExitParse;
}
