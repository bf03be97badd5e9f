#include "cli.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "symstab/equilibria.hpp"
#include "symstab/system_io.hpp"
#include "symstab/version.hpp"

namespace symstab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json check_to_json(const CheckResult& c) {
  return json{{"check", c.id},
              {"ok", c.ok},
              {"residual", c.residual},
              {"tolerance", c.tolerance},
              {"detail", c.detail}};
}

void emit_checks(const std::vector<CheckResult>& checks, std::ostream& err) {
  for (const auto& c : checks) err << check_to_json(c).dump() << "\n";
}

json thresholds_json(const AnalyzeArgs& args, const LoadedSystem& loaded,
                     const StabilityThresholds& t) {
  return json{{"relative_equilibrium_residual", args.re_residual_tol},
              {"refine_tolerance", args.refine_tolerance},
              {"refine_radius", args.refine_radius},
              {"rank_tolerance", loaded.system.algebra.rank_tol()},
              {"definiteness_relative", t.rel_definiteness},
              {"definiteness_zero_floor", t.absolute_zero},
              {"hessian_precondition", t.precondition},
              {"descent", t.descent},
              {"kernel_match", t.kernel_match},
              {"metric_invariance", t.metric_invariance}};
}

json equilibrium_json(const RelEquilibrium& re) {
  return json{{"point", to_json(re.point)},
              {"velocity", to_json(re.velocity)},
              {"residual", re.residual},
              {"mu", to_json(re.mu)},
              {"isotropy_dimension", re.isotropy.rank()},
              {"isotropy_basis", to_json(re.isotropy.basis)},
              {"velocity_in_isotropy_of_mu", re.velocity_in_mu_isotropy},
              {"coadjoint_defect", re.coadjoint_defect},
              {"velocity_orthogonal_to_isotropy", re.velocity_orthogonal_to_isotropy},
              {"orthogonality_defect", re.orthogonality_defect}};
}

json slice_json(const SliceData& s) {
  return json{{"kernel_dimension", s.kernel.rank()},
              {"kernel_basis", to_json(s.kernel.basis)},
              {"orbit_tangent_dimension", s.orbit_tangent.rank()},
              {"orbit_tangent_basis", to_json(s.orbit_tangent.basis)},
              {"h_orbit_tangent_dimension", s.h_orbit_tangent.rank()},
              {"h_orbit_tangent_basis", to_json(s.h_orbit_tangent.basis)},
              {"slice_dimension", s.slice_dim()},
              {"slice_basis", to_json(s.slice)},
              {"omega_slice", to_json(s.omega_slice)},
              {"omega_slice_det", s.omega_slice_det},
              {"containment_residual", s.containment_residual},
              {"descent_residual", s.descent_residual},
              {"hessian_kernel", to_json(s.hessian_kernel)},
              {"hessian_slice", to_json(s.hessian_slice)}};
}

json stability_json(const StabilityReport& r) {
  std::string note;
  switch (r.verdict) {
    case Verdict::StableCertified:
      note = r.regular_case_applies
                 ? "certified: the augmented Hamiltonian is definite on the symplectic "
                   "slice, and the momentum map is regular at m, so the classical "
                   "regular-point criterion applies as well"
                 : "certified: the augmented Hamiltonian is definite on the symplectic slice";
      break;
    case Verdict::InconclusiveIndefinite:
      note = "inconclusive: the restricted form is indefinite; the criterion does not apply";
      break;
    case Verdict::InconclusiveDegenerate:
      note = "inconclusive: the restricted form is degenerate beyond the orbit directions; "
             "higher-order terms decide and are not examined";
      break;
  }
  return json{{"verdict", to_string(r.verdict)},
              {"definiteness", to_string(r.definiteness)},
              {"slice_eigenvalues", to_json(r.slice_eigenvalues)},
              {"signature", json::array({r.signature_positive, r.signature_negative})},
              {"kernel_eigenvalues", to_json(r.kernel_eigenvalues)},
              {"kernel_formulation_verdict", to_string(r.kernel_formulation_verdict)},
              {"kernel_matches_orbit", r.kernel_matches_orbit},
              {"regular_point", r.regular_point},
              {"regular_case_applies", r.regular_case_applies},
              {"metric_invariance_residual", r.metric_invariance_residual},
              {"note", note}};
}

json probe_json(const ProbeResult& p, int samples_per_radius) {
  json samples = json::array();
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    const auto& s = p.samples[i];
    json sj{{"index", static_cast<int>(i)},
            {"radius", s.radius},
            {"escaped", s.escaped},
            {"max_orbit_distance", s.max_orbit_distance}};
    if (s.escaped) {
      sj["escape_time"] = s.escape_time;
      if (s.fit_valid) {
        sj["growth_rate"] = s.growth_rate;
        sj["fit_r_squared"] = s.fit_r_squared;
      }
    }
    samples.push_back(sj);
  }
  json out{{"radii", p.radii},
           {"horizon", p.horizon},
           {"dt", p.dt},
           {"seed", p.seed},
           {"samples_per_radius", samples_per_radius},
           {"escape_radius", p.escape_radius},
           {"verdict", to_string(p.verdict)},
           {"escaped_count", p.escaped_count},
           {"max_distance_per_radius", p.max_distance_per_radius},
           {"samples", samples},
           {"orbit_grid", json{{"parameter_dimension", p.orbit_parameter_dim},
                               {"points", p.orbit_points},
                               {"resolution", p.orbit_resolution},
                               {"fallback", p.orbit_fallback}}},
           {"interpretation",
            "empirical evidence only: an escape refutes stability near the sampled orbit; "
            "a quiet run does not certify it"}};
  if (p.growth_rate_valid) {
    out["growth_rate"] = p.growth_rate;
    out["growth_rate_r_squared"] = p.growth_r_squared;
  } else {
    out["growth_rate"] = nullptr;
  }
  return out;
}

struct AnalysisOutcome {
  int exit_code = kExitOk;
  LoadedSystem loaded;
  RelEquilibrium re;
  StabilityReport report;
  json doc;
};

/// Shared load -> refine -> slice -> verdict pipeline for analyze and probe.
AnalysisOutcome run_analysis(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
  AnalysisOutcome outcome;
  outcome.loaded = load_system_file(args.path);
  const SystemDef& sys = outcome.loaded.system;

  if (static_cast<int>(args.point.size()) != sys.dim())
    throw std::invalid_argument("point has " + std::to_string(args.point.size()) +
                                " coordinates, system needs " + std::to_string(sys.dim()));
  Eigen::VectorXd m0 =
      Eigen::Map<const Eigen::VectorXd>(args.point.data(), static_cast<Eigen::Index>(args.point.size()));

  Eigen::VectorXd xi0;
  if (args.xi) {
    if (static_cast<int>(args.xi->size()) != sys.algebra_dim())
      throw std::invalid_argument("xi has " + std::to_string(args.xi->size()) +
                                  " components, algebra dimension is " +
                                  std::to_string(sys.algebra_dim()));
    xi0 = Eigen::Map<const Eigen::VectorXd>(args.xi->data(),
                                            static_cast<Eigen::Index>(args.xi->size()));
  } else {
    xi0 = solve_velocity(sys, m0).xi;
  }

  bool is_equilibrium = true;
  std::string reject_reason;
  try {
    outcome.re = refine_relative_equilibrium(sys, m0, xi0, {args.refine_tolerance, 50});
    double moved = sys.space.wrapped_distance(outcome.re.point, m0);
    if (moved > args.refine_radius) {
      is_equilibrium = false;
      reject_reason = "nearest relative equilibrium is " + std::to_string(moved) +
                      " away (> refine radius " + std::to_string(args.refine_radius) + ")";
    }
  } catch (const RefinementError& e) {
    is_equilibrium = false;
    reject_reason = e.what();
  }
  if (is_equilibrium && outcome.re.residual > args.re_residual_tol) {
    is_equilibrium = false;
    reject_reason = "residual " + std::to_string(outcome.re.residual) + " exceeds " +
                    std::to_string(args.re_residual_tol);
  }
  if (!is_equilibrium) {
    RelEquilibrium at_input = describe_equilibrium(sys, m0, xi0);
    err << json{{"error", "not_a_relative_equilibrium"},
                {"residual_at_input", at_input.residual},
                {"detail", reject_reason}}
               .dump()
        << "\n";
    out << sys.name << ": not a relative equilibrium (" << reject_reason << ")\n";
    outcome.exit_code = kExitInvalid;
    return outcome;
  }

  StabilityThresholds thresholds;
  outcome.report = stability_verdict(sys, outcome.re, thresholds);

  outcome.doc = json{{"schema", 1},
                     {"tool", json{{"name", "symstab"}, {"version", kVersion}}},
                     {"system", json{{"name", sys.name},
                                     {"digest", digest_hex(outcome.loaded.digest)},
                                     {"origin", outcome.loaded.origin}}},
                     {"point", args.point},
                     {"seed", args.seed},
                     {"thresholds", thresholds_json(args, outcome.loaded, thresholds)},
                     {"relative_equilibrium", equilibrium_json(outcome.re)},
                     {"slice", slice_json(outcome.report.slice)},
                     {"stability", stability_json(outcome.report)}};

  out << sys.name << ": " << to_string(outcome.report.verdict) << "\n";
  out << "  residual " << outcome.re.residual << ", |mu| "
      << std::sqrt(sys.algebra.dual_norm_sq(outcome.re.mu)) << ", slice dimension "
      << outcome.report.slice.slice_dim() << ", signature (" << outcome.report.signature_positive
      << "," << outcome.report.signature_negative << ")\n";

  outcome.exit_code =
      outcome.report.verdict == Verdict::StableCertified ? kExitOk : kExitInconclusive;
  return outcome;
}

void write_json_file(const json& doc, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << doc.dump(2) << "\n";
}

}  // namespace

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  try {
    LoadedSystem loaded = load_system_file(path);
    emit_checks(loaded.system.validation, err);
    out << loaded.system.name << ": ok (digest " << digest_hex(loaded.digest) << ")\n";
    return kExitOk;
  } catch (const LoadError& e) {
    if (!e.checks().empty()) {
      emit_checks(e.checks(), err);
      out << "validation failed: " << e.what() << "\n";
      return kExitInvalid;
    }
    err << json{{"error", "load"}, {"where", e.origin() + ":" + std::to_string(e.line())},
                {"detail", e.detail()}, {"kind", e.validation() ? "validation" : "parse"}}
               .dump()
        << "\n";
    out << (e.validation() ? "validation failed: " : "parse error: ") << e.what() << "\n";
    return e.validation() ? kExitInvalid : kExitParse;
  } catch (const std::exception& e) {
    err << json{{"error", "load"}, {"detail", e.what()}}.dump() << "\n";
    out << "error: " << e.what() << "\n";
    return kExitParse;
  }
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
  try {
    AnalysisOutcome outcome = run_analysis(args, out, err);
    if (outcome.exit_code != kExitOk && outcome.exit_code != kExitInconclusive)
      return outcome.exit_code;
    if (!args.json_path.empty()) write_json_file(outcome.doc, args.json_path);
    return outcome.exit_code;
  } catch (const LoadError& e) {
    err << json{{"error", "load"}, {"detail", e.what()}}.dump() << "\n";
    out << "error: " << e.what() << "\n";
    return e.validation() || !e.checks().empty() ? kExitInvalid : kExitParse;
  } catch (const SliceError& e) {
    err << json{{"error", "analysis"}, {"detail", e.what()}}.dump() << "\n";
    out << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << json{{"error", "usage"}, {"detail", e.what()}}.dump() << "\n";
    out << "error: " << e.what() << "\n";
    return kExitParse;
  }
}

int cmd_probe(const ProbeArgs& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.radii.empty()) {
      json doc{{"schema", 1},
               {"tool", json{{"name", "symstab"}, {"version", kVersion}}},
               {"probe", json{{"radii", json::array()},
                              {"samples", json::array()},
                              {"verdict", to_string(ProbeVerdict::NoEscapeObserved)},
                              {"escaped_count", 0}}}};
      if (!args.analyze.json_path.empty()) write_json_file(doc, args.analyze.json_path);
      out << "no perturbation radii given; nothing to do\n";
      return kExitOk;
    }

    AnalysisOutcome outcome = run_analysis(args.analyze, out, err);
    if (outcome.exit_code != kExitOk && outcome.exit_code != kExitInconclusive)
      return outcome.exit_code;
    const SystemDef& sys = outcome.loaded.system;

    ProbeOptions options;
    options.dt = args.dt;
    options.horizon = args.horizon;
    options.escape_radius = args.escape_radius;
    options.samples_per_radius = args.samples_per_radius;
    options.seed = args.analyze.seed;
    options.keep_trajectories = !args.csv_dir.empty();
    if (!args.offset.empty()) {
      options.offset = Eigen::VectorXd::Zero(sys.dim());
      for (const auto& [name, value] : args.offset) {
        int idx = sys.space.coordinate_index(name);
        if (idx < 0) throw std::invalid_argument("offset: unknown coordinate '" + name + "'");
        options.offset[idx] = value;
      }
    }
    for (const auto& name : args.perturb) {
      int idx = sys.space.coordinate_index(name);
      if (idx < 0) throw std::invalid_argument("perturb: unknown coordinate '" + name + "'");
      options.perturb_coords.push_back(idx);
    }

    ProbeResult probe = stability_probe(sys, outcome.re, args.radii, options);

    if (!args.csv_dir.empty()) {
      fs::create_directories(args.csv_dir);
      for (std::size_t i = 0; i < probe.samples.size(); ++i) {
        fs::path p = fs::path(args.csv_dir) / ("sample_" + std::to_string(i) + ".csv");
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        write_trajectory_csv(sys, probe.samples[i].trajectory, f);
      }
    }

    outcome.doc["probe"] = probe_json(probe, args.samples_per_radius);
    if (!args.analyze.json_path.empty()) write_json_file(outcome.doc, args.analyze.json_path);

    out << "probe: " << to_string(probe.verdict) << " (" << probe.escaped_count << "/"
        << probe.samples.size() << " samples escaped";
    if (probe.growth_rate_valid) out << ", growth rate " << probe.growth_rate;
    out << ")\n";
    return kExitOk;
  } catch (const LoadError& e) {
    err << json{{"error", "load"}, {"detail", e.what()}}.dump() << "\n";
    out << "error: " << e.what() << "\n";
    return e.validation() || !e.checks().empty() ? kExitInvalid : kExitParse;
  } catch (const std::exception& e) {
    err << json{{"error", "probe"}, {"detail", e.what()}}.dump() << "\n";
    out << "error: " << e.what() << "\n";
    return kExitParse;
  }
}

int cmd_examples(const std::string& name, const std::string& outdir, std::ostream& out,
                 std::ostream& err) {
  std::vector<std::string> names;
  if (name == "all") {
    names = builtin_system_names();
  } else if (is_builtin_system(name)) {
    for (const auto& n : builtin_system_names())
      if (n.size() == name.size() &&
          std::equal(n.begin(), n.end(), name.begin(), name.end(),
                     [](char a, char b) { return std::tolower(a) == std::tolower(b); }))
        names.push_back(n);
  } else {
    err << json{{"error", "unknown_example"}, {"name", name},
                {"available", builtin_system_names()}}
               .dump()
        << "\n";
    out << "unknown example '" << name << "'; available:";
    for (const auto& n : builtin_system_names()) out << " " << n;
    out << " all\n";
    return kExitParse;
  }
  try {
    fs::create_directories(outdir.empty() ? "." : outdir);
    for (const auto& n : names) {
      fs::path p = fs::path(outdir.empty() ? "." : outdir) / (n + ".sys");
      std::ofstream f(p, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + p.string());
      f << builtin_system_text(n);
      out << "wrote " << p.string() << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << json{{"error", "io"}, {"detail", e.what()}}.dump() << "\n";
    return kExitParse;
  }
}

}  // namespace symstab::cli
