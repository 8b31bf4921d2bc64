#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dtcbf/bundle.hpp"
#include "dtcbf/errors.hpp"
#include "dtcbf/synthesis.hpp"
#include "dtcbf/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dtcbf;

namespace {

std::string default_out_dir(const std::string& spec_path) {
    if (const char* env = std::getenv("DTCBF_OUT_DIR")) return env;
    return fs::path(spec_path).stem().string() + "_out";
}

void write_error_file(const std::string& dir, const std::string& kind,
                      const std::string& message, const std::vector<IterationLog>& logs) {
    fs::create_directories(dir);
    json j;
    j["error"] = kind;
    j["message"] = message;
    json jlogs = json::array();
    for (const auto& log : logs) {
        json jl;
        jl["k"] = log.k;
        jl["step1_status"] = log.step1_status;
        jl["step2_status"] = log.step2_status;
        jl["gamma0"] = log.gamma0;
        jlogs.push_back(jl);
    }
    j["iterations"] = jlogs;
    std::ofstream f(dir + "/error.json");
    f << j.dump(1) << "\n";
}

int cmd_synthesize(const std::string& spec_path, std::string out_dir, int max_iters_override,
                   double gamma_target_override, bool gamma_maximize, long seed_override,
                   const std::string& extension_override, bool export_sdpa, bool verbose,
                   double tol_override) {
    ProblemSpec spec = parse_spec(spec_path);
    if (out_dir.empty()) out_dir = default_out_dir(spec_path);

    // flags take precedence over spec values
    if (max_iters_override >= 0) spec.config.max_iters = max_iters_override;
    if (gamma_target_override == gamma_target_override) {  // not NaN
        spec.config.gamma_objective = GammaObjective::Target;
        spec.config.gamma_target = gamma_target_override;
    }
    if (gamma_maximize) spec.config.gamma_objective = GammaObjective::Maximize;
    if (seed_override >= 0) spec.config.seed = static_cast<std::uint64_t>(seed_override);
    if (!extension_override.empty()) {
        if (extension_override == "quadratic")
            spec.config.extension = ExtensionMode::Quadratic;
        else if (extension_override == "cascaded")
            spec.config.extension = ExtensionMode::Cascaded;
        else if (extension_override == "fixed-policy")
            spec.config.extension = ExtensionMode::FixedPolicy;
        else {
            std::fprintf(stderr, "unknown extension mode '%s'\n", extension_override.c_str());
            return 1;
        }
    }
    if (tol_override == tol_override) {
        spec.config.solver.feas_tol = tol_override;
        spec.config.solver.gap_tol = tol_override;
    }
    spec.config.verbose = spec.config.verbose || verbose;
    if (export_sdpa) {
        spec.config.export_sdpa_dir = out_dir + "/sdpa";
        fs::create_directories(spec.config.export_sdpa_dir);
    }

    try {
        SynthesisResult result = run(spec.plant, spec.input, spec.safe, spec.config);
        write_bundle(out_dir, spec, result);
        std::printf("synthesized: gamma0 = %.6f, degree(h) = %d, %zu iterations, %s\n",
                    result.triple.gamma0, result.triple.h.degree(), result.logs.size(),
                    result.stagnated ? "stagnated (no further enlargement)"
                                     : "iteration budget exhausted");
        std::printf("bundle written to %s\n", out_dir.c_str());
        return 0;
    } catch (const Step1Infeasible& e) {
        write_error_file(out_dir, "Step1Infeasible", e.what(), e.partial_logs);
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const SynthNumericalFailure& e) {
        write_error_file(out_dir, "NumericalFailure", e.what(), e.partial_logs);
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const CertificateResidual& e) {
        write_error_file(out_dir, "CertificateResidual", e.what(), {});
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

int cmd_verify(const std::string& bundle_dir, int samples, double tol, long seed,
               int trajectories, int steps) {
    ResultBundle b = read_bundle(bundle_dir);
    SamplingSpec spec;
    spec.samples = samples;
    spec.tol = tol;
    if (seed >= 0) spec.seed = static_cast<std::uint64_t>(seed);
    spec.trajectories = trajectories;
    spec.steps = steps;
    VerificationReport rep =
        check_triple(b.result.triple, b.spec.plant, b.spec.input, b.spec.safe, spec);
    write_verification(bundle_dir, rep, spec);

    std::printf("samples: %d in the superlevel set, %d outside the safe set\n",
                rep.samples_in_set, rep.samples_outside_safe);
    std::printf("violations: decrease %.3e, admissibility %.3e, containment %.3e\n",
                rep.decrease_violation, rep.admissibility_violation, rep.containment_violation);
    std::printf("simulation: %d trajectories x %d steps, %d violations\n", rep.trajectories_run,
                rep.trajectory_steps, rep.trajectory_violations);
    std::printf("certificates: %d checked, min eigenvalue %.3e, max residual %.3e\n",
                rep.certificates_checked, rep.certificate_min_eig,
                rep.certificate_max_residual);
    if (rep.empty_superlevel_warning)
        std::printf("warning: the superlevel set produced no samples (vacuous pass)\n");
    if (!rep.gamma_in_range) {
        std::printf("FAIL: gamma0 outside (0, 1]\n");
        return 1;
    }
    bool pass = rep.max_violation() <= spec.tol && rep.trajectory_violations == 0;
    std::printf("%s: max violation %.3e (tol %.1e)\n", pass ? "PASS" : "FAIL",
                rep.max_violation(), spec.tol);
    return pass ? 0 : 1;
}

int cmd_levelset(const std::string& bundle_dir, const std::string& plane, int resolution,
                 const std::string& which, double band, std::string out_dir) {
    ResultBundle b = read_bundle(bundle_dir);
    const auto& xs = b.spec.plant.state;
    if (out_dir.empty()) out_dir = bundle_dir + "/levelsets";

    // plane: "x1,x2" etc.
    std::array<int, 2> axes = {0, 1};
    if (!plane.empty()) {
        auto comma = plane.find(',');
        if (comma == std::string::npos)
            throw UnknownPlane("plane must name two state variables, e.g. x1,x2");
        std::string a = plane.substr(0, comma), bvar = plane.substr(comma + 1);
        axes = {-1, -1};
        for (size_t i = 0; i < xs.size(); ++i) {
            if (var_name(xs[i]) == a) axes[0] = static_cast<int>(i);
            if (var_name(xs[i]) == bvar) axes[1] = static_cast<int>(i);
        }
        if (axes[0] < 0 || axes[1] < 0 || axes[0] == axes[1])
            throw UnknownPlane("unknown plane '" + plane + "'");
    }

    auto [lo_full, hi_full] = safe_set_box(b.spec.safe, xs);
    std::vector<double> lo = {lo_full[static_cast<size_t>(axes[0])],
                              lo_full[static_cast<size_t>(axes[1])]};
    std::vector<double> hi = {hi_full[static_cast<size_t>(axes[0])],
                              hi_full[static_cast<size_t>(axes[1])]};
    std::vector<double> fixed(xs.size(), 0.0);

    std::vector<std::pair<int, Polynomial>> selected;
    if (which == "final") {
        selected.emplace_back(static_cast<int>(b.result.h_iterates.size()) - 1,
                              b.result.h_iterates.back());
    } else {
        for (size_t k = 0; k < b.result.h_iterates.size(); ++k)
            selected.emplace_back(static_cast<int>(k), b.result.h_iterates[k]);
    }

    fs::create_directories(out_dir);
    json manifest;
    manifest["plane"] = {var_name(xs[static_cast<size_t>(axes[0])]),
                         var_name(xs[static_cast<size_t>(axes[1])])};
    manifest["bounds"] = {{"lo", lo}, {"hi", hi}};
    manifest["resolution"] = resolution;
    manifest["band"] = band;
    json files = json::array();
    for (const auto& [k, h] : selected) {
        LevelsetGrid grid = levelset_sample(h, xs, axes, fixed, lo, hi, resolution, band);
        std::string name = "levelset_k" + std::to_string(k) + ".csv";
        std::ofstream f(out_dir + "/" + name);
        f.precision(12);
        f << "x1,x2,h\n";
        for (const auto& row : grid.rows)
            f << row[0] << "," << row[1] << "," << row[2] << "\n";
        files.push_back(name);
    }
    manifest["files"] = files;
    std::ofstream mf(out_dir + "/manifest.json");
    mf << manifest.dump(1) << "\n";
    std::printf("wrote %zu level-set grids to %s\n", selected.size(), out_dir.c_str());
    return 0;
}

int cmd_certify(const std::string& bundle_dir, double eig_tol, double coeff_tol) {
    ResultBundle b = read_bundle(bundle_dir);
    CertificateReport rep = check_certificates(b.result.triple, eig_tol, coeff_tol);
    std::printf("certificates: %d checked, min eigenvalue %.3e, max residual %.3e\n", rep.checked,
                rep.min_eigenvalue, rep.max_residual);
    for (const auto& f : rep.failures) std::printf("FAIL: %s\n", f.c_str());
    bool pass = rep.failures.empty();
    std::printf("%s\n", pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete-time control barrier function synthesis toolkit"};
    app.require_subcommand(1);

    std::string spec_path, bundle_dir, out_dir, plane, which = "all", extension;
    int max_iters = -1, samples = 100000, trajectories = 1000, steps = 50, resolution = 101;
    double gamma_target = std::nan(""), tol = 1e-6, band = 1e-2;
    double eig_tol = 1e-7, coeff_tol = 1e-6, solver_tol = std::nan("");
    long seed = -1;
    bool gamma_maximize = false, export_sdpa = false, verbose = false;

    auto* synth = app.add_subcommand("synthesize", "synthesize a barrier triple from a spec");
    synth->add_option("spec", spec_path, "problem specification (TOML)")->required();
    synth->add_option("--out", out_dir, "output bundle directory");
    synth->add_option("--max-iters", max_iters, "override run.max_iters");
    synth->add_option("--gamma-target", gamma_target, "target value for gamma0");
    synth->add_flag("--gamma-maximize", gamma_maximize, "maximize gamma0");
    synth->add_option("--seed", seed, "override run.seed");
    synth->add_option("--extension", extension, "quadratic | cascaded | fixed-policy");
    synth->add_option("--solver-tol", solver_tol, "solver feasibility/gap tolerance");
    synth->add_flag("--export-sdpa", export_sdpa, "dump every lowered SDP in SDPA format");
    synth->add_flag("--verbose", verbose, "per-iteration progress on stderr");

    auto* verify = app.add_subcommand("verify", "independent sampling checks of a bundle");
    verify->add_option("bundle", bundle_dir, "result bundle directory")->required();
    verify->add_option("--samples", samples, "sample count for the condition checks");
    verify->add_option("--tol", tol, "violation tolerance");
    verify->add_option("--seed", seed, "sampling seed");
    verify->add_option("--trajectories", trajectories, "simulated trajectories");
    verify->add_option("--steps", steps, "steps per trajectory");

    auto* levelset = app.add_subcommand("levelset", "export level-set grids as CSV");
    levelset->add_option("bundle", bundle_dir, "result bundle directory")->required();
    levelset->add_option("--plane", plane, "two state variables, e.g. x1,x2");
    levelset->add_option("--resolution", resolution, "grid resolution per axis");
    levelset->add_option("--iterations", which, "all | final");
    levelset->add_option("--band", band, "|h| band reported as the boundary");
    levelset->add_option("--out", out_dir, "output directory (default <bundle>/levelsets)");

    auto* certify = app.add_subcommand("certify", "re-validate the stored Gram certificates");
    certify->add_option("bundle", bundle_dir, "result bundle directory")->required();
    certify->add_option("--eig-tol", eig_tol, "eigenvalue tolerance");
    certify->add_option("--coeff-tol", coeff_tol, "reconstruction tolerance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synthesize(spec_path, out_dir, max_iters, gamma_target, gamma_maximize,
                                  seed, extension, export_sdpa, verbose, solver_tol);
        if (verify->parsed())
            return cmd_verify(bundle_dir, samples, tol, seed, trajectories, steps);
        if (levelset->parsed())
            return cmd_levelset(bundle_dir, plane, resolution, which, band, out_dir);
        if (certify->parsed()) return cmd_certify(bundle_dir, eig_tol, coeff_tol);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
