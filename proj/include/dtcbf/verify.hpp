#pragma once

#include <array>

#include "dtcbf/plant.hpp"

namespace dtcbf {

// Everything here goes through polynomial evaluation only; no SDP machinery
// is involved, so a synthesizer bug cannot certify itself.

struct SamplingSpec {
    int samples = 100000;     // condition checks
    int trajectories = 1000;  // closed-loop simulation
    int steps = 50;
    double tol = 1e-6;
    std::uint64_t seed = 2024;
    std::vector<double> lo, hi;  // sampling box; empty = safe-set box + 20%
};

struct VerificationReport {
    // max positive violation per condition, with the witness point
    double decrease_violation = 0.0;
    double admissibility_violation = 0.0;
    double containment_violation = 0.0;
    std::vector<double> worst_decrease_point, worst_admissibility_point,
        worst_containment_point;

    int samples_in_set = 0;
    int samples_outside_safe = 0;
    int samples_total = 0;
    bool empty_superlevel_warning = false;
    bool gamma_in_range = true;

    int trajectories_run = 0;
    int trajectory_steps = 0;
    int trajectory_violations = 0;
    double trajectory_min_h = 0.0;
    double trajectory_min_s = 0.0;

    int certificates_checked = 0;
    double certificate_min_eig = 0.0;
    double certificate_max_residual = 0.0;

    double max_violation() const {
        return std::max({decrease_violation, admissibility_violation, containment_violation});
    }
};

// Pointwise check of the barrier conditions on the sampled superlevel set
// plus the contrapositive containment check outside the safe set.
VerificationReport check_triple(const DtcbfTriple& triple, const PlantModel& plant,
                                const InputPolytope& input, const SafeSet& safe,
                                const SamplingSpec& spec);

struct SimulationResult {
    int trajectories = 0;
    int steps = 0;
    int violations = 0;      // trajectories leaving {h >= -tol} or {s >= -tol}
    double min_h = 0.0;      // worst barrier value seen along any trajectory
    double min_s = 0.0;
    std::vector<std::vector<std::vector<double>>> paths;  // [traj][step][coord]
};

SimulationResult simulate(const DtcbfTriple& triple, const PlantModel& plant,
                          const std::vector<std::vector<double>>& x0, int steps,
                          double tol = 1e-6, const SafeSet* safe = nullptr);

// Draw initial states from the superlevel set within the sampling box.
std::vector<std::vector<double>> sample_superlevel_set(const Polynomial& h,
                                                       const std::vector<VarId>& vars,
                                                       const std::vector<double>& lo,
                                                       const std::vector<double>& hi, int count,
                                                       std::uint64_t seed);

struct CertificateReport {
    int checked = 0;
    double min_eigenvalue = 0.0;
    double max_residual = 0.0;
    std::vector<std::string> failures;  // offending constraint labels
    bool ok(double eig_tol, double coeff_tol) const {
        return min_eigenvalue >= -eig_tol && max_residual <= coeff_tol;
    }
};

// Re-validates every stored Gram: symmetry, eigenvalue floor, and
// reconstruction against the stored target polynomials.
CertificateReport check_certificates(const DtcbfTriple& triple, double eig_tol = 1e-7,
                                     double coeff_tol = 1e-6);

struct LevelsetGrid {
    std::array<int, 2> plane_axes = {0, 1};  // indices into vars
    std::vector<double> fixed_point;         // values of the non-plane coordinates
    std::vector<double> lo, hi;              // plane bounds
    int resolution = 0;
    std::vector<std::array<double, 3>> rows;       // x_a, x_b, h
    std::vector<std::array<double, 2>> boundary;   // |h| <= band
};

// Dense grid of barrier values over a 2-D slice, plus the near-zero band.
LevelsetGrid levelset_sample(const Polynomial& h, const std::vector<VarId>& vars,
                             const std::array<int, 2>& plane_axes,
                             const std::vector<double>& fixed_point,
                             const std::vector<double>& lo, const std::vector<double>& hi,
                             int resolution, double band = 1e-2);

}  // namespace dtcbf
