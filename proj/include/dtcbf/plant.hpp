#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dtcbf/lowering.hpp"
#include "dtcbf/poly_vec.hpp"
#include "dtcbf/sdp_solver.hpp"

namespace dtcbf {

// x+ = f(x) + g(x) u
struct PlantModel {
    int n = 0, m = 0;
    PolyVec f;     // n entries, polynomials in the state variables
    PolyMatrix g;  // n x m
    std::vector<VarId> state;

    void validate() const;  // shapes and state-only entries

    // f + g * pi for a numeric policy
    PolyVec closed_loop(const PolyVec& pi) const;
};

// { u : M u + d >= 0 }
struct InputPolytope {
    std::vector<std::vector<double>> M;
    std::vector<double> d;

    int rows() const { return static_cast<int>(M.size()); }
    int inputs() const { return M.empty() ? 0 : static_cast<int>(M[0].size()); }
    bool is_nonempty() const;  // LP feasibility probe
    bool contains(const std::vector<double>& u, double tol = 1e-9) const;
    // per-coordinate [min, max] over the polytope; UnboundedInputSet if open
    std::pair<std::vector<double>, std::vector<double>> bounds() const;
};

// { x : s(x) >= 0 }
struct SafeSet {
    Polynomial s;
};

enum class GammaObjective { Maximize, Target };
enum class ExtensionMode { Quadratic, Cascaded, FixedPolicy };

// Barrier-update objective: maximize the growth margin, or plain
// feasibility, which lets the interior point center the new barrier inside
// the step's feasible set (emptier objective, fatter sets per step).
enum class GrowthObjective { MaxDelta, Feasibility };

struct SynthesisConfig {
    std::vector<Monomial> h_basis;                // H
    std::vector<std::vector<Monomial>> pi_bases;  // Pi_i, one per input
    Polynomial h0;

    // multiplier degrees (state-variable polynomials)
    int deg_Lambda = 2, deg_Omega = 2, deg_Phi = 2, deg_Psi = 2, deg_Xi = 2;
    int deg_sigma = 2, deg_xi = 2, deg_eta = 2, deg_sigma_tilde = 2;
    int deg_pi_tilde = -1;   // default 2 * max policy degree
    int deg_Theta = -1;      // default deg_pi_tilde
    int deg_Delta = -1;      // default deg_pi_tilde
    int deg_mu_tilde = -1;   // cascade level-t auxiliaries; default t * policy degree

    double epsilon = 1e-4;
    double delta = 1e-4;
    GrowthObjective growth_objective = GrowthObjective::MaxDelta;
    // barrier-update normalization: h(anchor) <= max(1, h0(anchor)) pins the
    // scale the growth objective would otherwise ride; empty = origin
    std::vector<double> anchor;
    GammaObjective gamma_objective = GammaObjective::Maximize;
    double gamma_target = 0.8;
    int max_iters = 80;
    std::uint64_t seed = 12345;
    ExtensionMode extension = ExtensionMode::Quadratic;
    std::vector<double> shift;  // input shift; empty = auto (cascaded mode)
    int target_degree = 0;      // fixed-policy stage: degree of the final h
    std::vector<Monomial> h_final_basis;  // optional explicit stage-two basis

    SolverSettings solver;
    double eig_tol = 1e-7;
    double coeff_tol = 1e-6;
    std::string export_sdpa_dir;  // when set, every lowered SDP is dumped there
    bool verbose = false;
};

struct DtcbfTriple {
    Polynomial h;
    double gamma0 = 0.0;  // gamma(r) = gamma0 * r
    PolyVec pi;           // policy on the original inputs
    std::map<std::string, Polynomial> multipliers;
    std::vector<Certificate> certificates;
    bool no_improvement = false;  // fixed-policy stage could not grow the set
};

struct IterationLog {
    int k = 0;
    std::string step1_status;
    std::string step2_status;
    double gamma0 = 0.0;
    double delta_achieved = 0.0;
    double area_estimate = 0.0;  // Monte-Carlo area of the zero-superlevel set
    double step1_seconds = 0.0;
    double step2_seconds = 0.0;
};

}  // namespace dtcbf
