#pragma once

#include <memory>

#include "dtcbf/plant.hpp"

namespace dtcbf {

// Step 1 infeasibility at k=1 is a modeling outcome: the initial barrier
// must change. At k>1 the alternation guarantees feasibility, so failure is
// classified as a solver-tolerance problem (SynthNumericalFailure).
struct Step1Infeasible : std::runtime_error {
    int k;
    std::vector<IterationLog> partial_logs;  // flushed by the front end
    explicit Step1Infeasible(int k_, const std::string& what) : std::runtime_error(what), k(k_) {}
};

struct OmegaInfeasible : std::runtime_error {
    explicit OmegaInfeasible(const std::string& what) : std::runtime_error(what) {}
};

struct SynthNumericalFailure : std::runtime_error {
    int k;
    std::vector<IterationLog> partial_logs;
    SynthNumericalFailure(int k_, const std::string& what) : std::runtime_error(what), k(k_) {}
};

// Working frame of one synthesis run. In cascaded mode the inputs are
// shifted to be non-negative over the admissible set and the plant drift is
// adjusted accordingly; otherwise the frame is the original problem.
struct SynthFrame {
    PlantModel plant;        // working plant (f possibly shifted)
    InputPolytope input;     // working polytope rows (mu coordinates)
    SafeSet safe;
    std::vector<double> shift;  // mu = u + shift
    bool shifted = false;
};

struct ShiftedInput {
    PlantModel plant;     // f~ = f - g c
    InputPolytope input;  // rows over the shifted input
    std::vector<double> c;
};

// c_i = -(min over U of u_i): the shifted input is non-negative on the
// shifted polytope, which also gains explicit mu_i >= 0 rows when they are
// not already present.
ShiftedInput shift_input(const PlantModel& plant, const InputPolytope& input);

// Result of one policy-update solve.
struct StepOneResult {
    double gamma0 = 0.0;
    PolyVec mu;  // policy in the working frame
    std::map<PolicyIndex, Polynomial> a_coeffs;  // expansion of h_prev
    std::map<PolicyIndex, Polynomial> tilde;     // top-level product surrogates
    std::map<std::string, Polynomial> multipliers;
    std::vector<Certificate> certificates;
};

// Program plus the handles needed to read the solution back.
struct StepOneProgram {
    SosProgram prog;
    DecId gamma0 = -1;
    std::vector<ParamPolynomial> mu;
    std::map<PolicyIndex, Polynomial> a_coeffs;
    std::map<std::pair<PolicyIndex, int>, ParamPolynomial> aux;
    std::vector<std::pair<std::string, ParamPolynomial>> named;
};

struct StepTwoProgram {
    SosProgram prog;
    ParamPolynomial h;
    DecId delta = -1;
    std::vector<std::pair<std::string, ParamPolynomial>> named;
};

std::unique_ptr<StepOneProgram> build_step1(const Polynomial& h_prev, const SynthFrame& frame,
                                            const SynthesisConfig& cfg);
StepOneResult solve_step1(StepOneProgram& prog, const SynthesisConfig& cfg, int k);

// SOS multiplier for the plain decrease certificate of the updated policy;
// retries once with degree+2 before giving up.
struct OmegaResult {
    Polynomial omega;
    std::vector<Certificate> certificates;
};
OmegaResult find_omega(const Polynomial& h_prev, const StepOneResult& s1, const SynthFrame& frame,
                       const SynthesisConfig& cfg);

struct StepTwoOutcome {
    bool feasible = false;
    Polynomial h;
    double delta_achieved = 0.0;
    std::map<std::string, Polynomial> multipliers;
    std::vector<Certificate> certificates;
    std::string status;
};

std::unique_ptr<StepTwoProgram> build_step2(const Polynomial& h_prev, const StepOneResult& s1,
                                            const Polynomial& omega, const SynthFrame& frame,
                                            const SynthesisConfig& cfg,
                                            const std::vector<Monomial>& h_basis,
                                            bool reimpose_policy_constraints);
StepTwoOutcome solve_step2(StepTwoProgram& prog, const SynthesisConfig& cfg, int k);

struct SynthesisResult {
    DtcbfTriple triple;
    std::vector<IterationLog> logs;
    std::vector<Polynomial> h_iterates;  // h0, h1, ...
    struct IterationData {               // per successful Step 1, for semantics checks
        int k = 0;
        Polynomial h_prev;
        StepOneResult s1;
    };
    std::vector<IterationData> iteration_data;
    std::vector<double> shift;  // non-empty when the run used shifted inputs
    bool stagnated = false;     // barrier-update infeasible (normal termination)
};

// The full alternation: policy update, decrease multiplier, barrier update,
// repeated until the zero-superlevel set cannot be enlarged.
SynthesisResult run(const PlantModel& plant, const InputPolytope& input, const SafeSet& safe,
                    const SynthesisConfig& cfg);

// Degree extension with the policy frozen: repeated barrier updates only.
// Returns the quadratic-stage triple flagged no_improvement when the first
// higher-degree update is already infeasible.
SynthesisResult run_fixed_policy(const PlantModel& plant, const InputPolytope& input,
                                 const SafeSet& safe, const SynthesisConfig& cfg,
                                 const SynthesisResult& quadratic_stage);

// Monte-Carlo estimate of area({h >= 0} within box), seeded and reusable.
struct AreaSampler {
    std::vector<std::vector<double>> points;
    double box_volume = 0.0;
    std::vector<VarId> vars;

    static AreaSampler make(const SafeSet& safe, const std::vector<VarId>& vars, int count,
                            std::uint64_t seed);
    double estimate(const Polynomial& h) const;
};

// Axis-aligned bounding box of {s >= 0} by bisection along the coordinate
// axes, inflated by `margin`; coordinates s never restricts are capped.
std::pair<std::vector<double>, std::vector<double>> safe_set_box(
    const SafeSet& safe, const std::vector<VarId>& vars, double margin = 0.2, double cap = 10.0);

}  // namespace dtcbf
