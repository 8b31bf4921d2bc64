#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dtcbf/sdp_problem.hpp"

namespace dtcbf {

struct SolverSettings {
    int max_iters = 200;
    double feas_tol = 1e-8;
    double gap_tol = 1e-8;
    double step_frac = 0.99;  // fraction-to-boundary
    bool verbose = false;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIters, NumericalFailure };

const char* status_name(SolveStatus s);

// Recomputed from the returned vectors, never copied from the iteration loop.
struct ResidualReport {
    double primal = 0.0;       // ||Ax-b||_2 / (1+||b||_2)
    double dual = 0.0;         // ||c-A'y-s||_2 / (1+||c||_2)
    double gap = 0.0;          // |c'x-b'y| / (1+|c'x|+|b'y|)
    double eq_inf = 0.0;       // ||Ax-b||_inf / (1+||b||_inf)
    double min_psd_eig = 0.0;  // over returned primal PSD blocks
};

struct Solution {
    SolveStatus status = SolveStatus::NumericalFailure;
    std::vector<double> x, y, s;
    double objective = 0.0;  // c'x (problem-level constant not included)
    double tau = 0.0, kappa = 0.0;
    int iterations = 0;
    ResidualReport residuals;
    std::string message;
};

// Homogeneous self-dual embedding, Nesterov-Todd scaling, Mehrotra
// predictor-corrector, dense block factorizations. Deterministic.
//
// On Infeasible the returned (y, s) is an approximate Farkas certificate
// normalized to b'y = 1 (A'y + s ~ 0, s in the cone). On Unbounded the
// returned x is a ray normalized to c'x = -1 (Ax ~ 0, x in the cone).
Solution solve(const SdpProblem& problem, const SolverSettings& settings = {});

// Pluggable solver backend; the built-in interior-point method is the
// default implementation.
class SdpBackend {
  public:
    virtual ~SdpBackend() = default;
    virtual std::string name() const = 0;
    virtual Solution submit(const SdpProblem& problem, const SolverSettings& settings) = 0;
};

// Known names: "builtin". Anything else raises BackendUnavailable.
std::unique_ptr<SdpBackend> make_backend(const std::string& name);

}  // namespace dtcbf
