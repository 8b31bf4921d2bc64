#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "dtcbf/sdp_problem.hpp"
#include "dtcbf/sos_program.hpp"

namespace dtcbf {

// Gram basis attached to one lowered SOS constraint. For matrix constraints
// the per-matrix-row bases are stacked; row_of tags each element.
struct GramBasisInfo {
    int constraint_id = -1;
    std::vector<Monomial> monomials;
    std::vector<int> row_of;  // matrix row served by each element (all 0 for scalar)
    bool pruned = true;
};

struct Certificate {
    int constraint_id = -1;
    std::string label;
    GramBasisInfo basis;
    Eigen::MatrixXd gram;
    // instantiated constraint entries keyed by matrix position (scalar
    // constraints use (0,0)); kept so the certificate is re-checkable on its
    // own, away from the program that produced it
    std::map<std::pair<int, int>, Polynomial> target;
    double min_eigenvalue = 0.0;
    double max_residual = 0.0;
};

struct Lowered {
    SdpProblem sdp;
    std::vector<int> dec_col;  // DecId -> free column
    struct Block {
        int constraint_id;
        size_t psd_index;  // index into sdp.cones.psd_sizes
        GramBasisInfo basis;
    };
    std::vector<Block> blocks;
    double objective_constant = 0.0;
    std::vector<std::string> warnings;
    bool trivially_infeasible = false;
};

// Gram-lowers every SOS constraint, maps decision variables to the free
// block, box bounds and linear inequalities to nonneg slacks. Deterministic:
// identical programs produce byte-identical layouts.
Lowered lower(const SosProgram& prog);

struct LiftResult {
    std::map<DecId, double> values;
    std::vector<Certificate> certificates;
};

struct Solution;  // sdp_solver.hpp

// Instantiates decision values and extracts per-constraint Gram
// certificates from a solved SDP; validates eigenvalue and reconstruction
// tolerances (CertificateResidual on failure).
LiftResult lift(const SosProgram& prog, const Lowered& low, const Solution& sol,
                double eig_tol = 1e-7, double coeff_tol = 1e-6);

// Reconstruction helper shared with the verifier: polynomial(s) encoded by
// a Gram matrix over a (possibly stacked) basis. Entry (k,l) of the result
// corresponds to matrix rows k,l; scalar constraints use the single (0,0).
std::map<std::pair<int, int>, Polynomial> gram_reconstruct(const GramBasisInfo& basis,
                                                           const Eigen::MatrixXd& gram);

}  // namespace dtcbf
