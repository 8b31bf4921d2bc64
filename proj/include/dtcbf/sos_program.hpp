#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dtcbf/param_polynomial.hpp"

namespace dtcbf {

enum class ConstraintKind { ScalarSos, MatrixSos, LinearEq, LinearIneq };

struct SosConstraint {
    ConstraintKind kind;
    int id = -1;
    std::string label;
    ParamPolynomial expr;                 // ScalarSos
    std::vector<ParamPolynomial> matrix;  // MatrixSos, row-major r x r
    int mrows = 0;
    AffineExpr lin;  // LinearEq: lin == 0, LinearIneq: lin >= 0
};

// SOS program over scalar decision variables. Everything recorded here is
// affine in those variables; the poly layer guards against bilinear slips.
class SosProgram {
  public:
    struct DecInfo {
        std::string name;
        std::optional<double> lb, ub;
    };

    DecId new_decision(const std::string& name, std::optional<double> lb = std::nullopt,
                       std::optional<double> ub = std::nullopt);

    // Fresh unknown polynomial: one decision variable per basis monomial.
    ParamPolynomial declare_free_poly(const std::vector<Monomial>& basis,
                                      const std::string& name);

    int add_scalar_sos(ParamPolynomial expr, const std::string& label);
    // Q must be symmetric as an expression; enforces Q(x) >= 0 for all x.
    int add_matrix_sos(std::vector<ParamPolynomial> Q, int rows, const std::string& label);
    int add_linear_eq(AffineExpr e, const std::string& label);    // e == 0
    int add_linear_ineq(AffineExpr e, const std::string& label);  // e >= 0

    // Minimized objective; empty = feasibility (objective 0).
    void set_objective(AffineExpr minimize) { objective_ = std::move(minimize); }
    const AffineExpr& objective() const { return objective_; }

    const std::vector<DecInfo>& decisions() const { return decisions_; }
    const std::vector<SosConstraint>& constraints() const { return constraints_; }

  private:
    std::vector<DecInfo> decisions_;
    std::vector<SosConstraint> constraints_;
    AffineExpr objective_;
};

}  // namespace dtcbf
