#include "dtcbf/sos_program.hpp"

#include "dtcbf/errors.hpp"

namespace dtcbf {

DecId SosProgram::new_decision(const std::string& name, std::optional<double> lb,
                               std::optional<double> ub) {
    DecId id = static_cast<DecId>(decisions_.size());
    decisions_.push_back({name, lb, ub});
    return id;
}

ParamPolynomial SosProgram::declare_free_poly(const std::vector<Monomial>& basis,
                                              const std::string& name) {
    if (basis.empty()) throw EmptyBasis("declare_free_poly('" + name + "'): empty basis");
    ParamPolynomial p;
    for (size_t i = 0; i < basis.size(); ++i) {
        DecId id = new_decision(name + "[" + std::to_string(i) + "]");
        p += ParamPolynomial::term(basis[i], AffineExpr::variable(id));
    }
    return p;
}

int SosProgram::add_scalar_sos(ParamPolynomial expr, const std::string& label) {
    SosConstraint c;
    c.kind = ConstraintKind::ScalarSos;
    c.id = static_cast<int>(constraints_.size());
    c.label = label;
    expr.prune();
    c.expr = std::move(expr);
    constraints_.push_back(std::move(c));
    return constraints_.back().id;
}

int SosProgram::add_matrix_sos(std::vector<ParamPolynomial> Q, int rows,
                               const std::string& label) {
    if (static_cast<int>(Q.size()) != rows * rows)
        throw DimensionMismatch("add_matrix_sos('" + label + "'): entry count != rows^2");
    for (int i = 0; i < rows; ++i)
        for (int j = i + 1; j < rows; ++j) {
            ParamPolynomial diff =
                Q[static_cast<size_t>(i * rows + j)] - Q[static_cast<size_t>(j * rows + i)];
            diff.prune(1e-12);
            if (!diff.is_zero())
                throw NotSymmetric("add_matrix_sos('" + label + "'): entry (" +
                                   std::to_string(i) + "," + std::to_string(j) +
                                   ") differs from its transpose");
        }
    SosConstraint c;
    c.kind = ConstraintKind::MatrixSos;
    c.id = static_cast<int>(constraints_.size());
    c.label = label;
    for (auto& q : Q) q.prune();
    c.matrix = std::move(Q);
    c.mrows = rows;
    constraints_.push_back(std::move(c));
    return constraints_.back().id;
}

int SosProgram::add_linear_eq(AffineExpr e, const std::string& label) {
    SosConstraint c;
    c.kind = ConstraintKind::LinearEq;
    c.id = static_cast<int>(constraints_.size());
    c.label = label;
    c.lin = std::move(e);
    constraints_.push_back(std::move(c));
    return constraints_.back().id;
}

int SosProgram::add_linear_ineq(AffineExpr e, const std::string& label) {
    SosConstraint c;
    c.kind = ConstraintKind::LinearIneq;
    c.id = static_cast<int>(constraints_.size());
    c.label = label;
    c.lin = std::move(e);
    constraints_.push_back(std::move(c));
    return constraints_.back().id;
}

}  // namespace dtcbf
