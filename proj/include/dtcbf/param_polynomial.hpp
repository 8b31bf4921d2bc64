#pragma once

#include <map>
#include <string>
#include <vector>

#include "dtcbf/affine.hpp"
#include "dtcbf/polynomial.hpp"

namespace dtcbf {

// Polynomial whose coefficients are affine expressions in scalar decision
// variables. Substituting numeric values for all decision variables yields
// a plain Polynomial. Arithmetic never forms a product of two
// decision-bearing operands (BilinearProduct otherwise).
class ParamPolynomial {
  public:
    ParamPolynomial() = default;
    ParamPolynomial(double c) {  // NOLINT(google-explicit-constructor)
        if (c != 0.0) terms_[Monomial::one()] = AffineExpr(c);
    }
    ParamPolynomial(const Polynomial& p) {  // NOLINT(google-explicit-constructor)
        for (const auto& [m, c] : p.terms()) terms_[m] = AffineExpr(c);
    }

    static ParamPolynomial term(const Monomial& m, const AffineExpr& c) {
        ParamPolynomial p;
        if (!c.is_zero()) p.terms_[m] = c;
        return p;
    }

    const std::map<Monomial, AffineExpr>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;

    bool has_decisions() const {
        for (const auto& [m, c] : terms_)
            if (c.has_decisions()) return true;
        return false;
    }

    // Ids of all decision variables referenced by some coefficient, sorted.
    std::vector<DecId> decision_ids() const;

    AffineExpr coefficient(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? AffineExpr(0.0) : it->second;
    }

    std::vector<VarId> variables() const;

    ParamPolynomial operator+(const ParamPolynomial& o) const;
    ParamPolynomial operator-(const ParamPolynomial& o) const;
    ParamPolynomial operator-() const;
    ParamPolynomial operator*(const ParamPolynomial& o) const;  // bilinearity-guarded
    ParamPolynomial operator*(double s) const;
    ParamPolynomial& operator+=(const ParamPolynomial& o) {
        *this = *this + o;
        return *this;
    }
    ParamPolynomial& operator-=(const ParamPolynomial& o) {
        *this = *this - o;
        return *this;
    }

    // Numeric value when no decision variables are present.
    Polynomial to_polynomial() const;

    // Substitute decision-variable values; always yields a Polynomial.
    Polynomial instantiate(const std::map<DecId, double>& values) const;

    // Evaluate at a point; coefficients collapse to an AffineExpr.
    AffineExpr evaluate(const std::vector<double>& point, const std::vector<VarId>& vars) const;

    // h(subs): substitute each variable in `vars` by a numeric polynomial.
    // Decision variables may appear only in coefficients, so the result is
    // linear in them.
    ParamPolynomial substitute(const std::vector<VarId>& vars,
                               const std::vector<Polynomial>& values) const;

    void prune(double tol = kCoeffDropTol);

    std::string str() const;

  private:
    std::map<Monomial, AffineExpr> terms_;
};

inline ParamPolynomial operator*(double s, const ParamPolynomial& p) { return p * s; }

}  // namespace dtcbf
