#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dtcbf/errors.hpp"

namespace dtcbf {

// Scalar decision variables of an SOS program. Separate id space from
// polynomial variables on purpose.
using DecId = int;

// constant + sum of weight * decision variable. The coefficient type of
// ParamPolynomial. Products of two decision-bearing expressions are a
// modeling bug and raise BilinearProduct.
class AffineExpr {
  public:
    AffineExpr() = default;
    AffineExpr(double c) : constant_(c) {}  // NOLINT(google-explicit-constructor)

    static AffineExpr variable(DecId id, double weight = 1.0) {
        AffineExpr e;
        if (weight != 0.0) e.terms_.emplace_back(id, weight);
        return e;
    }

    double constant() const { return constant_; }
    const std::vector<std::pair<DecId, double>>& terms() const { return terms_; }
    bool has_decisions() const { return !terms_.empty(); }

    bool is_zero(double tol = 0.0) const {
        if (std::abs(constant_) > tol) return false;
        for (const auto& [id, w] : terms_)
            if (std::abs(w) > tol) return false;
        return true;
    }

    AffineExpr& operator+=(const AffineExpr& o);
    AffineExpr operator+(const AffineExpr& o) const {
        AffineExpr r = *this;
        r += o;
        return r;
    }
    AffineExpr operator-() const;
    AffineExpr operator-(const AffineExpr& o) const { return *this + (-o); }
    AffineExpr& operator-=(const AffineExpr& o) { return *this += -o; }

    AffineExpr operator*(double s) const;
    AffineExpr& operator*=(double s) {
        *this = *this * s;
        return *this;
    }

    // Guarded product: at most one operand may carry decision variables.
    AffineExpr operator*(const AffineExpr& o) const;

    double evaluate(const std::map<DecId, double>& values) const;

    // Drops weights below tol; keeps the expression canonical.
    void prune(double tol);

    std::string str() const;

  private:
    double constant_ = 0.0;
    std::vector<std::pair<DecId, double>> terms_;  // sorted by DecId
};

inline AffineExpr operator*(double s, const AffineExpr& e) { return e * s; }

}  // namespace dtcbf
