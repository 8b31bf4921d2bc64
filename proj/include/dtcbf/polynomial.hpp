#pragma once

#include <map>
#include <string>
#include <vector>

#include "dtcbf/monomial.hpp"

namespace dtcbf {

// Coefficients below this magnitude are dropped after arithmetic, keeping
// the sparse form canonical without affecting SDP-level accuracy.
inline constexpr double kCoeffDropTol = 1e-12;

// Sparse multivariate polynomial with real coefficients.
class Polynomial {
  public:
    Polynomial() = default;
    Polynomial(double c) {  // NOLINT(google-explicit-constructor)
        if (c != 0.0) terms_[Monomial::one()] = c;
    }

    static Polynomial var(VarId v, int exp = 1) {
        Polynomial p;
        p.terms_[Monomial::var(v, exp)] = 1.0;
        return p;
    }

    static Polynomial monomial(const Monomial& m, double c = 1.0) {
        Polynomial p;
        if (c != 0.0) p.terms_[m] = c;
        return p;
    }

    const std::map<Monomial, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;  // -1 for the zero polynomial

    double coefficient(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? 0.0 : it->second;
    }

    // Variables with nonzero exponent somewhere in the support, sorted.
    std::vector<VarId> variables() const;

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator-() const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(double s) const;
    Polynomial& operator+=(const Polynomial& o) {
        *this = *this + o;
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        *this = *this - o;
        return *this;
    }
    Polynomial& operator*=(const Polynomial& o) {
        *this = *this * o;
        return *this;
    }

    Polynomial pow(int e) const;

    double evaluate(const std::vector<double>& point, const std::vector<VarId>& vars) const;

    // Substitute each variable in `vars` by the matching polynomial.
    // Every variable of this polynomial must appear in `vars`.
    Polynomial substitute(const std::vector<VarId>& vars,
                          const std::vector<Polynomial>& values) const;

    bool almost_equal(const Polynomial& o, double tol = 1e-9) const;

    std::string str() const;

    // Removes terms with |coeff| < tol.
    void prune(double tol = kCoeffDropTol);

  private:
    std::map<Monomial, double> terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }
inline Polynomial operator+(double s, const Polynomial& p) { return Polynomial(s) + p; }
inline Polynomial operator-(double s, const Polynomial& p) { return Polynomial(s) - p; }

}  // namespace dtcbf
