#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dtcbf/variables.hpp"

namespace dtcbf {

// Sparse monomial: sorted (variable, exponent) pairs, exponents > 0.
// Ordered graded-lexicographically so that every container keyed on
// monomials iterates in a reproducible layout.
class Monomial {
  public:
    Monomial() = default;

    static Monomial one() { return Monomial(); }

    static Monomial var(VarId v, int exp = 1) {
        Monomial m;
        if (exp > 0) m.exps_.emplace_back(v, exp);
        return m;
    }

    // Accepts unsorted input with possible duplicates or zero exponents.
    static Monomial from_pairs(std::vector<std::pair<VarId, int>> pairs);

    int degree() const {
        int d = 0;
        for (const auto& [v, e] : exps_) d += e;
        return d;
    }

    int exponent(VarId v) const {
        for (const auto& [var, e] : exps_) {
            if (var == v) return e;
            if (var > v) break;
        }
        return 0;
    }

    bool is_one() const { return exps_.empty(); }

    const std::vector<std::pair<VarId, int>>& exponents() const { return exps_; }

    Monomial operator*(const Monomial& o) const;

    bool operator==(const Monomial& o) const { return exps_ == o.exps_; }
    bool operator!=(const Monomial& o) const { return !(*this == o); }

    // Graded lex: total degree first, then exponent vectors in increasing
    // variable-id order (an absent variable counts as exponent 0).
    bool operator<(const Monomial& o) const;

    double evaluate(const std::vector<double>& point,
                    const std::vector<VarId>& vars) const;

    std::string str() const;

  private:
    std::vector<std::pair<VarId, int>> exps_;
};

}  // namespace dtcbf
