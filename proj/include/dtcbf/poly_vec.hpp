#pragma once

#include <map>
#include <vector>

#include "dtcbf/param_polynomial.hpp"

namespace dtcbf {

using PolyVec = std::vector<Polynomial>;

// Dense row-major matrix of polynomials (n rows, m cols).
struct PolyMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Polynomial> entries;  // rows*cols, row-major

    PolyMatrix() = default;
    PolyMatrix(int r, int c) : rows(r), cols(c), entries(static_cast<size_t>(r) * c) {}

    Polynomial& at(int r, int c) { return entries[static_cast<size_t>(r) * cols + c]; }
    const Polynomial& at(int r, int c) const {
        return entries[static_cast<size_t>(r) * cols + c];
    }
};

// h(subs): substitute the i-th variable of `vars` by subs[i]. Works for
// plain and decision-affine h; the result stays linear in h's decisions.
Polynomial compose(const Polynomial& h, const std::vector<VarId>& vars, const PolyVec& subs);
ParamPolynomial compose(const ParamPolynomial& h, const std::vector<VarId>& vars,
                        const PolyVec& subs);

// Multi-index over the m inputs; total degree >= 2 for stored entries.
using PolicyIndex = std::vector<int>;

inline int index_order(const PolicyIndex& a) {
    int d = 0;
    for (int e : a) d += e;
    return d;
}

// Structured expansion of h(f(x) + g(x) u) in powers of u:
//   h(f+gu) = sum_{|alpha|>=2} a[alpha](x) u^alpha + sum_i b[i](x) u_i + c(x).
// Each coefficient is linear in h's decision variables.
struct PolicyExpansion {
    std::map<PolicyIndex, ParamPolynomial> a;  // |alpha| >= 2
    std::vector<ParamPolynomial> b;            // one per input
    ParamPolynomial c;

    int max_order() const {
        int d = 0;
        for (const auto& bi : b)
            if (!bi.is_zero()) d = 1;
        for (const auto& [alpha, p] : a)
            if (!p.is_zero()) d = std::max(d, index_order(alpha));
        return d;
    }
};

// Expand h (a polynomial in the given state variables, coefficients may be
// decision-affine) through the control-affine update f + g u.
PolicyExpansion expand_in_policy(const ParamPolynomial& h, const std::vector<VarId>& state,
                                 const PolyVec& f, const PolyMatrix& g);

// Substitutes numeric policies back into an expansion; recovers
// h(f + g pi) exactly. Test oracle and Step-2 helper.
ParamPolynomial recombine(const PolicyExpansion& e, const PolyVec& policies);

}  // namespace dtcbf
