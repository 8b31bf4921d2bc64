#include "dtcbf/poly_vec.hpp"

#include "dtcbf/errors.hpp"
#include "dtcbf/variables.hpp"

namespace dtcbf {

Polynomial compose(const Polynomial& h, const std::vector<VarId>& vars, const PolyVec& subs) {
    return h.substitute(vars, subs);
}

ParamPolynomial compose(const ParamPolynomial& h, const std::vector<VarId>& vars,
                        const PolyVec& subs) {
    return h.substitute(vars, subs);
}

PolicyExpansion expand_in_policy(const ParamPolynomial& h, const std::vector<VarId>& state,
                                 const PolyVec& f, const PolyMatrix& g) {
    const int n = static_cast<int>(state.size());
    const int m = g.cols;
    if (static_cast<int>(f.size()) != n || g.rows != n)
        throw ArityMismatch("expand_in_policy: plant shape does not match state dimension");

    // Substitute x_i -> f_i(x) + sum_j g_ij(x) u_j with symbolic inputs,
    // then collect terms by input multidegree.
    const std::vector<VarId> inputs = input_vars(m);
    PolyVec update(f.size());
    for (int i = 0; i < n; ++i) {
        Polynomial xi = f[i];
        for (int j = 0; j < m; ++j) xi += g.at(i, j) * Polynomial::var(inputs[j]);
        update[i] = xi;
    }
    ParamPolynomial expanded = h.substitute(state, update);

    PolicyExpansion out;
    out.b.assign(static_cast<size_t>(m), ParamPolynomial());
    for (const auto& [mono, coeff] : expanded.terms()) {
        PolicyIndex alpha(static_cast<size_t>(m), 0);
        std::vector<std::pair<VarId, int>> rest;
        for (const auto& [v, e] : mono.exponents()) {
            bool is_input = false;
            for (int j = 0; j < m; ++j) {
                if (inputs[j] == v) {
                    alpha[static_cast<size_t>(j)] = e;
                    is_input = true;
                    break;
                }
            }
            if (!is_input) rest.emplace_back(v, e);
        }
        const Monomial xpart = Monomial::from_pairs(std::move(rest));
        const int order = index_order(alpha);
        if (order == 0) {
            out.c += ParamPolynomial::term(xpart, coeff);
        } else if (order == 1) {
            for (int j = 0; j < m; ++j)
                if (alpha[static_cast<size_t>(j)] == 1)
                    out.b[static_cast<size_t>(j)] += ParamPolynomial::term(xpart, coeff);
        } else {
            out.a[alpha] += ParamPolynomial::term(xpart, coeff);
        }
    }
    for (auto& [alpha, p] : out.a) p.prune();
    return out;
}

ParamPolynomial recombine(const PolicyExpansion& e, const PolyVec& policies) {
    ParamPolynomial r = e.c;
    for (size_t i = 0; i < e.b.size(); ++i) {
        if (i >= policies.size()) throw ArityMismatch("recombine: missing policy entry");
        r += e.b[i] * ParamPolynomial(policies[i]);
    }
    for (const auto& [alpha, coeff] : e.a) {
        Polynomial prod(1.0);
        for (size_t i = 0; i < alpha.size(); ++i)
            prod = prod * policies[i].pow(alpha[static_cast<size_t>(i)]);
        r += coeff * ParamPolynomial(prod);
    }
    r.prune();
    return r;
}

}  // namespace dtcbf
