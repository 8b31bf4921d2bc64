#include "dtcbf/gram_basis.hpp"

#include <algorithm>

#include "dtcbf/simplex.hpp"

namespace dtcbf {

namespace {

void enumerate(const std::vector<VarId>& vars, size_t k, int remaining,
               std::vector<std::pair<VarId, int>>& acc, std::vector<Monomial>& out) {
    if (k == vars.size()) {
        out.push_back(Monomial::from_pairs(acc));
        return;
    }
    for (int e = 0; e <= remaining; ++e) {
        if (e > 0) acc.emplace_back(vars[k], e);
        enumerate(vars, k + 1, remaining - e, acc, out);
        if (e > 0) acc.pop_back();
    }
}

std::vector<double> exponent_vector(const Monomial& m, const std::vector<VarId>& vars) {
    std::vector<double> v(vars.size(), 0.0);
    for (size_t i = 0; i < vars.size(); ++i) v[i] = m.exponent(vars[i]);
    return v;
}

}  // namespace

std::vector<Monomial> monomials_up_to(const std::vector<VarId>& vars, int deg) {
    std::vector<Monomial> out;
    std::vector<std::pair<VarId, int>> acc;
    enumerate(vars, 0, deg, acc, out);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Monomial> sos_basis(const std::vector<Monomial>& support,
                                const std::vector<VarId>& vars, bool* pruned) {
    if (pruned) *pruned = true;
    if (support.empty()) return {};

    int mindeg = support.front().degree(), maxdeg = 0;
    for (const auto& m : support) {
        mindeg = std::min(mindeg, m.degree());
        maxdeg = std::max(maxdeg, m.degree());
    }
    std::vector<std::vector<double>> expts;
    expts.reserve(support.size());
    for (const auto& m : support) expts.push_back(exponent_vector(m, vars));

    // Per-variable caps: 2 mu_v cannot exceed the largest exponent seen.
    std::vector<int> cap(vars.size(), 0);
    for (const auto& e : expts)
        for (size_t i = 0; i < vars.size(); ++i)
            cap[i] = std::max(cap[i], static_cast<int>(e[i]));

    std::vector<Monomial> candidates = monomials_up_to(vars, maxdeg / 2);
    std::vector<Monomial> basis;
    bool lp_ok_all = true;
    for (const auto& mu : candidates) {
        if (2 * mu.degree() < mindeg || 2 * mu.degree() > maxdeg) continue;
        bool capped = false;
        for (size_t i = 0; i < vars.size(); ++i)
            if (2 * mu.exponent(vars[i]) > cap[i]) {
                capped = true;
                break;
            }
        if (capped) continue;
        std::vector<double> target = exponent_vector(mu, vars);
        for (auto& t : target) t *= 2.0;
        bool lp_ok = true;
        if (in_convex_hull(expts, target, &lp_ok)) basis.push_back(mu);
        lp_ok_all = lp_ok_all && lp_ok;
    }
    if (!lp_ok_all) {
        if (pruned) *pruned = false;
        return monomials_up_to(vars, maxdeg / 2);
    }
    return basis;
}

}  // namespace dtcbf
