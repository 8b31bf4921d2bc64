#include "dtcbf/plant.hpp"

#include "dtcbf/errors.hpp"
#include "dtcbf/simplex.hpp"

namespace dtcbf {

void PlantModel::validate() const {
    if (static_cast<int>(f.size()) != n)
        throw DimensionMismatch("plant: f has " + std::to_string(f.size()) + " entries for n=" +
                                std::to_string(n));
    if (g.rows != n || g.cols != m)
        throw DimensionMismatch("plant: g is " + std::to_string(g.rows) + "x" +
                                std::to_string(g.cols) + ", expected " + std::to_string(n) + "x" +
                                std::to_string(m));
    if (static_cast<int>(state.size()) != n)
        throw DimensionMismatch("plant: state variable list does not match n");
    auto check_state_only = [&](const Polynomial& p, const std::string& who) {
        for (VarId v : p.variables()) {
            bool ok = false;
            for (VarId sv : state) ok = ok || (sv == v);
            if (!ok)
                throw SemanticError("plant: " + who + " uses non-state variable '" +
                                    var_name(v) + "'");
        }
    };
    for (int i = 0; i < n; ++i) check_state_only(f[static_cast<size_t>(i)], "f" + std::to_string(i + 1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) check_state_only(g.at(i, j), "g" + std::to_string(i + 1));
}

PolyVec PlantModel::closed_loop(const PolyVec& pi) const {
    if (static_cast<int>(pi.size()) != m)
        throw DimensionMismatch("closed_loop: policy has " + std::to_string(pi.size()) +
                                " entries for m=" + std::to_string(m));
    PolyVec next(f.size());
    for (int i = 0; i < n; ++i) {
        Polynomial xi = f[static_cast<size_t>(i)];
        for (int j = 0; j < m; ++j) xi += g.at(i, j) * pi[static_cast<size_t>(j)];
        next[static_cast<size_t>(i)] = xi;
    }
    return next;
}

bool InputPolytope::is_nonempty() const {
    std::vector<double> zero(static_cast<size_t>(inputs()), 0.0);
    return lp_maximize(M, d, zero).status != LpStatus::Infeasible;
}

bool InputPolytope::contains(const std::vector<double>& u, double tol) const {
    for (int r = 0; r < rows(); ++r) {
        double acc = d[static_cast<size_t>(r)];
        for (int j = 0; j < inputs(); ++j)
            acc += M[static_cast<size_t>(r)][static_cast<size_t>(j)] * u[static_cast<size_t>(j)];
        if (acc < -tol) return false;
    }
    return true;
}

std::pair<std::vector<double>, std::vector<double>> InputPolytope::bounds() const {
    const int m = inputs();
    std::vector<double> lo(static_cast<size_t>(m)), hi(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        std::vector<double> c(static_cast<size_t>(m), 0.0);
        c[static_cast<size_t>(j)] = 1.0;
        LpResult up = lp_maximize(M, d, c);
        c[static_cast<size_t>(j)] = -1.0;
        LpResult dn = lp_maximize(M, d, c);
        if (up.status == LpStatus::Infeasible || dn.status == LpStatus::Infeasible)
            throw InfeasibleInput("input polytope is empty");
        if (up.status == LpStatus::Unbounded || dn.status == LpStatus::Unbounded)
            throw UnboundedInputSet("input polytope is unbounded in coordinate u" +
                                    std::to_string(j + 1));
        hi[static_cast<size_t>(j)] = up.objective;
        lo[static_cast<size_t>(j)] = -dn.objective;
    }
    return {lo, hi};
}

}  // namespace dtcbf
