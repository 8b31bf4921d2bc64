#pragma once

#include <vector>

namespace dtcbf {

// Small dense two-phase simplex, used for Newton-polytope membership tests
// and input-polytope probes. Bland's rule, so it always terminates.
enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

// max c'u subject to M u + d >= 0, u free.
LpResult lp_maximize(const std::vector<std::vector<double>>& M, const std::vector<double>& d,
                     const std::vector<double>& c);

// Is q in the convex hull of the given points?
bool in_convex_hull(const std::vector<std::vector<double>>& points,
                    const std::vector<double>& q, bool* numerically_ok = nullptr);

}  // namespace dtcbf
