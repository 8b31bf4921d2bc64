#include "dtcbf/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dtcbf {

namespace {

constexpr double kTol = 1e-9;

// min c'z s.t. A z = b, z >= 0, b >= 0 assumed (caller flips rows).
// Dense tableau simplex with Bland's rule. Returns status, optimum and z.
struct StdLp {
    int m, n;
    std::vector<std::vector<double>> A;
    std::vector<double> b, c;
};

struct StdResult {
    LpStatus status;
    double obj = 0.0;
    std::vector<double> z;
};

StdResult solve_standard(const StdLp& lp) {
    const int m = lp.m;
    const int n = lp.n;
    // Phase 1: add m artificials with identity basis.
    int total = n + m;
    std::vector<std::vector<double>> T(m, std::vector<double>(total + 1, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) T[i][j] = lp.A[i][j];
        T[i][n + i] = 1.0;
        T[i][total] = lp.b[i];
    }
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;

    auto pivot = [&](int row, int col) {
        double piv = T[row][col];
        for (int j = 0; j <= total; ++j) T[row][j] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            double f = T[i][col];
            if (f == 0.0) continue;
            for (int j = 0; j <= total; ++j) T[i][j] -= f * T[row][j];
        }
        basis[row] = col;
    };

    auto run_phase = [&](const std::vector<double>& cost, int active_cols) -> bool {
        for (int iter = 0; iter < 20000; ++iter) {
            std::vector<double> y(m);
            for (int i = 0; i < m; ++i) y[i] = cost[static_cast<size_t>(basis[i])];
            int enter = -1;
            for (int j = 0; j < active_cols; ++j) {
                double red = cost[static_cast<size_t>(j)];
                for (int i = 0; i < m; ++i) red -= y[i] * T[i][j];
                if (red < -kTol) {
                    enter = j;  // Bland: first improving column
                    break;
                }
            }
            if (enter < 0) return true;  // optimal
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                if (T[i][enter] > kTol) {
                    double ratio = T[i][total] / T[i][enter];
                    if (ratio < best - kTol ||
                        (ratio < best + kTol && (leave < 0 || basis[i] < basis[leave]))) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return false;  // unbounded
            pivot(leave, enter);
        }
        throw std::runtime_error("simplex iteration cap exceeded");
    };

    // Phase 1 objective: minimize the sum of artificials.
    std::vector<double> cost1(total, 0.0);
    for (int j = n; j < total; ++j) cost1[static_cast<size_t>(j)] = 1.0;
    run_phase(cost1, total);
    double art = 0.0;
    for (int i = 0; i < m; ++i)
        if (basis[i] >= n) art += T[i][total];
    if (art > 1e-7) return {LpStatus::Infeasible, 0.0, {}};

    // Drive any remaining artificials out of the basis when possible.
    for (int i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        int col = -1;
        for (int j = 0; j < n; ++j)
            if (std::abs(T[i][j]) > kTol) {
                col = j;
                break;
            }
        if (col >= 0) pivot(i, col);
        // else the row is redundant; harmless
    }

    // Phase 2.
    std::vector<double> cost2(total, 0.0);
    for (int j = 0; j < n; ++j) cost2[static_cast<size_t>(j)] = lp.c[static_cast<size_t>(j)];
    for (int j = n; j < total; ++j) cost2[static_cast<size_t>(j)] = 1e30;  // keep artificials out
    bool bounded = run_phase(cost2, n);

    StdResult r;
    r.z.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < m; ++i)
        if (basis[i] < n) r.z[static_cast<size_t>(basis[i])] = T[i][total];
    r.obj = 0.0;
    for (int j = 0; j < n; ++j) r.obj += lp.c[static_cast<size_t>(j)] * r.z[static_cast<size_t>(j)];
    r.status = bounded ? LpStatus::Optimal : LpStatus::Unbounded;
    return r;
}

}  // namespace

LpResult lp_maximize(const std::vector<std::vector<double>>& M, const std::vector<double>& d,
                     const std::vector<double>& c) {
    const int rows = static_cast<int>(M.size());
    const int nu = rows > 0 ? static_cast<int>(M[0].size()) : static_cast<int>(c.size());
    // u = up - un; M u - t = -d with t >= 0; rows flipped so rhs >= 0.
    StdLp lp;
    lp.m = rows;
    lp.n = 2 * nu + rows;
    lp.A.assign(static_cast<size_t>(rows), std::vector<double>(static_cast<size_t>(lp.n), 0.0));
    lp.b.assign(static_cast<size_t>(rows), 0.0);
    for (int i = 0; i < rows; ++i) {
        double rhs = -d[static_cast<size_t>(i)];
        double sgn = rhs >= 0 ? 1.0 : -1.0;
        for (int j = 0; j < nu; ++j) {
            double mij = M[static_cast<size_t>(i)][static_cast<size_t>(j)];
            lp.A[i][static_cast<size_t>(j)] = sgn * mij;
            lp.A[i][static_cast<size_t>(nu + j)] = -sgn * mij;
        }
        lp.A[i][static_cast<size_t>(2 * nu + i)] = -sgn;
        lp.b[static_cast<size_t>(i)] = sgn * rhs;
    }
    lp.c.assign(static_cast<size_t>(lp.n), 0.0);
    for (int j = 0; j < nu; ++j) {
        lp.c[static_cast<size_t>(j)] = -c[static_cast<size_t>(j)];  // min -c'u = max c'u
        lp.c[static_cast<size_t>(nu + j)] = c[static_cast<size_t>(j)];
    }
    StdResult sr = solve_standard(lp);
    LpResult out;
    out.status = sr.status;
    if (sr.status == LpStatus::Infeasible) return out;
    out.objective = -sr.obj;
    out.x.assign(static_cast<size_t>(nu), 0.0);
    if (sr.status == LpStatus::Optimal)
        for (int j = 0; j < nu; ++j)
            out.x[static_cast<size_t>(j)] =
                sr.z[static_cast<size_t>(j)] - sr.z[static_cast<size_t>(nu + j)];
    return out;
}

bool in_convex_hull(const std::vector<std::vector<double>>& points, const std::vector<double>& q,
                    bool* numerically_ok) {
    if (numerically_ok) *numerically_ok = true;
    if (points.empty()) return false;
    const int dim = static_cast<int>(q.size());
    const int k = static_cast<int>(points.size());
    StdLp lp;
    lp.m = dim + 1;
    lp.n = k;
    lp.A.assign(static_cast<size_t>(lp.m), std::vector<double>(static_cast<size_t>(k), 0.0));
    lp.b.assign(static_cast<size_t>(lp.m), 0.0);
    for (int i = 0; i < dim; ++i) {
        double rhs = q[static_cast<size_t>(i)];
        double sgn = rhs >= 0 ? 1.0 : -1.0;
        for (int j = 0; j < k; ++j)
            lp.A[i][static_cast<size_t>(j)] =
                sgn * points[static_cast<size_t>(j)][static_cast<size_t>(i)];
        lp.b[static_cast<size_t>(i)] = sgn * rhs;
    }
    for (int j = 0; j < k; ++j) lp.A[static_cast<size_t>(dim)][static_cast<size_t>(j)] = 1.0;
    lp.b[static_cast<size_t>(dim)] = 1.0;
    lp.c.assign(static_cast<size_t>(k), 0.0);
    try {
        StdResult sr = solve_standard(lp);
        return sr.status != LpStatus::Infeasible;
    } catch (const std::exception&) {
        if (numerically_ok) *numerically_ok = false;
        return true;  // caller falls back to the unpruned basis
    }
}

}  // namespace dtcbf
