#include "dtcbf/sdp_solver.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dtcbf/errors.hpp"

namespace dtcbf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const double kSqrt2 = std::sqrt(2.0);
constexpr double kInf = std::numeric_limits<double>::infinity();

struct MatEntry {
    int a, b;
    double v;  // symmetric matrix entry value (both orientations listed)
};

// Per-problem constant structure: row entries split by cone section.
struct RowSplit {
    std::vector<std::pair<int, double>> free_cols;    // (free col, coeff)
    std::vector<std::pair<int, double>> nonneg_cols;  // (local nonneg idx, coeff)
    std::vector<std::vector<MatEntry>> psd;           // per block, matrix-form entries
    std::vector<int> touched_blocks;
};

struct Structure {
    int nf, nl, p, N;
    std::vector<int> sizes;           // PSD block sizes
    std::vector<int> offsets;         // svec offsets of blocks in x
    std::vector<RowSplit> rows;
    std::vector<std::vector<int>> rows_of_block;  // block -> touching row ids
    std::vector<std::vector<std::pair<int, double>>> nonneg_rows;  // local idx -> (row, coeff)
    MatrixXd F;  // dense p x nf slice of A over free columns
    VectorXd b, c;
    double bnorm = 0.0, cnorm = 0.0, binf = 0.0, cinf = 0.0;
    int nu = 0;  // barrier order: nl + sum of block sizes
};

Structure build_structure(const SdpProblem& prob) {
    Structure st;
    st.nf = prob.cones.n_free;
    st.nl = prob.cones.n_nonneg;
    st.p = prob.num_rows();
    st.N = prob.cones.total();
    st.sizes = prob.cones.psd_sizes;
    st.offsets.resize(st.sizes.size());
    for (size_t k = 0; k < st.sizes.size(); ++k) st.offsets[k] = prob.cones.psd_offset(k);
    st.nu = st.nl;
    for (int s : st.sizes) st.nu += s;

    st.rows.resize(static_cast<size_t>(st.p));
    st.rows_of_block.resize(st.sizes.size());
    st.nonneg_rows.resize(static_cast<size_t>(st.nl));
    st.F = MatrixXd::Zero(st.p, st.nf);
    for (int i = 0; i < st.p; ++i) {
        RowSplit& rs = st.rows[static_cast<size_t>(i)];
        rs.psd.resize(st.sizes.size());
        for (const auto& [col, v] : prob.rows[static_cast<size_t>(i)].entries) {
            if (col < st.nf) {
                rs.free_cols.emplace_back(col, v);
                st.F(i, col) = v;
            } else if (col < st.nf + st.nl) {
                int loc = col - st.nf;
                rs.nonneg_cols.emplace_back(loc, v);
                st.nonneg_rows[static_cast<size_t>(loc)].emplace_back(i, v);
            } else {
                // locate PSD block
                size_t k = 0;
                while (k + 1 < st.offsets.size() && col >= st.offsets[k + 1]) ++k;
                int local = col - st.offsets[k];
                // invert svec index: local = j(j+1)/2 + i
                int j = static_cast<int>((std::sqrt(8.0 * local + 1.0) - 1.0) / 2.0);
                while (ConeLayout::svec_index(0, j + 1) <= local) ++j;
                while (j > 0 && ConeLayout::svec_index(0, j) > local) --j;
                int a = local - ConeLayout::svec_index(0, j);
                if (a == j) {
                    rs.psd[k].push_back({a, j, v});
                } else {
                    rs.psd[k].push_back({a, j, v / kSqrt2});
                    rs.psd[k].push_back({j, a, v / kSqrt2});
                }
            }
        }
        for (size_t k = 0; k < st.sizes.size(); ++k)
            if (!rs.psd[k].empty()) {
                rs.touched_blocks.push_back(static_cast<int>(k));
                st.rows_of_block[k].push_back(i);
            }
    }
    st.b = VectorXd::Zero(st.p);
    for (int i = 0; i < st.p; ++i) st.b(i) = prob.b[static_cast<size_t>(i)];
    st.c = VectorXd::Zero(st.N);
    for (int j = 0; j < st.N; ++j) st.c(j) = prob.c[static_cast<size_t>(j)];
    st.bnorm = st.b.norm();
    st.cnorm = st.c.norm();
    st.binf = st.p > 0 ? st.b.lpNorm<Eigen::Infinity>() : 0.0;
    st.cinf = st.N > 0 ? st.c.lpNorm<Eigen::Infinity>() : 0.0;
    return st;
}

void mat_from_svec(const double* seg, int s, MatrixXd& M) {
    M.resize(s, s);
    for (int j = 0; j < s; ++j)
        for (int i = 0; i <= j; ++i) {
            double v = seg[ConeLayout::svec_index(i, j)];
            double g = (i == j) ? v : v / kSqrt2;
            M(i, j) = g;
            M(j, i) = g;
        }
}

void svec_from_mat(const MatrixXd& M, double* seg) {
    const int s = static_cast<int>(M.rows());
    for (int j = 0; j < s; ++j)
        for (int i = 0; i <= j; ++i)
            seg[ConeLayout::svec_index(i, j)] =
                (i == j) ? M(i, j) : kSqrt2 * 0.5 * (M(i, j) + M(j, i));
}

// A x and A' y over the composite layout.
VectorXd apply_A(const Structure& st, const SdpProblem& prob, const VectorXd& x) {
    VectorXd r = VectorXd::Zero(st.p);
    for (int i = 0; i < st.p; ++i) {
        double acc = 0.0;
        for (const auto& [col, v] : prob.rows[static_cast<size_t>(i)].entries)
            acc += v * x(col);
        r(i) = acc;
    }
    return r;
}

VectorXd apply_At(const Structure& st, const SdpProblem& prob, const VectorXd& y) {
    VectorXd r = VectorXd::Zero(st.N);
    for (int i = 0; i < st.p; ++i) {
        double yi = y(i);
        if (yi == 0.0) continue;
        for (const auto& [col, v] : prob.rows[static_cast<size_t>(i)].entries)
            r(col) += v * yi;
    }
    return r;
}

// Nesterov-Todd scaling state for the nonneg and PSD sections.
struct Scaling {
    VectorXd w;         // nonneg: w_i = sqrt(x_i/s_i)
    VectorXd lam_l;     // nonneg: sqrt(x_i s_i)
    std::vector<MatrixXd> R, Rt, Rinv, Rinvt, V;  // per PSD block, V = R R'
    std::vector<VectorXd> lam_p;                  // per block NT spectrum
    std::vector<Eigen::LLT<MatrixXd>> lltX, lltS;

    bool compute(const Structure& st, const VectorXd& x, const VectorXd& s) {
        const int nf = st.nf, nl = st.nl;
        w.resize(nl);
        lam_l.resize(nl);
        for (int i = 0; i < nl; ++i) {
            double xs = x(nf + i), ss = s(nf + i);
            if (xs <= 0.0 || ss <= 0.0) return false;
            w(i) = std::sqrt(xs / ss);
            lam_l(i) = std::sqrt(xs * ss);
        }
        const size_t nb = st.sizes.size();
        R.resize(nb);
        Rt.resize(nb);
        Rinv.resize(nb);
        Rinvt.resize(nb);
        V.resize(nb);
        lam_p.resize(nb);
        lltX.resize(nb);
        lltS.resize(nb);
        MatrixXd X, S;
        for (size_t k = 0; k < nb; ++k) {
            int sz = st.sizes[k];
            mat_from_svec(x.data() + st.offsets[k], sz, X);
            mat_from_svec(s.data() + st.offsets[k], sz, S);
            lltX[k].compute(X);
            lltS[k].compute(S);
            if (lltX[k].info() != Eigen::Success || lltS[k].info() != Eigen::Success)
                return false;
            MatrixXd Lx = lltX[k].matrixL();
            MatrixXd Ls = lltS[k].matrixL();
            Eigen::JacobiSVD<MatrixXd> svd(Ls.transpose() * Lx,
                                           Eigen::ComputeFullU | Eigen::ComputeFullV);
            VectorXd sig = svd.singularValues();
            if (sig.minCoeff() <= 0.0) return false;
            VectorXd isqrt = sig.array().sqrt().inverse();
            R[k] = Lx * svd.matrixV() * isqrt.asDiagonal();
            Rinvt[k] = Ls * svd.matrixU() * isqrt.asDiagonal();  // = R^{-T}
            Rt[k] = R[k].transpose();
            Rinv[k] = Rinvt[k].transpose();
            V[k] = R[k] * Rt[k];
            lam_p[k] = sig;
        }
        return true;
    }

    // H = W'W applied to the cone section of z (free part copied through as zero).
    VectorXd apply_H(const Structure& st, const VectorXd& z) const {
        VectorXd r = VectorXd::Zero(st.N);
        for (int i = 0; i < st.nl; ++i) r(st.nf + i) = w(i) * w(i) * z(st.nf + i);
        MatrixXd Z, T;
        for (size_t k = 0; k < st.sizes.size(); ++k) {
            mat_from_svec(z.data() + st.offsets[k], st.sizes[k], Z);
            T = V[k] * Z * V[k];
            svec_from_mat(T, r.data() + st.offsets[k]);
        }
        return r;
    }

    // W' d applied to the cone section.
    VectorXd apply_Wt(const Structure& st, const VectorXd& d) const {
        VectorXd r = VectorXd::Zero(st.N);
        for (int i = 0; i < st.nl; ++i) r(st.nf + i) = w(i) * d(st.nf + i);
        MatrixXd D, T;
        for (size_t k = 0; k < st.sizes.size(); ++k) {
            mat_from_svec(d.data() + st.offsets[k], st.sizes[k], D);
            T = R[k] * D * Rt[k];
            svec_from_mat(T, r.data() + st.offsets[k]);
        }
        return r;
    }

    // scaled primal point: W^{-T} x
    VectorXd scale_x(const Structure& st, const VectorXd& x) const {
        VectorXd r = VectorXd::Zero(st.N);
        for (int i = 0; i < st.nl; ++i) r(st.nf + i) = x(st.nf + i) / w(i);
        MatrixXd X, T;
        for (size_t k = 0; k < st.sizes.size(); ++k) {
            mat_from_svec(x.data() + st.offsets[k], st.sizes[k], X);
            T = Rinv[k] * X * Rinvt[k];
            svec_from_mat(T, r.data() + st.offsets[k]);
        }
        return r;
    }

    // scaled dual point: W s
    VectorXd scale_s(const Structure& st, const VectorXd& s) const {
        VectorXd r = VectorXd::Zero(st.N);
        for (int i = 0; i < st.nl; ++i) r(st.nf + i) = w(i) * s(st.nf + i);
        MatrixXd S, T;
        for (size_t k = 0; k < st.sizes.size(); ++k) {
            mat_from_svec(s.data() + st.offsets[k], st.sizes[k], S);
            T = Rt[k] * S * R[k];
            svec_from_mat(T, r.data() + st.offsets[k]);
        }
        return r;
    }

    // Jordan product u o v in the scaled frame.
    VectorXd jordan_mul(const Structure& st, const VectorXd& u, const VectorXd& v) const {
        VectorXd r = VectorXd::Zero(st.N);
        for (int i = 0; i < st.nl; ++i) r(st.nf + i) = u(st.nf + i) * v(st.nf + i);
        MatrixXd U, Vm, T;
        for (size_t k = 0; k < st.sizes.size(); ++k) {
            mat_from_svec(u.data() + st.offsets[k], st.sizes[k], U);
            mat_from_svec(v.data() + st.offsets[k], st.sizes[k], Vm);
            T = 0.5 * (U * Vm + Vm * U);
            svec_from_mat(T, r.data() + st.offsets[k]);
        }
        return r;
    }

    // Solve lambda o z = d where lambda is the NT spectrum.
    VectorXd lambda_solve(const Structure& st, const VectorXd& d) const {
        VectorXd r = VectorXd::Zero(st.N);
        for (int i = 0; i < st.nl; ++i) r(st.nf + i) = d(st.nf + i) / lam_l(i);
        MatrixXd D, T;
        for (size_t k = 0; k < st.sizes.size(); ++k) {
            int sz = st.sizes[k];
            mat_from_svec(d.data() + st.offsets[k], sz, D);
            T.resize(sz, sz);
            for (int i = 0; i < sz; ++i)
                for (int j = 0; j < sz; ++j)
                    T(i, j) = 2.0 * D(i, j) / (lam_p[k](i) + lam_p[k](j));
            svec_from_mat(T, r.data() + st.offsets[k]);
        }
        return r;
    }

    // svec of the scaled identity times lambda o lambda (i.e. lambda^2).
    VectorXd lambda_sq(const Structure& st) const {
        VectorXd r = VectorXd::Zero(st.N);
        for (int i = 0; i < st.nl; ++i) r(st.nf + i) = lam_l(i) * lam_l(i);
        for (size_t k = 0; k < st.sizes.size(); ++k) {
            int sz = st.sizes[k];
            double* seg = r.data() + st.offsets[k];
            for (int i = 0; i < sz; ++i)
                seg[ConeLayout::svec_index(i, i)] = lam_p[k](i) * lam_p[k](i);
        }
        return r;
    }

    double lambda_dot(const Structure& st) const {  // <lambda, lambda> = <x, s>
        double acc = 0.0;
        for (int i = 0; i < st.nl; ++i) acc += lam_l(i) * lam_l(i);
        for (size_t k = 0; k < st.sizes.size(); ++k) acc += lam_p[k].squaredNorm();
        return acc;
    }
};

// largest step alpha with z + alpha dz staying in the cone (cone part only)
double max_cone_step(const Structure& st, const VectorXd& z, const VectorXd& dz) {
    double alpha = kInf;
    for (int i = 0; i < st.nl; ++i) {
        double zi = z(st.nf + i), di = dz(st.nf + i);
        if (di < 0.0) alpha = std::min(alpha, -zi / di);
    }
    MatrixXd Z, D;
    for (size_t k = 0; k < st.sizes.size(); ++k) {
        mat_from_svec(z.data() + st.offsets[k], st.sizes[k], Z);
        mat_from_svec(dz.data() + st.offsets[k], st.sizes[k], D);
        Eigen::LLT<MatrixXd> llt(Z);
        if (llt.info() != Eigen::Success) return 0.0;
        MatrixXd L = llt.matrixL();
        MatrixXd M = L.triangularView<Eigen::Lower>().solve(D);
        M = L.triangularView<Eigen::Lower>()
                .solve(M.transpose())
                .transpose();  // L^{-1} D L^{-T}
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()),
                                                   Eigen::EigenvaluesOnly);
        double lmin = es.eigenvalues().minCoeff();
        if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
    }
    return alpha;
}

// KKT factorization of the reduced saddle system
//   [ 0    F' ] [dx_f]   [r1]
//   [ F    G  ] [dy  ] = [r2],   G = A_c H A_c' (+ ridge when needed)
struct Kkt {
    MatrixXd G;
    Eigen::LLT<MatrixXd> lltG;
    MatrixXd T;  // G^{-1} F
    MatrixXd Sf;
    Eigen::LLT<MatrixXd> lltS;
    double ridge_g = 0.0, ridge_s = 0.0;

    bool factor(const Structure& st, const Scaling& sc) {
        const int p = st.p, nf = st.nf;
        G = MatrixXd::Zero(p, p);
        // nonneg section
        for (int loc = 0; loc < st.nl; ++loc) {
            const auto& touch = st.nonneg_rows[static_cast<size_t>(loc)];
            double w2 = sc.w(loc) * sc.w(loc);
            for (size_t a = 0; a < touch.size(); ++a)
                for (size_t b2 = 0; b2 <= a; ++b2) {
                    double v = w2 * touch[a].second * touch[b2].second;
                    G(touch[a].first, touch[b2].first) += v;
                }
        }
        // PSD sections: G_ij += <A_i, V A_j V>
        for (size_t k = 0; k < st.sizes.size(); ++k) {
            const auto& rows = st.rows_of_block[k];
            const MatrixXd& V = sc.V[k];
            for (size_t ia = 0; ia < rows.size(); ++ia) {
                const auto& Ea = st.rows[static_cast<size_t>(rows[ia])].psd[k];
                for (size_t ib = 0; ib <= ia; ++ib) {
                    const auto& Eb = st.rows[static_cast<size_t>(rows[ib])].psd[k];
                    double acc = 0.0;
                    for (const auto& ea : Ea)
                        for (const auto& eb : Eb)
                            acc += ea.v * eb.v * V(ea.a, eb.a) * V(ea.b, eb.b);
                    G(rows[ia], rows[ib]) += acc;
                }
            }
        }
        G = G.selfadjointView<Eigen::Lower>();

        ridge_g = 0.0;
        double base = 1e-13 * (1.0 + G.trace() / std::max(1, p));
        for (int attempt = 0; attempt < 8; ++attempt) {
            lltG.compute(G);
            if (lltG.info() == Eigen::Success) break;
            ridge_g = (ridge_g == 0.0) ? base : ridge_g * 100.0;
            if (ridge_g > 1e-4) return false;
            G.diagonal().array() += ridge_g;
        }
        if (lltG.info() != Eigen::Success) return false;

        if (nf > 0) {
            T = lltG.solve(st.F);
            Sf = st.F.transpose() * T;
            Sf = 0.5 * (Sf + Sf.transpose());
            ridge_s = 0.0;
            double sbase = 1e-13 * (1.0 + Sf.trace() / std::max(1, nf));
            for (int attempt = 0; attempt < 8; ++attempt) {
                lltS.compute(Sf);
                if (lltS.info() == Eigen::Success) break;
                ridge_s = (ridge_s == 0.0) ? sbase : ridge_s * 100.0;
                if (ridge_s > 1e-4) return false;
                Sf.diagonal().array() += ridge_s;
            }
            if (lltS.info() != Eigen::Success) return false;
        }
        return true;
    }

    // solve the saddle system, one pass of iterative refinement
    void solve(const Structure& st, const VectorXd& r1, const VectorXd& r2, VectorXd& dxf,
               VectorXd& dy) const {
        auto backsolve = [&](const VectorXd& a1, const VectorXd& a2, VectorXd& zxf,
                             VectorXd& zy) {
            VectorXd w = lltG.solve(a2);
            if (st.nf > 0) {
                zxf = lltS.solve(st.F.transpose() * w - a1);
                zy = w - T * zxf;
            } else {
                zxf.resize(0);
                zy = w;
            }
        };
        backsolve(r1, r2, dxf, dy);
        // the stored G carries any ridge; refine against the unridged system
        if (st.nf > 0) {
            VectorXd e1 = r1 - st.F.transpose() * dy;
            VectorXd e2 = r2 - st.F * dxf - G * dy + ridge_g * dy;
            VectorXd cxf, cy;
            backsolve(e1, e2, cxf, cy);
            dxf += cxf;
            dy += cy;
        } else {
            VectorXd e2 = r2 - G * dy + ridge_g * dy;
            dy += lltG.solve(e2);
        }
    }
};

struct Direction {
    VectorXd dx, dy, ds;
    double dtau = 0.0, dkappa = 0.0;
};

}  // namespace

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::Unbounded: return "Unbounded";
        case SolveStatus::MaxIters: return "MaxIters";
        case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

Solution solve(const SdpProblem& problem_in, const SolverSettings& settings) {
    SdpProblem problem = problem_in;  // local copy; presolve mutates
    Solution sol;
    auto rep = problem.presolve();
    if (rep.trivially_infeasible) {
        // Farkas certificate straight from the contradictory zero row of the
        // original problem.
        sol.status = SolveStatus::Infeasible;
        sol.y.assign(problem_in.rows.size(), 0.0);
        sol.s.assign(static_cast<size_t>(problem_in.cones.total()), 0.0);
        for (size_t i = 0; i < problem_in.rows.size(); ++i) {
            SparseRow r = problem_in.rows[i];
            r.compress();
            if (r.entries.empty() && std::abs(problem_in.b[i]) > 1e-12) {
                sol.y[i] = 1.0 / problem_in.b[i];
                break;
            }
        }
        sol.message = "presolve: contradictory empty row";
        return sol;
    }

    Structure st = build_structure(problem);
    const int N = st.N, p = st.p;

    // initial point: cone identities, free zeros
    VectorXd x = VectorXd::Zero(N), s = VectorXd::Zero(N), y = VectorXd::Zero(p);
    for (int i = 0; i < st.nl; ++i) x(st.nf + i) = s(st.nf + i) = 1.0;
    for (size_t k = 0; k < st.sizes.size(); ++k)
        for (int i = 0; i < st.sizes[k]; ++i) {
            x(st.offsets[k] + ConeLayout::svec_index(i, i)) = 1.0;
            s(st.offsets[k] + ConeLayout::svec_index(i, i)) = 1.0;
        }
    double tau = 1.0, kappa = 1.0;

    auto cone_dot = [&](const VectorXd& a, const VectorXd& b2) {
        double acc = 0.0;
        for (int i = st.nf; i < N; ++i) acc += a(i) * b2(i);
        return acc;
    };

    Scaling sc;
    Kkt kkt;
    Direction aff, comb;
    const double nu1 = st.nu + 1;

    // best near-feasible iterate, kept for reduced-accuracy fallback
    struct Best {
        double score = kInf;
        VectorXd x, y, s;
        double tau = 1.0, kappa = 1.0, pcost = 0.0;
    } best;
    auto finish_with_best = [&](const std::string& note) {
        const double slack = 50.0;
        if (best.score <= slack * std::max(settings.feas_tol, settings.gap_tol)) {
            sol.status = SolveStatus::Optimal;
            sol.x.assign(best.x.data(), best.x.data() + N);
            sol.y.assign(best.y.data(), best.y.data() + p);
            sol.s.assign(best.s.data(), best.s.data() + N);
            for (auto& v : sol.x) v /= best.tau;
            for (auto& v : sol.y) v /= best.tau;
            for (auto& v : sol.s) v /= best.tau;
            sol.tau = best.tau;
            sol.kappa = best.kappa;
            sol.objective = best.pcost;
            sol.message = note + " (reduced accuracy, score " + std::to_string(best.score) + ")";
            return true;
        }
        return false;
    };

    for (int iter = 0; iter < settings.max_iters; ++iter) {
        sol.iterations = iter;
        // residuals
        VectorXd rp = apply_A(st, problem, x) - st.b * tau;            // want 0
        VectorXd rd = -apply_At(st, problem, y) - s + st.c * tau;      // want 0
        double cx = st.c.dot(x), by = st.b.dot(y);
        double rg = cx - by + kappa;
        double mu = (cone_dot(x, s) + tau * kappa) / nu1;

        // convergence tests on the de-homogenized point
        double pres = rp.norm() / (tau * (1.0 + st.bnorm));
        double dres = rd.norm() / (tau * (1.0 + st.cnorm));
        double pcost = cx / tau, dcost = by / tau;
        double gap = cone_dot(x, s) / (tau * tau);
        double relgap = gap / std::max(1.0, std::abs(pcost));
        if (settings.verbose)
            std::printf("it %3d  mu %9.2e  pres %9.2e  dres %9.2e  gap %9.2e  tau %8.2e  kap %8.2e\n",
                        iter, mu, pres, dres, gap, tau, kappa);
        double score = std::max({pres, dres, std::min(relgap, std::abs(pcost - dcost) /
                                                                  std::max(1.0, std::abs(pcost)))});
        if (score < best.score) {
            best.score = score;
            best.x = x;
            best.y = y;
            best.s = s;
            best.tau = tau;
            best.kappa = kappa;
            best.pcost = pcost;
        }
        if (pres <= settings.feas_tol && dres <= settings.feas_tol &&
            (relgap <= settings.gap_tol ||
             std::abs(pcost - dcost) <=
                 settings.gap_tol * std::max(1.0, std::abs(pcost)))) {
            sol.status = SolveStatus::Optimal;
            sol.x.assign(x.data(), x.data() + N);
            sol.y.assign(y.data(), y.data() + p);
            sol.s.assign(s.data(), s.data() + N);
            for (auto& v : sol.x) v /= tau;
            for (auto& v : sol.y) v /= tau;
            for (auto& v : sol.s) v /= tau;
            sol.tau = tau;
            sol.kappa = kappa;
            sol.objective = pcost;
            break;
        }
        // infeasibility certificates; only trusted once the homogenization
        // clearly favors kappa over tau
        const bool tau_collapsing = kappa > 100.0 * tau;
        if (by > 0.0 && tau_collapsing) {
            VectorXd inf_res = apply_At(st, problem, y) + s;
            if (inf_res.norm() <= settings.feas_tol * (1.0 + st.cnorm) * by) {
                sol.status = SolveStatus::Infeasible;
                sol.y.assign(y.data(), y.data() + p);
                sol.s.assign(s.data(), s.data() + N);
                for (auto& v : sol.y) v /= by;
                for (auto& v : sol.s) v /= by;
                sol.message = "primal infeasibility certificate";
                break;
            }
        }
        if (cx < 0.0 && tau_collapsing) {
            VectorXd ray_res = apply_A(st, problem, x);
            if (ray_res.norm() <= settings.feas_tol * (1.0 + st.bnorm) * (-cx)) {
                sol.status = SolveStatus::Unbounded;
                sol.x.assign(x.data(), x.data() + N);
                for (auto& v : sol.x) v /= -cx;
                sol.message = "dual infeasibility certificate (unbounded objective)";
                break;
            }
        }
        if (mu < 1e-14 && finish_with_best("progress floor")) break;

        if (!sc.compute(st, x, s)) {
            if (finish_with_best("scaling breakdown")) break;
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "Nesterov-Todd scaling breakdown at iteration " +
                          std::to_string(iter);
            break;
        }
        if (!kkt.factor(st, sc)) {
            if (finish_with_best("factorization breakdown")) break;
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "KKT factorization breakdown at iteration " + std::to_string(iter);
            break;
        }

        VectorXd lam2 = sc.lambda_sq(st);

        // the tau-column solve is shared by predictor and corrector
        VectorXd h1 = st.c.head(st.nf);
        VectorXd h2 = st.b + apply_A(st, problem, sc.apply_H(st, st.c));
        VectorXd zx1, zy1;
        kkt.solve(st, h1, h2, zx1, zy1);
        // dx1 cone part helper: H(A' dy1 - c)
        VectorXd At_zy1 = apply_At(st, problem, zy1);
        VectorXd dx1 = sc.apply_H(st, At_zy1 - st.c);  // cone sections only

        auto newton = [&](double sigma, const VectorXd* gamma_corr, double dtau_a,
                          double dkap_a, Direction& dir) -> bool {
            const double eta = 1.0 - sigma;
            // complementarity rhs in scaled space
            VectorXd d4 = -lam2;
            if (gamma_corr) d4 -= *gamma_corr;
            if (sigma > 0.0) {
                for (int i = 0; i < st.nl; ++i) d4(st.nf + i) += sigma * mu;
                for (size_t k = 0; k < st.sizes.size(); ++k)
                    for (int i = 0; i < st.sizes[k]; ++i)
                        d4(st.offsets[k] + ConeLayout::svec_index(i, i)) += sigma * mu;
            }
            double d5 = -tau * kappa + sigma * mu - dtau_a * dkap_a;

            VectorXd dtil = sc.lambda_solve(st, d4);
            VectorXd Wt_dtil = sc.apply_Wt(st, dtil);

            VectorXd g1 = eta * rd.head(st.nf);
            VectorXd g2 = -eta * rp - apply_A(st, problem, Wt_dtil) +
                          eta * apply_A(st, problem, sc.apply_H(st, rd));
            VectorXd zx0, zy0;
            kkt.solve(st, g1, g2, zx0, zy0);

            VectorXd At_zy0 = apply_At(st, problem, zy0);
            VectorXd dx0 = Wt_dtil + sc.apply_H(st, At_zy0 - eta * rd);  // cone sections
            // free components
            for (int i = 0; i < st.nf; ++i) dx0(i) = zx0.size() > 0 ? zx0(i) : 0.0;
            VectorXd dx1f = dx1;
            for (int i = 0; i < st.nf; ++i) dx1f(i) = zx1.size() > 0 ? zx1(i) : 0.0;

            double denom = st.c.dot(dx1f) - st.b.dot(zy1) - kappa / tau;
            if (std::abs(denom) < 1e-300) return false;
            double numer = -eta * rg - st.c.dot(dx0) + st.b.dot(zy0) - d5 / tau;
            double dtau = numer / denom;

            dir.dx = dx0 + dtau * dx1f;
            dir.dy = zy0 + dtau * zy1;
            dir.dtau = dtau;
            dir.ds = VectorXd::Zero(N);
            VectorXd At_dy = apply_At(st, problem, dir.dy);
            for (int i = st.nf; i < N; ++i)
                dir.ds(i) = -At_dy(i) + st.c(i) * dtau + eta * rd(i);
            dir.dkappa = (d5 - kappa * dtau) / tau;
            return true;
        };

        // predictor
        if (!newton(0.0, nullptr, 0.0, 0.0, aff)) {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "singular tau-update in predictor";
            break;
        }
        double ax = max_cone_step(st, x, aff.dx);
        double as = max_cone_step(st, s, aff.ds);
        double at = aff.dtau < 0 ? -tau / aff.dtau : kInf;
        double ak = aff.dkappa < 0 ? -kappa / aff.dkappa : kInf;
        double alpha_aff = std::min({1.0, ax, as, at, ak});

        // centering parameter from the affine trial point
        double gap_aff = cone_dot(x + alpha_aff * aff.dx, s + alpha_aff * aff.ds) +
                         (tau + alpha_aff * aff.dtau) * (kappa + alpha_aff * aff.dkappa);
        double sigma = std::pow(std::max(0.0, gap_aff / (mu * nu1)), 3.0);
        sigma = std::min(1.0, sigma);

        // corrector with Mehrotra second-order term
        VectorXd gamma = sc.jordan_mul(st, sc.scale_x(st, aff.dx), sc.scale_s(st, aff.ds));
        if (!newton(sigma, &gamma, aff.dtau, aff.dkappa, comb)) {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "singular tau-update in corrector";
            break;
        }

        ax = max_cone_step(st, x, comb.dx);
        as = max_cone_step(st, s, comb.ds);
        at = comb.dtau < 0 ? -tau / comb.dtau : kInf;
        ak = comb.dkappa < 0 ? -kappa / comb.dkappa : kInf;
        double alpha = settings.step_frac * std::min({ax, as, at, ak});
        alpha = std::min(alpha, 1.0);
        if (alpha < 1e-9) {
            if (finish_with_best("step collapse")) break;
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "step length collapsed at iteration " + std::to_string(iter);
            break;
        }

        x += alpha * comb.dx;
        y += alpha * comb.dy;
        s += alpha * comb.ds;
        tau += alpha * comb.dtau;
        kappa += alpha * comb.dkappa;
        if (iter + 1 == settings.max_iters) sol.status = SolveStatus::MaxIters;
    }

    if (sol.status == SolveStatus::MaxIters) {
        sol.x.assign(x.data(), x.data() + N);
        sol.y.assign(y.data(), y.data() + p);
        sol.s.assign(s.data(), s.data() + N);
        for (auto& v : sol.x) v /= tau;
        for (auto& v : sol.y) v /= tau;
        for (auto& v : sol.s) v /= tau;
        sol.objective = st.c.dot(x) / tau;
        sol.message = "iteration limit reached";
    }

    // self-validation: recompute residuals from the returned vectors
    if (sol.status == SolveStatus::Optimal || sol.status == SolveStatus::MaxIters) {
        VectorXd rx = Eigen::Map<const VectorXd>(sol.x.data(), N);
        VectorXd ry = Eigen::Map<const VectorXd>(sol.y.data(), p);
        VectorXd rs = Eigen::Map<const VectorXd>(sol.s.data(), N);
        VectorXd pr = apply_A(st, problem, rx) - st.b;
        VectorXd dr = st.c - apply_At(st, problem, ry) - rs;
        double cxv = st.c.dot(rx), byv = st.b.dot(ry);
        sol.residuals.primal = pr.norm() / (1.0 + st.bnorm);
        sol.residuals.dual = dr.norm() / (1.0 + st.cnorm);
        sol.residuals.gap = std::abs(cxv - byv) / (1.0 + std::abs(cxv) + std::abs(byv));
        sol.residuals.eq_inf =
            (p > 0 ? pr.lpNorm<Eigen::Infinity>() : 0.0) / (1.0 + st.binf);
        double mineig = 0.0;
        MatrixXd X;
        for (size_t k = 0; k < st.sizes.size(); ++k) {
            mat_from_svec(rx.data() + st.offsets[k], st.sizes[k], X);
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(X, Eigen::EigenvaluesOnly);
            mineig = std::min(mineig, es.eigenvalues().minCoeff());
        }
        sol.residuals.min_psd_eig = mineig;
        sol.objective = cxv;
    }
    return sol;
}

namespace {

class BuiltinBackend final : public SdpBackend {
  public:
    std::string name() const override { return "builtin"; }
    Solution submit(const SdpProblem& problem, const SolverSettings& settings) override {
        return solve(problem, settings);
    }
};

}  // namespace

std::unique_ptr<SdpBackend> make_backend(const std::string& name) {
    if (name == "builtin") return std::make_unique<BuiltinBackend>();
    throw BackendUnavailable("no such solver backend: '" + name + "'");
}

}  // namespace dtcbf
