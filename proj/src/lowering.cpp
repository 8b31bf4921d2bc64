#include "dtcbf/lowering.hpp"

#include <cmath>

#include "dtcbf/errors.hpp"
#include "dtcbf/gram_basis.hpp"
#include "dtcbf/sdp_solver.hpp"

namespace dtcbf {

namespace {

const double kSqrt2 = std::sqrt(2.0);

std::vector<Monomial> support_of(const ParamPolynomial& p) {
    std::vector<Monomial> s;
    s.reserve(p.terms().size());
    for (const auto& [m, c] : p.terms()) s.push_back(m);
    return s;
}

struct ScalarPlan {
    std::vector<Monomial> basis;
    std::vector<VarId> vars;
    bool pruned = true;
    bool trivial = false;     // expr identically zero
    bool zero_force = false;  // no Gram basis: every coefficient pinned to 0
};

struct MatrixPlan {
    std::vector<std::vector<Monomial>> row_bases;
    std::vector<VarId> vars;
};

ScalarPlan plan_scalar(const SosConstraint& c) {
    ScalarPlan plan;
    if (c.expr.is_zero()) {
        plan.trivial = true;
        return plan;
    }
    plan.vars = c.expr.variables();
    plan.basis = sos_basis(support_of(c.expr), plan.vars, &plan.pruned);
    if (plan.basis.empty()) {
        // No monomial can appear squared (an odd support, say). The only SOS
        // value is 0, so the coefficients get pinned; without decision
        // variables that is structurally impossible.
        if (!c.expr.has_decisions())
            throw EmptyBasis("constraint '" + c.label +
                             "': support admits no sum-of-squares decomposition");
        plan.zero_force = true;
    }
    return plan;
}

MatrixPlan plan_matrix(const SosConstraint& c) {
    MatrixPlan plan;
    const int r = c.mrows;
    for (const auto& q : c.matrix)
        for (VarId v : q.variables()) plan.vars.push_back(v);
    std::sort(plan.vars.begin(), plan.vars.end());
    plan.vars.erase(std::unique(plan.vars.begin(), plan.vars.end()), plan.vars.end());
    plan.row_bases.resize(static_cast<size_t>(r));
    for (int k = 0; k < r; ++k) {
        int deg = 0;
        for (int l = 0; l < r; ++l) {
            int d = c.matrix[static_cast<size_t>(k * r + l)].degree();
            if (d > 0) deg = std::max(deg, (d + 1) / 2);
        }
        plan.row_bases[static_cast<size_t>(k)] = monomials_up_to(plan.vars, deg);
    }
    return plan;
}

// Adds the coefficient-matching rows for one Gram block. `segments` lists,
// per matrix row, the (offset within block, basis) pair; scalar constraints
// pass a single segment.
void emit_matching_rows(SdpProblem& sdp, int block_col0,
                        const std::vector<std::pair<int, const std::vector<Monomial>*>>& segments,
                        const std::vector<const ParamPolynomial*>& targets,
                        const std::vector<int>& dec_col) {
    const size_t nseg = segments.size();
    for (size_t k = 0; k < nseg; ++k) {
        for (size_t l = k; l < nseg; ++l) {
            const auto& [off_k, basis_k] = segments[k];
            const auto& [off_l, basis_l] = segments[l];
            const ParamPolynomial& target = *targets[k * nseg + l];

            // monomial -> gram-side sparse entries
            std::map<Monomial, SparseRow> lhs;
            for (size_t i = 0; i < basis_k->size(); ++i) {
                size_t jstart = (k == l) ? i : 0;
                for (size_t j = jstart; j < basis_l->size(); ++j) {
                    int gi = off_k + static_cast<int>(i);
                    int gj = off_l + static_cast<int>(j);
                    Monomial prod = (*basis_k)[i] * (*basis_l)[j];
                    // Raw coefficient on G_{gi,gj} in the (k,l) matching
                    // equation; see svec scaling below.
                    double raw;
                    if (k == l)
                        raw = (gi == gj) ? 1.0 : 2.0;
                    else
                        raw = 1.0;  // cross-block equation already divided by 2
                    int a = std::min(gi, gj), bcol = std::max(gi, gj);
                    double svec_coeff = (a == bcol) ? raw : raw / kSqrt2;
                    lhs[prod].add(block_col0 + ConeLayout::svec_index(a, bcol), svec_coeff);
                }
            }
            // ensure target support monomials are present even if no product hits them
            for (const auto& [m, coeff] : target.terms()) lhs.emplace(m, SparseRow{});

            for (auto& [m, row] : lhs) {
                AffineExpr coeff = target.coefficient(m);
                for (const auto& [dec, w] : coeff.terms())
                    row.add(dec_col[static_cast<size_t>(dec)], -w);
                row.compress();
                sdp.rows.push_back(std::move(row));
                sdp.b.push_back(coeff.constant());
            }
        }
    }
}

}  // namespace

Lowered lower(const SosProgram& prog) {
    Lowered low;
    const auto& decs = prog.decisions();
    const auto& cons = prog.constraints();

    // Pass 1: plan bases and count cone sizes.
    std::vector<ScalarPlan> scalar_plans(cons.size());
    std::vector<MatrixPlan> matrix_plans(cons.size());
    int n_slack = 0;
    std::vector<int> psd_sizes;
    for (const auto& c : cons) {
        switch (c.kind) {
            case ConstraintKind::ScalarSos: {
                scalar_plans[static_cast<size_t>(c.id)] = plan_scalar(c);
                const auto& plan = scalar_plans[static_cast<size_t>(c.id)];
                if (!plan.trivial && !plan.zero_force)
                    psd_sizes.push_back(static_cast<int>(plan.basis.size()));
                if (!plan.pruned)
                    low.warnings.push_back("constraint '" + c.label +
                                           "': Newton pruning failed, using full basis");
                break;
            }
            case ConstraintKind::MatrixSos: {
                matrix_plans[static_cast<size_t>(c.id)] = plan_matrix(c);
                int total = 0;
                for (const auto& rb : matrix_plans[static_cast<size_t>(c.id)].row_bases)
                    total += static_cast<int>(rb.size());
                psd_sizes.push_back(total);
                break;
            }
            case ConstraintKind::LinearIneq:
                ++n_slack;
                break;
            case ConstraintKind::LinearEq:
                break;
        }
    }
    for (const auto& d : decs) {
        if (d.lb) ++n_slack;
        if (d.ub) ++n_slack;
    }

    auto& sdp = low.sdp;
    sdp.cones.n_free = static_cast<int>(decs.size());
    sdp.cones.n_nonneg = n_slack;
    sdp.cones.psd_sizes = psd_sizes;

    low.dec_col.resize(decs.size());
    for (size_t i = 0; i < decs.size(); ++i) low.dec_col[i] = static_cast<int>(i);

    // Pass 2: emit rows.
    int next_slack = sdp.cones.n_free;
    size_t next_psd = 0;

    // decision box bounds first (stable layout)
    for (size_t i = 0; i < decs.size(); ++i) {
        if (decs[i].lb) {
            SparseRow row;
            row.add(static_cast<int>(i), 1.0);
            row.add(next_slack++, -1.0);
            sdp.rows.push_back(std::move(row));
            sdp.b.push_back(*decs[i].lb);
        }
        if (decs[i].ub) {
            SparseRow row;
            row.add(static_cast<int>(i), 1.0);
            row.add(next_slack++, 1.0);
            sdp.rows.push_back(std::move(row));
            sdp.b.push_back(*decs[i].ub);
        }
    }

    for (const auto& c : cons) {
        switch (c.kind) {
            case ConstraintKind::LinearEq: {
                SparseRow row;
                for (const auto& [dec, w] : c.lin.terms())
                    row.add(low.dec_col[static_cast<size_t>(dec)], w);
                row.compress();
                sdp.rows.push_back(std::move(row));
                sdp.b.push_back(-c.lin.constant());
                break;
            }
            case ConstraintKind::LinearIneq: {
                SparseRow row;
                for (const auto& [dec, w] : c.lin.terms())
                    row.add(low.dec_col[static_cast<size_t>(dec)], w);
                row.add(next_slack++, -1.0);
                row.compress();
                sdp.rows.push_back(std::move(row));
                sdp.b.push_back(-c.lin.constant());
                break;
            }
            case ConstraintKind::ScalarSos: {
                const auto& plan = scalar_plans[static_cast<size_t>(c.id)];
                if (plan.trivial) break;
                if (plan.zero_force) {
                    for (const auto& [m, coeff] : c.expr.terms()) {
                        SparseRow row;
                        for (const auto& [dec, w] : coeff.terms())
                            row.add(low.dec_col[static_cast<size_t>(dec)], -w);
                        row.compress();
                        sdp.rows.push_back(std::move(row));
                        sdp.b.push_back(coeff.constant());
                    }
                    break;
                }
                int col0 = sdp.cones.psd_offset(next_psd);
                std::vector<std::pair<int, const std::vector<Monomial>*>> segs = {
                    {0, &plan.basis}};
                std::vector<const ParamPolynomial*> targets = {&c.expr};
                emit_matching_rows(sdp, col0, segs, targets, low.dec_col);

                GramBasisInfo info;
                info.constraint_id = c.id;
                info.monomials = plan.basis;
                info.row_of.assign(plan.basis.size(), 0);
                info.pruned = plan.pruned;
                low.blocks.push_back({c.id, next_psd, std::move(info)});
                ++next_psd;
                break;
            }
            case ConstraintKind::MatrixSos: {
                const auto& plan = matrix_plans[static_cast<size_t>(c.id)];
                int col0 = sdp.cones.psd_offset(next_psd);
                std::vector<std::pair<int, const std::vector<Monomial>*>> segs;
                int off = 0;
                for (const auto& rb : plan.row_bases) {
                    segs.emplace_back(off, &rb);
                    off += static_cast<int>(rb.size());
                }
                const int r = c.mrows;
                std::vector<const ParamPolynomial*> targets(static_cast<size_t>(r) * r);
                for (int k = 0; k < r; ++k)
                    for (int l = 0; l < r; ++l)
                        targets[static_cast<size_t>(k * r + l)] =
                            &c.matrix[static_cast<size_t>(k * r + l)];
                emit_matching_rows(sdp, col0, segs, targets, low.dec_col);

                GramBasisInfo info;
                info.constraint_id = c.id;
                for (size_t k = 0; k < plan.row_bases.size(); ++k)
                    for (const auto& m : plan.row_bases[k]) {
                        info.monomials.push_back(m);
                        info.row_of.push_back(static_cast<int>(k));
                    }
                low.blocks.push_back({c.id, next_psd, std::move(info)});
                ++next_psd;
                break;
            }
        }
    }

    // objective
    sdp.c.assign(static_cast<size_t>(sdp.cones.total()), 0.0);
    for (const auto& [dec, w] : prog.objective().terms())
        sdp.c[static_cast<size_t>(low.dec_col[static_cast<size_t>(dec)])] = w;
    low.objective_constant = prog.objective().constant();

    auto rep = sdp.presolve();
    low.trivially_infeasible = rep.trivially_infeasible;
    for (auto& w : rep.warnings) low.warnings.push_back(std::move(w));
    return low;
}

std::map<std::pair<int, int>, Polynomial> gram_reconstruct(const GramBasisInfo& basis,
                                                           const Eigen::MatrixXd& gram) {
    std::map<std::pair<int, int>, Polynomial> out;
    const size_t S = basis.monomials.size();
    for (size_t i = 0; i < S; ++i) {
        for (size_t j = i; j < S; ++j) {
            int k = basis.row_of[i], l = basis.row_of[j];
            int kk = std::min(k, l), ll = std::max(k, l);
            double g = gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            double w;
            if (k == l)
                w = (i == j) ? g : 2.0 * g;
            else
                w = g;  // entry contributes once to Q_kl (and once to Q_lk)
            out[{kk, ll}] += Polynomial::monomial(basis.monomials[i] * basis.monomials[j], w);
        }
    }
    for (auto& [kl, p] : out) p.prune(1e-15);
    return out;
}

LiftResult lift(const SosProgram& prog, const Lowered& low, const Solution& sol, double eig_tol,
                double coeff_tol) {
    if (sol.status != SolveStatus::Optimal)
        throw std::logic_error("lift requires an optimal/feasible solution");
    LiftResult out;
    for (size_t i = 0; i < prog.decisions().size(); ++i)
        out.values[static_cast<DecId>(i)] =
            sol.x[static_cast<size_t>(low.dec_col[i])];

    for (const auto& blk : low.blocks) {
        const int s = low.sdp.cones.psd_sizes[blk.psd_index];
        const int off = low.sdp.cones.psd_offset(blk.psd_index);
        Eigen::MatrixXd G(s, s);
        for (int j = 0; j < s; ++j)
            for (int i = 0; i <= j; ++i) {
                double v = sol.x[static_cast<size_t>(off + ConeLayout::svec_index(i, j))];
                double g = (i == j) ? v : v / kSqrt2;
                G(i, j) = g;
                G(j, i) = g;
            }
        Certificate cert;
        cert.constraint_id = blk.constraint_id;
        cert.label = prog.constraints()[static_cast<size_t>(blk.constraint_id)].label;
        cert.basis = blk.basis;
        cert.gram = G;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
        cert.min_eigenvalue = es.eigenvalues().minCoeff();
        if (cert.min_eigenvalue < -eig_tol)
            throw CertificateResidual("constraint '" + cert.label + "': Gram eigenvalue " +
                                      std::to_string(cert.min_eigenvalue) + " below -eig_tol");

        // reconstruction check against the instantiated constraint
        const auto& con = prog.constraints()[static_cast<size_t>(blk.constraint_id)];
        auto rec = gram_reconstruct(blk.basis, G);
        double max_res = 0.0;
        auto residual = [&](int k, int l, const Polynomial& recon, const ParamPolynomial& target) {
            Polynomial inst = target.instantiate(out.values);
            cert.target[{k, l}] = inst;
            Polynomial diff = recon - inst;
            for (const auto& [m, cval] : diff.terms()) max_res = std::max(max_res, std::abs(cval));
        };
        if (con.kind == ConstraintKind::ScalarSos) {
            residual(0, 0, rec.count({0, 0}) ? rec[{0, 0}] : Polynomial(), con.expr);
        } else {
            const int r = con.mrows;
            for (int k = 0; k < r; ++k)
                for (int l = k; l < r; ++l) {
                    Polynomial recon = rec.count({k, l}) ? rec[{k, l}] : Polynomial();
                    residual(k, l, recon, con.matrix[static_cast<size_t>(k * r + l)]);
                }
        }
        cert.max_residual = max_res;
        if (max_res > coeff_tol)
            throw CertificateResidual("constraint '" + cert.label +
                                      "': Gram reconstruction residual " +
                                      std::to_string(max_res) + " exceeds coeff_tol");
        out.certificates.push_back(std::move(cert));
    }
    return out;
}

}  // namespace dtcbf
