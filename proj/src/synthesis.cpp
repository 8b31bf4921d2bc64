#include "dtcbf/synthesis.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "dtcbf/errors.hpp"
#include "dtcbf/gram_basis.hpp"
#include "dtcbf/sdpa_io.hpp"

namespace dtcbf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int max_policy_degree(const SynthesisConfig& cfg) {
    int d = 0;
    for (const auto& basis : cfg.pi_bases)
        for (const auto& m : basis) d = std::max(d, m.degree());
    return d;
}

int pi_tilde_degree(const SynthesisConfig& cfg) {
    return cfg.deg_pi_tilde > 0 ? cfg.deg_pi_tilde : 2 * max_policy_degree(cfg);
}

int theta_degree(const SynthesisConfig& cfg) {
    return cfg.deg_Theta >= 0 ? cfg.deg_Theta : pi_tilde_degree(cfg);
}

int delta_aux_degree(const SynthesisConfig& cfg) {
    return cfg.deg_Delta >= 0 ? cfg.deg_Delta : pi_tilde_degree(cfg);
}

int chain_degree(const SynthesisConfig& cfg, int level) {
    if (cfg.deg_mu_tilde > 0) return cfg.deg_mu_tilde;
    return level * std::max(1, max_policy_degree(cfg));
}

std::string alpha_name(const PolicyIndex& a) {
    std::string s;
    for (size_t i = 0; i < a.size(); ++i) {
        if (i) s += "_";
        s += std::to_string(a[i]);
    }
    return s;
}

std::string chain_aux_name(const PolicyIndex& a, int level) {
    if (index_order(a) == 2) {
        // pi~ surrogate of a quadratic product
        int i = -1, j = -1;
        for (size_t t = 0; t < a.size(); ++t) {
            if (a[t] >= 1 && i < 0) i = static_cast<int>(t);
            if (a[t] >= 1) j = static_cast<int>(t);
        }
        return "pi_tilde_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
    }
    return "mu_tilde_" + alpha_name(a) + "_l" + std::to_string(level);
}

// Everything the product-surrogate constraint block needs, expressed so the
// same generator serves the policy update (h fixed, policy unknown) and the
// barrier update (policy fixed, h unknown).
struct ProductCtx {
    SosProgram* prog = nullptr;
    const SynthesisConfig* cfg = nullptr;
    ParamPolynomial h;  // the barrier entering multiplier products
    std::map<PolicyIndex, ParamPolynomial> a;
    std::vector<ParamPolynomial> mu;
    std::function<ParamPolynomial(const PolicyIndex&, int)> aux;
    std::function<ParamPolynomial(const std::string&, int)> sos_mult;
    std::function<ParamPolynomial(const std::string&, int)> free_poly;
};

std::vector<int> alpha_factors(const PolicyIndex& a) {
    std::vector<int> f;
    for (size_t i = 0; i < a.size(); ++i)
        for (int t = 0; t < a[i]; ++t) f.push_back(static_cast<int>(i));
    return f;
}

void add_square_dominance(ProductCtx& ctx, const ParamPolynomial& p,
                          const ParamPolynomial& dominator, const std::string& label) {
    std::vector<ParamPolynomial> Q = {ParamPolynomial(1.0), p, p, dominator};
    ctx.prog->add_matrix_sos(Q, 2, label);
}

// One product bound 2*target >= Theta1 + Theta2 + Theta3 with the square
// dominances Theta1 >= p^2, Theta2 >= q^2 on {h >= 0, a <= 0}.
void add_product_bound(ProductCtx& ctx, const ParamPolynomial& p, const ParamPolynomial& q,
                       const ParamPolynomial& target, const ParamPolynomial& a_coeff,
                       const std::string& stem, int deg_t1, int deg_t2) {
    const auto& cfg = *ctx.cfg;
    ParamPolynomial t1 = ctx.free_poly(stem + "_Theta1", deg_t1);
    ParamPolynomial t2 = ctx.free_poly(stem + "_Theta2", deg_t2);
    ParamPolynomial t3 = ctx.free_poly(stem + "_Theta3", theta_degree(cfg));
    std::vector<ParamPolynomial> xis;
    for (int t = 1; t <= 8; ++t)
        xis.push_back(ctx.sos_mult(stem + "_xi" + std::to_string(t), cfg.deg_xi));
    add_square_dominance(ctx, p, t1 - xis[0] * ctx.h + xis[1] * a_coeff, stem + " p-dominance");
    add_square_dominance(ctx, q, t2 - xis[2] * ctx.h + xis[3] * a_coeff, stem + " q-dominance");
    ctx.prog->add_scalar_sos(t3 - xis[4] * ctx.h + xis[5] * a_coeff, stem + " slack sign");
    ctx.prog->add_scalar_sos(target * 2.0 - (t1 + t2 + t3) - xis[6] * ctx.h + xis[7] * a_coeff,
                             stem + " product bound");
}

// The full surrogate block: for every structural policy product, constraints
// forcing a(x) * (product(x) - surrogate(x)) >= 0 on the current set.
void add_product_constraints(ProductCtx& ctx) {
    const auto& cfg = *ctx.cfg;
    for (const auto& [alpha, a_coeff] : ctx.a) {
        const int q = index_order(alpha);
        const std::string an = alpha_name(alpha);
        if (q == 2) {
            int i = -1, j = -1;
            for (size_t t = 0; t < alpha.size(); ++t) {
                if (alpha[t] >= 1 && i < 0) i = static_cast<int>(t);
                if (alpha[t] >= 1) j = static_cast<int>(t);
            }
            ParamPolynomial tilde = ctx.aux(alpha, 2);
            if (i == j) {
                std::string stem = "sigma_" + std::to_string(i + 1);
                ParamPolynomial s1 = ctx.sos_mult(stem + "_1", cfg.deg_sigma);
                ParamPolynomial s2 = ctx.sos_mult(stem + "_2", cfg.deg_sigma);
                ParamPolynomial s3 = ctx.sos_mult(stem + "_3", cfg.deg_sigma);
                ParamPolynomial s4 = ctx.sos_mult(stem + "_4", cfg.deg_sigma);
                add_square_dominance(ctx, ctx.mu[static_cast<size_t>(i)],
                                     tilde - s1 * ctx.h + s2 * a_coeff,
                                     "square surrogate " + an);
                ctx.prog->add_scalar_sos(-tilde - s3 * ctx.h - s4 * a_coeff,
                                         "square surrogate sign " + an);
            } else {
                std::string ij = std::to_string(i + 1) + "_" + std::to_string(j + 1);
                add_product_bound(ctx, ctx.mu[static_cast<size_t>(i)],
                                  ctx.mu[static_cast<size_t>(j)], tilde, a_coeff, "xi_" + ij,
                                  theta_degree(cfg), theta_degree(cfg));
                // opposite sign side: surrogate bounded above by the product
                ParamPolynomial d1 = ctx.free_poly("Delta_" + ij + "_1", delta_aux_degree(cfg));
                ParamPolynomial d2 = ctx.free_poly("Delta_" + ij + "_2", delta_aux_degree(cfg));
                ParamPolynomial d3 = ctx.free_poly("Delta_" + ij + "_3", delta_aux_degree(cfg));
                std::vector<ParamPolynomial> etas;
                for (int t = 1; t <= 8; ++t)
                    etas.push_back(
                        ctx.sos_mult("eta_" + ij + "_" + std::to_string(t), cfg.deg_eta));
                add_square_dominance(ctx, ctx.mu[static_cast<size_t>(i)],
                                     d1 - etas[0] * ctx.h - etas[1] * a_coeff,
                                     "cross dominance lower i " + an);
                add_square_dominance(ctx, ctx.mu[static_cast<size_t>(j)],
                                     d2 - etas[2] * ctx.h - etas[3] * a_coeff,
                                     "cross dominance lower j " + an);
                ctx.prog->add_scalar_sos(-d3 - etas[4] * ctx.h - etas[5] * a_coeff,
                                         "cross slack sign " + an);
                ctx.prog->add_scalar_sos((d3 - d1 - d2) - ctx.aux(alpha, 2) * 2.0 -
                                             etas[6] * ctx.h - etas[7] * a_coeff,
                                         "cross product bound " + an);
            }
        } else {
            // left-heavy chain over the factor list
            std::vector<int> factors = alpha_factors(alpha);
            const std::string stem = "casc_" + an;
            if (factors[0] == factors[1]) {
                ParamPolynomial s1 = ctx.sos_mult(stem + "_l2_sigma1", cfg.deg_sigma);
                ParamPolynomial s2 = ctx.sos_mult(stem + "_l2_sigma2", cfg.deg_sigma);
                add_square_dominance(ctx, ctx.mu[static_cast<size_t>(factors[0])],
                                     ctx.aux(alpha, 2) - s1 * ctx.h + s2 * a_coeff,
                                     stem + " level2 square");
            } else {
                add_product_bound(ctx, ctx.mu[static_cast<size_t>(factors[0])],
                                  ctx.mu[static_cast<size_t>(factors[1])], ctx.aux(alpha, 2),
                                  a_coeff, stem + "_l2", theta_degree(cfg), theta_degree(cfg));
            }
            for (int level = 3; level <= q; ++level) {
                const ParamPolynomial& p = ctx.mu[static_cast<size_t>(factors[level - 1])];
                ParamPolynomial acc = ctx.aux(alpha, level - 1);
                add_product_bound(ctx, p, acc, ctx.aux(alpha, level), a_coeff,
                                  stem + "_l" + std::to_string(level),
                                  2 * std::max(1, max_policy_degree(cfg)),
                                  2 * chain_degree(cfg, level - 1));
            }
            ParamPolynomial st1 = ctx.sos_mult(stem + "_sigma_tilde1", cfg.deg_sigma_tilde);
            ParamPolynomial st2 = ctx.sos_mult(stem + "_sigma_tilde2", cfg.deg_sigma_tilde);
            ctx.prog->add_scalar_sos(-ctx.aux(alpha, q) - st1 * ctx.h - st2 * a_coeff,
                                     stem + " sign side");
        }
    }
}

// Structural product multi-indices of any barrier in span(H) through the
// control-affine update, together with the generic expansion.
std::map<PolicyIndex, ParamPolynomial> structural_alphas(const std::vector<Monomial>& H,
                                                         const PlantModel& plant) {
    ParamPolynomial generic;
    for (size_t i = 0; i < H.size(); ++i)
        generic += ParamPolynomial::term(H[i], AffineExpr::variable(static_cast<DecId>(i)));
    PolicyExpansion e = expand_in_policy(generic, plant.state, plant.f, plant.g);
    return e.a;
}

void maybe_export(const Lowered& low, const SynthesisConfig& cfg, const std::string& tag) {
    if (cfg.export_sdpa_dir.empty()) return;
    write_sdpa_file(cfg.export_sdpa_dir + "/" + tag + ".dat-s", low.sdp);
}

}  // namespace

ShiftedInput shift_input(const PlantModel& plant, const InputPolytope& input) {
    auto [lo, hi] = input.bounds();  // UnboundedInputSet when open
    ShiftedInput out;
    out.c.resize(lo.size());
    for (size_t i = 0; i < lo.size(); ++i) out.c[i] = -lo[i];

    out.plant = plant;
    for (int i = 0; i < plant.n; ++i) {
        Polynomial adj = plant.f[static_cast<size_t>(i)];
        for (int j = 0; j < plant.m; ++j) adj -= plant.g.at(i, j) * out.c[static_cast<size_t>(j)];
        out.plant.f[static_cast<size_t>(i)] = adj;
    }

    out.input.M = input.M;
    out.input.d = input.d;
    for (int r = 0; r < input.rows(); ++r) {
        double acc = input.d[static_cast<size_t>(r)];
        for (int j = 0; j < input.inputs(); ++j)
            acc -= input.M[static_cast<size_t>(r)][static_cast<size_t>(j)] *
                   out.c[static_cast<size_t>(j)];
        out.input.d[static_cast<size_t>(r)] = acc;
    }
    // explicit mu_i >= 0 rows when not already present
    for (int j = 0; j < input.inputs(); ++j) {
        bool present = false;
        for (int r = 0; r < out.input.rows() && !present; ++r) {
            bool unit = std::abs(out.input.d[static_cast<size_t>(r)]) < 1e-12;
            for (int jj = 0; jj < input.inputs(); ++jj) {
                double want = (jj == j) ? 1.0 : 0.0;
                unit = unit && std::abs(out.input.M[static_cast<size_t>(r)][static_cast<size_t>(jj)] -
                                        want) < 1e-12;
            }
            present = unit;
        }
        if (!present) {
            std::vector<double> row(static_cast<size_t>(input.inputs()), 0.0);
            row[static_cast<size_t>(j)] = 1.0;
            out.input.M.push_back(row);
            out.input.d.push_back(0.0);
        }
    }
    return out;
}

std::unique_ptr<StepOneProgram> build_step1(const Polynomial& h_prev, const SynthFrame& frame,
                                            const SynthesisConfig& cfg) {
    if (!frame.input.is_nonempty())
        throw InfeasibleInput("the input polytope is empty; no admissible policy exists");
    auto sp = std::make_unique<StepOneProgram>();
    SosProgram& prog = sp->prog;
    const PlantModel& plant = frame.plant;
    const std::vector<VarId>& xs = plant.state;

    sp->gamma0 = prog.new_decision("gamma0", 0.0, 1.0);
    if (cfg.gamma_objective == GammaObjective::Maximize) {
        prog.set_objective(AffineExpr::variable(sp->gamma0) * -1.0);
    } else {
        DecId dev_p = prog.new_decision("gamma_dev_pos", 0.0);
        DecId dev_n = prog.new_decision("gamma_dev_neg", 0.0);
        prog.add_linear_eq(AffineExpr::variable(sp->gamma0) - AffineExpr(cfg.gamma_target) -
                               AffineExpr::variable(dev_p) + AffineExpr::variable(dev_n),
                           "gamma target split");
        prog.set_objective(AffineExpr::variable(dev_p) + AffineExpr::variable(dev_n));
    }

    for (int i = 0; i < plant.m; ++i)
        sp->mu.push_back(prog.declare_free_poly(cfg.pi_bases[static_cast<size_t>(i)],
                                                "pi" + std::to_string(i + 1)));

    // expansion of the fixed barrier; surrogate set comes from the generic
    // basis so every barrier representable later is covered
    PolicyExpansion e = expand_in_policy(ParamPolynomial(h_prev), xs, plant.f, plant.g);
    std::map<PolicyIndex, ParamPolynomial> alphas = structural_alphas(cfg.h_basis, plant);
    if (cfg.extension != ExtensionMode::Cascaded)
        for (const auto& [alpha, coeff] : alphas)
            if (index_order(alpha) > 2)
                throw SemanticError(
                    "barrier basis produces policy products of order " +
                    std::to_string(index_order(alpha)) +
                    "; use the cascaded extension or a fixed policy");

    ProductCtx ctx;
    ctx.prog = &prog;
    ctx.cfg = &cfg;
    ctx.h = ParamPolynomial(h_prev);
    ctx.mu = sp->mu;
    for (const auto& [alpha, coeff] : alphas) {
        auto it = e.a.find(alpha);
        Polynomial a_num = it != e.a.end() ? it->second.to_polynomial() : Polynomial();
        a_num.prune(1e-12);
        // a vanishing coefficient makes the product constraint vacuous, and
        // generating it anyway would pin the policy to zero on the set
        if (a_num.is_zero()) continue;
        sp->a_coeffs[alpha] = a_num;
        ctx.a[alpha] = ParamPolynomial(a_num);
    }
    ctx.aux = [&, sp = sp.get()](const PolicyIndex& alpha, int level) -> ParamPolynomial {
        auto key = std::make_pair(alpha, level);
        auto it = sp->aux.find(key);
        if (it != sp->aux.end()) return it->second;
        int deg = index_order(alpha) == 2 && level == 2 ? pi_tilde_degree(cfg)
                                                        : chain_degree(cfg, level);
        ParamPolynomial p =
            prog.declare_free_poly(monomials_up_to(xs, deg), chain_aux_name(alpha, level));
        sp->aux.emplace(key, p);
        sp->named.emplace_back(chain_aux_name(alpha, level), p);
        return p;
    };
    ctx.sos_mult = [&, sp = sp.get()](const std::string& name, int deg) -> ParamPolynomial {
        ParamPolynomial p = prog.declare_free_poly(monomials_up_to(xs, deg), name);
        prog.add_scalar_sos(p, name + " in SOS");
        sp->named.emplace_back(name, p);
        return p;
    };
    ctx.free_poly = [&, sp = sp.get()](const std::string& name, int deg) -> ParamPolynomial {
        ParamPolynomial p = prog.declare_free_poly(monomials_up_to(xs, deg), name);
        sp->named.emplace_back(name, p);
        return p;
    };

    // decrease condition on the surrogate composition
    ParamPolynomial h_tilde_plus = e.c;
    for (int i = 0; i < plant.m; ++i) h_tilde_plus += e.b[static_cast<size_t>(i)] * sp->mu[static_cast<size_t>(i)];
    for (const auto& [alpha, a_coeff] : ctx.a)
        h_tilde_plus += a_coeff * ctx.aux(alpha, index_order(alpha));

    ParamPolynomial lambda = ctx.sos_mult("Lambda", cfg.deg_Lambda);
    ParamPolynomial gamma_h =
        ParamPolynomial(h_prev) * ParamPolynomial::term(Monomial::one(),
                                                        AffineExpr::variable(sp->gamma0));
    prog.add_scalar_sos(h_tilde_plus - ParamPolynomial(h_prev) + gamma_h -
                            lambda * ParamPolynomial(h_prev),
                        "surrogate decrease");

    // admissibility rows
    for (int r = 0; r < frame.input.rows(); ++r) {
        ParamPolynomial row(frame.input.d[static_cast<size_t>(r)]);
        for (int j = 0; j < plant.m; ++j)
            row += sp->mu[static_cast<size_t>(j)] *
                   frame.input.M[static_cast<size_t>(r)][static_cast<size_t>(j)];
        ParamPolynomial psi = ctx.sos_mult("Psi_" + std::to_string(r + 1), cfg.deg_Psi);
        prog.add_scalar_sos(row - psi * ParamPolynomial(h_prev),
                            "admissibility row " + std::to_string(r + 1));
    }

    add_product_constraints(ctx);
    return sp;
}

namespace {

// lower + optional export + solve; shared across the step solvers
Solution run_program(SosProgram& prog, Lowered& low, const SynthesisConfig& cfg,
                     const std::string& tag) {
    low = lower(prog);
    maybe_export(low, cfg, tag);
    if (low.trivially_infeasible) {
        Solution s;
        s.status = SolveStatus::Infeasible;
        s.message = "structurally infeasible (presolve)";
        return s;
    }
    return solve(low.sdp, cfg.solver);
}

}  // namespace

StepOneResult solve_step1(StepOneProgram& sp, const SynthesisConfig& cfg, int k) {
    Lowered low;
    Solution sol = run_program(sp.prog, low, cfg, "step1_k" + std::to_string(k));
    if (sol.status == SolveStatus::Infeasible) {
        if (k <= 1)
            throw Step1Infeasible(
                k,
                "policy update infeasible at the first iteration; pick a different initial "
                "barrier (a small circular zero-superlevel set around a fixed point is the "
                "easiest shape to certify)");
        throw SynthNumericalFailure(
            k, "policy update reported infeasible at iteration " + std::to_string(k) +
                   "; the alternation guarantees feasibility here, so this is a solver "
                   "tolerance failure");
    }
    if (sol.status != SolveStatus::Optimal)
        throw SynthNumericalFailure(k, "policy update solver failure at iteration " +
                                           std::to_string(k) + ": " + sol.message);

    LiftResult lr = lift(sp.prog, low, sol, cfg.eig_tol, cfg.coeff_tol);
    StepOneResult out;
    out.gamma0 = lr.values.at(sp.gamma0);
    for (const auto& mu : sp.mu) out.mu.push_back(mu.instantiate(lr.values));
    out.a_coeffs = sp.a_coeffs;
    for (const auto& [key, poly] : sp.aux)
        if (key.second == index_order(key.first)) out.tilde[key.first] = poly.instantiate(lr.values);
    for (const auto& [name, poly] : sp.named) out.multipliers[name] = poly.instantiate(lr.values);
    out.certificates = lr.certificates;
    return out;
}

OmegaResult find_omega(const Polynomial& h_prev, const StepOneResult& s1, const SynthFrame& frame,
                       const SynthesisConfig& cfg) {
    PolyVec closed = frame.plant.closed_loop(s1.mu);
    Polynomial h_next = compose(h_prev, frame.plant.state, closed);
    // the multiplier has to reach the top degree of the composed barrier
    int needed = h_next.degree() - h_prev.degree();
    needed += needed % 2;
    int base = std::max(cfg.deg_Omega, needed);
    for (int attempt = 0; attempt < 2; ++attempt) {
        int deg = base + 2 * attempt;
        SosProgram prog;
        ParamPolynomial omega =
            prog.declare_free_poly(monomials_up_to(frame.plant.state, deg), "Omega");
        prog.add_scalar_sos(omega, "Omega in SOS");
        ParamPolynomial expr = ParamPolynomial(h_next - h_prev + h_prev * s1.gamma0) -
                               omega * ParamPolynomial(h_prev);
        prog.add_scalar_sos(expr, "decrease with Omega");
        Lowered low;
        Solution sol = run_program(prog, low, cfg, "omega_deg" + std::to_string(deg));
        if (sol.status == SolveStatus::Optimal) {
            LiftResult lr = lift(prog, low, sol, cfg.eig_tol, cfg.coeff_tol);
            OmegaResult out;
            out.omega = omega.instantiate(lr.values);
            out.certificates = lr.certificates;
            return out;
        }
        if (sol.status != SolveStatus::Infeasible)
            throw SynthNumericalFailure(0, "decrease-multiplier solve failed: " + sol.message);
    }
    throw OmegaInfeasible("no SOS decrease multiplier found at degrees " +
                          std::to_string(base) + " and " + std::to_string(base + 2));
}

std::unique_ptr<StepTwoProgram> build_step2(const Polynomial& h_prev, const StepOneResult& s1,
                                            const Polynomial& omega, const SynthFrame& frame,
                                            const SynthesisConfig& cfg,
                                            const std::vector<Monomial>& h_basis,
                                            bool reimpose_policy_constraints) {
    auto sp = std::make_unique<StepTwoProgram>();
    SosProgram& prog = sp->prog;
    const PlantModel& plant = frame.plant;
    const std::vector<VarId>& xs = plant.state;

    sp->h = prog.declare_free_poly(h_basis, "h");
    sp->delta = prog.new_decision("delta", cfg.delta, 10.0);
    if (cfg.growth_objective == GrowthObjective::MaxDelta)
        prog.set_objective(AffineExpr::variable(sp->delta) * -1.0);
    // Feasibility mode leaves the objective empty; the interior point then
    // centers the new barrier in the step's feasible set.

    // pin the barrier scale, which the growth objective would otherwise ride
    std::vector<double> anchor = cfg.anchor;
    if (anchor.empty()) anchor.assign(xs.size(), 0.0);
    double cap = std::max(1.0, h_prev.evaluate(anchor, xs));
    prog.add_linear_ineq(AffineExpr(cap) - sp->h.evaluate(anchor, xs), "barrier scale anchor");

    PolyVec closed = plant.closed_loop(s1.mu);
    ParamPolynomial h_next = compose(sp->h, xs, closed);
    ParamPolynomial gamma_h = sp->h * s1.gamma0;
    prog.add_scalar_sos(h_next - sp->h + gamma_h - ParamPolynomial(omega) * sp->h,
                        "decrease for updated barrier");

    for (int r = 0; r < frame.input.rows(); ++r) {
        Polynomial row(frame.input.d[static_cast<size_t>(r)]);
        for (int j = 0; j < plant.m; ++j)
            row += s1.mu[static_cast<size_t>(j)] *
                   frame.input.M[static_cast<size_t>(r)][static_cast<size_t>(j)];
        const Polynomial& psi = s1.multipliers.at("Psi_" + std::to_string(r + 1));
        prog.add_scalar_sos(ParamPolynomial(row) - ParamPolynomial(psi) * sp->h,
                            "admissibility row " + std::to_string(r + 1));
    }

    ParamPolynomial phi = prog.declare_free_poly(monomials_up_to(xs, cfg.deg_Phi), "Phi");
    prog.add_scalar_sos(phi, "Phi in SOS");
    sp->named.emplace_back("Phi", phi);
    prog.add_scalar_sos(-sp->h - ParamPolynomial(cfg.epsilon) + phi * ParamPolynomial(frame.safe.s),
                        "containment in the safe set");

    ParamPolynomial xi_cap = prog.declare_free_poly(monomials_up_to(xs, cfg.deg_Xi), "Xi");
    prog.add_scalar_sos(xi_cap, "Xi in SOS");
    sp->named.emplace_back("Xi", xi_cap);
    prog.add_scalar_sos(sp->h - ParamPolynomial::term(Monomial::one(),
                                                      AffineExpr::variable(sp->delta)) -
                            xi_cap * ParamPolynomial(h_prev),
                        "superlevel set enlargement");

    if (reimpose_policy_constraints) {
        // keep the next policy update feasible: same constraint shapes, all
        // multipliers and surrogates frozen at their current values, the
        // barrier (hence the product coefficients) free
        PolicyExpansion e = expand_in_policy(sp->h, xs, plant.f, plant.g);
        ProductCtx ctx;
        ctx.prog = &prog;
        ctx.cfg = &cfg;
        ctx.h = sp->h;
        for (const auto& mu : s1.mu) ctx.mu.emplace_back(mu);
        for (const auto& [alpha, a_prev] : s1.a_coeffs) {
            auto it = e.a.find(alpha);
            ctx.a[alpha] = it != e.a.end() ? it->second : ParamPolynomial();
        }
        ctx.aux = [&](const PolicyIndex& alpha, int level) -> ParamPolynomial {
            if (level == index_order(alpha)) return ParamPolynomial(s1.tilde.at(alpha));
            return ParamPolynomial(s1.multipliers.at(chain_aux_name(alpha, level)));
        };
        ctx.sos_mult = [&](const std::string& name, int) -> ParamPolynomial {
            return ParamPolynomial(s1.multipliers.at(name));
        };
        int fresh = 0;
        ctx.free_poly = [&, f = &fresh](const std::string& name, int deg) -> ParamPolynomial {
            ParamPolynomial p = prog.declare_free_poly(monomials_up_to(xs, deg),
                                                       name + "#" + std::to_string((*f)++));
            return p;
        };

        ParamPolynomial h_tilde_plus = e.c;
        for (int i = 0; i < plant.m; ++i)
            h_tilde_plus += e.b[static_cast<size_t>(i)] * ParamPolynomial(s1.mu[static_cast<size_t>(i)]);
        for (const auto& [alpha, a_coeff] : ctx.a)
            h_tilde_plus += a_coeff * ctx.aux(alpha, index_order(alpha));
        const Polynomial& lambda = s1.multipliers.at("Lambda");
        prog.add_scalar_sos(h_tilde_plus - sp->h + sp->h * s1.gamma0 -
                                ParamPolynomial(lambda) * sp->h,
                            "surrogate decrease (frozen multipliers)");
        add_product_constraints(ctx);
    }
    return sp;
}

StepTwoOutcome solve_step2(StepTwoProgram& sp, const SynthesisConfig& cfg, int k) {
    Lowered low;
    Solution sol = run_program(sp.prog, low, cfg, "step2_k" + std::to_string(k));
    StepTwoOutcome out;
    out.status = status_name(sol.status);
    if (sol.status == SolveStatus::Infeasible) {
        out.feasible = false;
        return out;
    }
    if (sol.status != SolveStatus::Optimal)
        throw SynthNumericalFailure(k, "barrier update solver failure at iteration " +
                                           std::to_string(k) + ": " + sol.message);
    LiftResult lr = lift(sp.prog, low, sol, cfg.eig_tol, cfg.coeff_tol);
    out.feasible = true;
    out.h = sp.h.instantiate(lr.values);
    out.delta_achieved = lr.values.at(sp.delta);
    for (const auto& [name, poly] : sp.named) out.multipliers[name] = poly.instantiate(lr.values);
    out.certificates = lr.certificates;
    return out;
}

std::pair<std::vector<double>, std::vector<double>> safe_set_box(
    const SafeSet& safe, const std::vector<VarId>& vars, double margin, double cap) {
    const size_t n = vars.size();
    std::vector<double> lo(n, -cap), hi(n, cap);
    std::vector<double> origin(n, 0.0);
    bool origin_inside = safe.s.evaluate(origin, vars) >= 0.0;
    for (size_t i = 0; i < n && origin_inside; ++i) {
        for (int dir = 0; dir < 2; ++dir) {
            double sign = dir == 0 ? 1.0 : -1.0;
            std::vector<double> probe = origin;
            probe[i] = sign * cap;
            double extent = cap;
            if (safe.s.evaluate(probe, vars) < 0.0) {
                double a = 0.0, b = cap;
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (a + b);
                    probe[i] = sign * mid;
                    (safe.s.evaluate(probe, vars) >= 0.0 ? a : b) = mid;
                }
                extent = a;
            }
            (dir == 0 ? hi : lo)[i] = sign * extent;
        }
    }
    for (size_t i = 0; i < n; ++i) {
        double span = hi[i] - lo[i];
        hi[i] += 0.5 * margin * span;
        lo[i] -= 0.5 * margin * span;
    }
    return {lo, hi};
}

AreaSampler AreaSampler::make(const SafeSet& safe, const std::vector<VarId>& vars, int count,
                              std::uint64_t seed) {
    AreaSampler s;
    s.vars = vars;
    auto [lo, hi] = safe_set_box(safe, vars);
    s.box_volume = 1.0;
    for (size_t i = 0; i < vars.size(); ++i) s.box_volume *= (hi[i] - lo[i]);
    std::mt19937_64 rng(seed);
    s.points.resize(static_cast<size_t>(count));
    for (auto& pt : s.points) {
        pt.resize(vars.size());
        for (size_t i = 0; i < vars.size(); ++i) {
            std::uniform_real_distribution<double> u(lo[i], hi[i]);
            pt[i] = u(rng);
        }
    }
    return s;
}

double AreaSampler::estimate(const Polynomial& h) const {
    if (points.empty()) return 0.0;
    size_t inside = 0;
    for (const auto& pt : points)
        if (h.evaluate(pt, vars) >= 0.0) ++inside;
    return box_volume * static_cast<double>(inside) / static_cast<double>(points.size());
}

namespace {

PolyVec shift_back(const PolyVec& mu, const std::vector<double>& c) {
    PolyVec pi = mu;
    for (size_t i = 0; i < pi.size(); ++i)
        if (i < c.size() && c[i] != 0.0) pi[i] = pi[i] - Polynomial(c[i]);
    return pi;
}

SynthFrame make_frame(const PlantModel& plant, const InputPolytope& input, const SafeSet& safe,
                      const SynthesisConfig& cfg) {
    SynthFrame frame;
    frame.safe = safe;
    if (cfg.extension == ExtensionMode::Cascaded) {
        if (!cfg.shift.empty()) {
            // explicit shift vector supplied by the configuration
            ShiftedInput si;
            si.c = cfg.shift;
            PlantModel p2 = plant;
            for (int i = 0; i < plant.n; ++i) {
                Polynomial adj = plant.f[static_cast<size_t>(i)];
                for (int j = 0; j < plant.m; ++j)
                    adj -= plant.g.at(i, j) * cfg.shift[static_cast<size_t>(j)];
                p2.f[static_cast<size_t>(i)] = adj;
            }
            InputPolytope u2 = input;
            for (int r = 0; r < input.rows(); ++r) {
                double acc = input.d[static_cast<size_t>(r)];
                for (int j = 0; j < input.inputs(); ++j)
                    acc -= input.M[static_cast<size_t>(r)][static_cast<size_t>(j)] *
                           cfg.shift[static_cast<size_t>(j)];
                u2.d[static_cast<size_t>(r)] = acc;
            }
            frame.plant = p2;
            frame.input = u2;
        } else {
            ShiftedInput si = shift_input(plant, input);
            frame.plant = si.plant;
            frame.input = si.input;
            frame.shift = si.c;
            frame.shifted = true;
            return frame;
        }
        frame.shift = cfg.shift;
        frame.shifted = true;
        return frame;
    }
    frame.plant = plant;
    frame.input = input;
    frame.shift.assign(static_cast<size_t>(plant.m), 0.0);
    return frame;
}

}  // namespace

SynthesisResult run(const PlantModel& plant, const InputPolytope& input, const SafeSet& safe,
                    const SynthesisConfig& cfg) {
    plant.validate();
    if (!input.is_nonempty())
        throw InfeasibleInput("the input polytope is empty; no admissible policy exists");
    if (cfg.extension == ExtensionMode::FixedPolicy) {
        SynthesisConfig quad_cfg = cfg;
        quad_cfg.extension = ExtensionMode::Quadratic;
        SynthesisResult quad = run(plant, input, safe, quad_cfg);
        return run_fixed_policy(plant, input, safe, cfg, quad);
    }

    SynthFrame frame = make_frame(plant, input, safe, cfg);
    SynthesisResult result;
    result.shift = frame.shift;
    result.h_iterates.push_back(cfg.h0);
    result.triple.h = cfg.h0;
    result.triple.pi.assign(static_cast<size_t>(plant.m), Polynomial());

    AreaSampler sampler = AreaSampler::make(safe, plant.state, 20000, cfg.seed);

    Polynomial h_prev = cfg.h0;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        IterationLog log;
        log.k = k;

        auto t1 = Clock::now();
        auto s1prog = build_step1(h_prev, frame, cfg);
        StepOneResult s1;
        try {
            s1 = solve_step1(*s1prog, cfg, k);
        } catch (Step1Infeasible& e) {
            e.partial_logs = result.logs;
            throw;
        } catch (SynthNumericalFailure& e) {
            e.partial_logs = result.logs;
            throw;
        }
        log.step1_status = "Optimal";
        log.gamma0 = s1.gamma0;

        OmegaResult omega;
        bool have_omega = true;
        try {
            omega = find_omega(h_prev, s1, frame, cfg);
        } catch (const OmegaInfeasible&) {
            have_omega = false;
        }
        log.step1_seconds = seconds_since(t1);

        // (h_prev, gamma(k), pi(k)) is now a certified triple
        result.triple.h = h_prev;
        result.triple.gamma0 = s1.gamma0;
        result.triple.pi = shift_back(s1.mu, frame.shift);
        result.triple.multipliers = s1.multipliers;
        if (have_omega) result.triple.multipliers["Omega"] = omega.omega;
        result.triple.certificates = s1.certificates;
        if (have_omega)
            result.triple.certificates.insert(result.triple.certificates.end(),
                                              omega.certificates.begin(),
                                              omega.certificates.end());
        result.iteration_data.push_back({k, h_prev, s1});

        if (!have_omega) {
            log.step2_status = "skipped (no decrease multiplier)";
            result.logs.push_back(log);
            break;
        }

        auto t2 = Clock::now();
        auto s2prog = build_step2(h_prev, s1, omega.omega, frame, cfg, cfg.h_basis, true);
        StepTwoOutcome s2;
        try {
            s2 = solve_step2(*s2prog, cfg, k);
        } catch (SynthNumericalFailure& e) {
            e.partial_logs = result.logs;
            throw;
        }
        log.step2_seconds = seconds_since(t2);
        log.step2_status = s2.status;

        if (!s2.feasible) {
            log.area_estimate = sampler.estimate(h_prev);
            result.logs.push_back(log);
            result.stagnated = true;
            break;
        }

        log.delta_achieved = s2.delta_achieved;
        log.area_estimate = sampler.estimate(s2.h);
        result.logs.push_back(log);

        // (h(k), gamma(k), pi(k)) certified by the barrier-update program
        result.triple.h = s2.h;
        result.triple.multipliers.insert(s2.multipliers.begin(), s2.multipliers.end());
        result.triple.certificates = s2.certificates;
        result.h_iterates.push_back(s2.h);
        h_prev = s2.h;

        if (cfg.verbose)
            std::fprintf(stderr, "[synth] k=%d gamma0=%.6f delta=%.3e area=%.4f\n", k, s1.gamma0,
                         s2.delta_achieved, log.area_estimate);
    }
    return result;
}

SynthesisResult run_fixed_policy(const PlantModel& plant, const InputPolytope& input,
                                 const SafeSet& safe, const SynthesisConfig& cfg,
                                 const SynthesisResult& quadratic_stage) {
    if (quadratic_stage.triple.pi.empty() || quadratic_stage.triple.gamma0 <= 0.0)
        throw SemanticError("fixed-policy extension needs a converged quadratic stage");

    SynthFrame frame;
    frame.plant = plant;
    frame.input = input;
    frame.safe = safe;
    frame.shift.assign(static_cast<size_t>(plant.m), 0.0);

    // stage-two barrier basis
    std::vector<Monomial> basis = cfg.h_final_basis;
    if (basis.empty()) {
        std::vector<VarId> hvars;
        for (const auto& m : cfg.h_basis)
            for (const auto& [v, e] : m.exponents()) hvars.push_back(v);
        std::sort(hvars.begin(), hvars.end());
        hvars.erase(std::unique(hvars.begin(), hvars.end()), hvars.end());
        int deg = cfg.target_degree > 0 ? cfg.target_degree : 2;
        basis = monomials_up_to(hvars, deg);
    }

    // reuse the quadratic stage's policy, decrease multiplier and
    // admissibility multipliers
    StepOneResult fixed;
    fixed.gamma0 = quadratic_stage.triple.gamma0;
    fixed.mu = quadratic_stage.triple.pi;
    for (int r = 0; r < input.rows(); ++r) {
        std::string key = "Psi_" + std::to_string(r + 1);
        auto it = quadratic_stage.triple.multipliers.find(key);
        if (it == quadratic_stage.triple.multipliers.end())
            throw SemanticError("fixed-policy extension: quadratic stage lacks multiplier " + key);
        fixed.multipliers[key] = it->second;
    }
    auto om = quadratic_stage.triple.multipliers.find("Omega");
    if (om == quadratic_stage.triple.multipliers.end())
        throw SemanticError("fixed-policy extension: quadratic stage lacks the decrease multiplier");
    Polynomial omega = om->second;

    SynthesisResult result = quadratic_stage;
    result.stagnated = false;
    Polynomial h_prev = quadratic_stage.triple.h;

    AreaSampler sampler = AreaSampler::make(safe, plant.state, 20000, cfg.seed);

    bool improved = false;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        IterationLog log;
        log.k = static_cast<int>(result.logs.size()) + 1;
        log.step1_status = "fixed policy";
        log.gamma0 = fixed.gamma0;

        auto t2 = Clock::now();
        auto sp = build_step2(h_prev, fixed, omega, frame, cfg, basis, false);
        StepTwoOutcome s2 = solve_step2(*sp, cfg, k);
        log.step2_seconds = seconds_since(t2);
        log.step2_status = s2.status;

        if (!s2.feasible) {
            result.logs.push_back(log);
            result.stagnated = true;
            if (!improved) result.triple.no_improvement = true;
            break;
        }
        improved = true;
        log.delta_achieved = s2.delta_achieved;
        log.area_estimate = sampler.estimate(s2.h);
        result.logs.push_back(log);

        result.triple.h = s2.h;
        result.triple.gamma0 = fixed.gamma0;
        result.triple.pi = fixed.mu;
        for (const auto& [name, poly] : s2.multipliers) result.triple.multipliers[name] = poly;
        result.triple.certificates = s2.certificates;
        result.triple.no_improvement = false;
        result.h_iterates.push_back(s2.h);
        h_prev = s2.h;
    }
    return result;
}

}  // namespace dtcbf
