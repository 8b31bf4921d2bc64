#include <random>
#include <sstream>

#include "doctest.h"
#include "dtcbf/errors.hpp"
#include "dtcbf/gram_basis.hpp"
#include "dtcbf/lowering.hpp"
#include "dtcbf/poly_text.hpp"
#include "dtcbf/sdp_solver.hpp"
#include "dtcbf/sdpa_io.hpp"

using namespace dtcbf;

namespace {

SolveStatus sos_check(const Polynomial& p) {
    SosProgram prog;
    prog.add_scalar_sos(ParamPolynomial(p), "corpus");
    Lowered low = lower(prog);
    return solve(low.sdp).status;
}

}  // namespace

TEST_CASE("declare_free_poly allocates one decision per basis monomial") {
    VarId x = var_id("x1");
    SosProgram prog;
    ParamPolynomial p =
        prog.declare_free_poly({Monomial::one(), Monomial::var(x), Monomial::var(x, 2)}, "h");
    CHECK(prog.decisions().size() == 3);
    CHECK(p.decision_ids().size() == 3);

    ParamPolynomial c = prog.declare_free_poly({Monomial::one()}, "c");
    CHECK(prog.decisions().size() == 4);
    CHECK(c.degree() == 0);

    // quadratic two-variable basis: 6 fresh coefficients
    std::vector<VarId> xs = state_vars(2);
    SosProgram prog2;
    ParamPolynomial h = prog2.declare_free_poly(monomials_up_to(xs, 2), "h");
    CHECK(prog2.decisions().size() == 6);
    CHECK(h.decision_ids().size() == 6);

    CHECK_THROWS_AS(prog2.declare_free_poly({}, "bad"), EmptyBasis);
}

TEST_CASE("newton polytope pruning") {
    std::vector<VarId> xs = state_vars(2);
    // x^4 + 1: half-support excludes degree-1 cross terms except those in
    // the segment hull; basis {1, x1, x1^2}.
    Polynomial p = Polynomial::var(xs[0], 4) + 1.0;
    std::vector<Monomial> sup;
    for (const auto& [m, c] : p.terms()) sup.push_back(m);
    bool pruned = false;
    auto basis = sos_basis(sup, p.variables(), &pruned);
    CHECK(pruned);
    REQUIRE(basis.size() == 3);
    CHECK(basis[0] == Monomial::one());
    CHECK(basis[1] == Monomial::var(xs[0]));
    CHECK(basis[2] == Monomial::var(xs[0], 2));

    // odd support -> no basis
    Polynomial q = Polynomial::var(xs[0]);
    std::vector<Monomial> supq;
    for (const auto& [m, c] : q.terms()) supq.push_back(m);
    CHECK(sos_basis(supq, q.variables()).empty());
}

TEST_CASE("accept/reject corpus") {
    // accepts
    CHECK(sos_check(parse_polynomial("x1^2 + 2*x1 + 1")) == SolveStatus::Optimal);
    CHECK(sos_check(parse_polynomial("x1^4 + x1^2 + 1")) == SolveStatus::Optimal);
    CHECK(sos_check(parse_polynomial("2*x1^2 + 3*x2^2 + 2*x1*x2")) == SolveStatus::Optimal);
    CHECK(sos_check(parse_polynomial("1")) == SolveStatus::Optimal);
    // rejects
    CHECK(sos_check(parse_polynomial("0 - 1")) == SolveStatus::Infeasible);
    CHECK_THROWS_AS(sos_check(parse_polynomial("x1")), EmptyBasis);
    Polynomial motzkin = parse_polynomial("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1");
    CHECK(sos_check(motzkin) == SolveStatus::Infeasible);
}

TEST_CASE("motzkin rejection carries a Farkas certificate") {
    SosProgram prog;
    prog.add_scalar_sos(
        ParamPolynomial(parse_polynomial("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1")), "motzkin");
    Lowered low = lower(prog);
    Solution sol = solve(low.sdp);
    REQUIRE(sol.status == SolveStatus::Infeasible);
    double by = 0.0;
    for (size_t i = 0; i < low.sdp.b.size(); ++i) by += low.sdp.b[i] * sol.y[i];
    CHECK(by == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("perfect square reconstructs its known Gram") {
    SosProgram prog;
    int cid = prog.add_scalar_sos(ParamPolynomial(parse_polynomial("x1^2 + 2*x1 + 1")), "sq");
    Lowered low = lower(prog);
    Solution sol = solve(low.sdp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    LiftResult lr = lift(prog, low, sol);
    REQUIRE(lr.certificates.size() == 1);
    const Certificate& cert = lr.certificates[0];
    CHECK(cert.constraint_id == cid);
    REQUIRE(cert.gram.rows() == 2);
    // (x+1)^2 has the unique Gram [[1,1],[1,1]] over basis [1, x]
    CHECK(cert.gram(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(cert.gram(0, 1) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(cert.gram(1, 1) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(cert.min_eigenvalue >= -1e-9);
    CHECK(cert.max_residual <= 1e-6);
}

TEST_CASE("multiplier forced to one in the S-procedure shape") {
    // l(x) - p1(x) * x with l(x) = x: feasible only with p1 = 1.
    VarId x = var_id("x1");
    SosProgram prog;
    ParamPolynomial p1 = prog.declare_free_poly({Monomial::one()}, "p1");
    prog.add_scalar_sos(p1, "p1 in SOS");
    ParamPolynomial expr = ParamPolynomial(Polynomial::var(x)) - p1 * ParamPolynomial(Polynomial::var(x));
    prog.add_scalar_sos(expr, "L");
    Lowered low = lower(prog);
    Solution sol = solve(low.sdp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    LiftResult lr = lift(prog, low, sol);
    CHECK(lr.values.at(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("matrix SOS hand checks") {
    VarId x = var_id("x1");
    Polynomial px = Polynomial::var(x);

    SUBCASE("Schur-feasible 2x2") {
        SosProgram prog;
        std::vector<ParamPolynomial> Q = {
            ParamPolynomial(1.0), ParamPolynomial(px),
            ParamPolynomial(px), ParamPolynomial(Polynomial::var(x, 2) + 1.0)};
        prog.add_matrix_sos(Q, 2, "schur");
        Lowered low = lower(prog);
        CHECK(solve(low.sdp).status == SolveStatus::Optimal);
    }
    SUBCASE("identity") {
        SosProgram prog;
        std::vector<ParamPolynomial> Q = {ParamPolynomial(1.0), ParamPolynomial(0.0),
                                          ParamPolynomial(0.0), ParamPolynomial(1.0)};
        prog.add_matrix_sos(Q, 2, "identity");
        Lowered low = lower(prog);
        Solution sol = solve(low.sdp);
        REQUIRE(sol.status == SolveStatus::Optimal);
        LiftResult lr = lift(prog, low, sol);
        CHECK(lr.certificates[0].min_eigenvalue >= -1e-9);
    }
    SUBCASE("determinant-infeasible 2x2") {
        SosProgram prog;
        std::vector<ParamPolynomial> Q = {ParamPolynomial(1.0), ParamPolynomial(px),
                                          ParamPolynomial(px), ParamPolynomial(0.0)};
        prog.add_matrix_sos(Q, 2, "degenerate");
        Lowered low = lower(prog);
        CHECK(solve(low.sdp).status == SolveStatus::Infeasible);
    }
    SUBCASE("asymmetric input is rejected") {
        SosProgram prog;
        std::vector<ParamPolynomial> Q = {ParamPolynomial(1.0), ParamPolynomial(px),
                                          ParamPolynomial(0.0), ParamPolynomial(1.0)};
        CHECK_THROWS_AS(prog.add_matrix_sos(Q, 2, "bad"), NotSymmetric);
    }
}

TEST_CASE("matrix SOS round-trip reconstruction") {
    // decision-bearing 2x2 constraint: [[1, pi],[pi, Y]] with unknown pi, Y
    std::vector<VarId> xs = state_vars(2);
    SosProgram prog;
    ParamPolynomial pi = prog.declare_free_poly(monomials_up_to(xs, 1), "pi");
    ParamPolynomial Y = prog.declare_free_poly(monomials_up_to(xs, 2), "Y");
    std::vector<ParamPolynomial> Q = {ParamPolynomial(1.0), pi, pi, Y};
    prog.add_matrix_sos(Q, 2, "pdm");
    // pin pi a bit so the problem is not pure feasibility at zero
    AffineExpr pin = pi.coefficient(Monomial::var(xs[0])) - AffineExpr(0.5);
    prog.add_linear_eq(pin, "pin pi_x1");
    Lowered low = lower(prog);
    Solution sol = solve(low.sdp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    LiftResult lr = lift(prog, low, sol);
    const Certificate& cert = lr.certificates[0];
    auto rec = gram_reconstruct(cert.basis, cert.gram);
    Polynomial pi_val = pi.instantiate(lr.values);
    Polynomial Y_val = Y.instantiate(lr.values);
    CHECK(rec[{0, 0}].almost_equal(Polynomial(1.0), 1e-6));
    CHECK(rec[{0, 1}].almost_equal(pi_val, 1e-6));
    CHECK(rec[{1, 1}].almost_equal(Y_val, 1e-6));
    CHECK(pi_val.coefficient(Monomial::var(xs[0])) == doctest::Approx(0.5));
}

TEST_CASE("soundness sampling of certified polynomials") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<VarId> xs = state_vars(2);
    std::vector<Polynomial> corpus = {
        parse_polynomial("x1^2 + 2*x1 + 1"), parse_polynomial("x1^4 + x1^2 + 1"),
        parse_polynomial("2*x1^2 + 3*x2^2 + 2*x1*x2"),
        parse_polynomial("x1^4 + x2^4 - 2*x1^2*x2^2 + x2^2")};
    for (const auto& p : corpus) {
        SosProgram prog;
        prog.add_scalar_sos(ParamPolynomial(p), "sound");
        Lowered low = lower(prog);
        Solution sol = solve(low.sdp);
        REQUIRE(sol.status == SolveStatus::Optimal);
        lift(prog, low, sol);  // throws if certificates are bad
        for (int k = 0; k < 1000; ++k) {
            std::vector<double> pt = {u(rng), u(rng)};
            CHECK(p.evaluate(pt, xs) >= -1e-6);
        }
    }
}

TEST_CASE("corrupted Gram fails the reconstruction check") {
    SosProgram prog;
    prog.add_scalar_sos(ParamPolynomial(parse_polynomial("x1^2 + 2*x1 + 1")), "sq");
    Lowered low = lower(prog);
    Solution sol = solve(low.sdp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    // corrupt one Gram entry by 1e-3
    int off = low.sdp.cones.n_free + low.sdp.cones.n_nonneg;
    Solution bad = sol;
    bad.x[static_cast<size_t>(off)] += 1e-3;
    CHECK_THROWS_AS(lift(prog, low, bad), CertificateResidual);
}

TEST_CASE("trivial feasibility program lifts to certificate [1]") {
    SosProgram prog;
    prog.add_scalar_sos(ParamPolynomial(1.0), "one");
    Lowered low = lower(prog);
    Solution sol = solve(low.sdp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    LiftResult lr = lift(prog, low, sol);
    REQUIRE(lr.certificates.size() == 1);
    CHECK(lr.certificates[0].gram.rows() == 1);
    CHECK(lr.certificates[0].gram(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(lr.values.empty());
}

TEST_CASE("lowering layout is deterministic and monotone") {
    std::vector<VarId> xs = state_vars(2);
    auto build = [&](bool extra) {
        SosProgram prog;
        ParamPolynomial h = prog.declare_free_poly(monomials_up_to(xs, 2), "h");
        prog.add_scalar_sos(ParamPolynomial(parse_polynomial("x1^2 + 1")) - h, "c1");
        prog.add_scalar_sos(h, "c2");
        if (extra)
            prog.add_scalar_sos(h + ParamPolynomial(parse_polynomial("x2^2")), "c3");
        return lower(prog);
    };
    Lowered a1 = build(false);
    Lowered a2 = build(false);
    CHECK(a1.sdp.layout_signature() == a2.sdp.layout_signature());
    Lowered b = build(true);
    CHECK(b.sdp.rows.size() >= a1.sdp.rows.size());
    CHECK(b.sdp.cones.psd_sizes.size() >= a1.sdp.cones.psd_sizes.size());
}

TEST_CASE("box bounds land in the nonneg block and the objective carries over") {
    SosProgram prog;
    DecId g = prog.new_decision("gamma0", 0.0, 1.0);
    prog.set_objective(AffineExpr::variable(g) * -1.0);  // maximize gamma0
    // keep gamma0 coupled to something: gamma0-scaled constant is SOS
    prog.add_scalar_sos(ParamPolynomial::term(Monomial::one(), AffineExpr::variable(g)), "g>=0");
    Lowered low = lower(prog);
    CHECK(low.sdp.cones.n_nonneg == 2);
    Solution sol = solve(low.sdp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    LiftResult lr = lift(prog, low, sol);
    CHECK(lr.values.at(g) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("SDPA export/import cross-check on the corpus") {
    std::vector<SdpProblem> corpus;
    {
        SosProgram prog;
        prog.add_scalar_sos(ParamPolynomial(parse_polynomial("x1^4 + x1^2 + 1")), "sos");
        corpus.push_back(lower(prog).sdp);
    }
    {
        SosProgram prog;
        DecId g = prog.new_decision("t", 0.0, 2.0);
        prog.set_objective(AffineExpr::variable(g) * -1.0);
        ParamPolynomial expr = ParamPolynomial(parse_polynomial("x1^2 + 1")) -
                               ParamPolynomial::term(Monomial::one(), AffineExpr::variable(g));
        prog.add_scalar_sos(expr, "x^2 + 1 - t in SOS");
        corpus.push_back(lower(prog).sdp);
    }
    for (const auto& prob : corpus) {
        Solution direct = solve(prob);
        REQUIRE(direct.status == SolveStatus::Optimal);
        std::stringstream ss;
        write_sdpa(ss, prob);
        SdpProblem back = read_sdpa(ss);
        Solution via = solve(back);
        REQUIRE(via.status == SolveStatus::Optimal);
        // the exported file encodes the conic dual: values are negatives
        CHECK(std::abs(via.objective + direct.objective) <=
              1e-6 * (1.0 + std::abs(direct.objective)));
    }
}
