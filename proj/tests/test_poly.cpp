#include <random>

#include "doctest.h"
#include "dtcbf/errors.hpp"
#include "dtcbf/poly_text.hpp"
#include "dtcbf/poly_vec.hpp"

using namespace dtcbf;

namespace {

Polynomial random_poly(std::mt19937_64& rng, const std::vector<VarId>& vars, int max_deg,
                       int n_terms = 8) {
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::uniform_int_distribution<int> pick_deg(0, max_deg);
    std::uniform_int_distribution<int> pick_var(0, static_cast<int>(vars.size()) - 1);
    Polynomial p;
    for (int t = 0; t < n_terms; ++t) {
        int deg = pick_deg(rng);
        std::vector<std::pair<VarId, int>> exps;
        for (int d = 0; d < deg; ++d) exps.emplace_back(vars[pick_var(rng)], 1);
        p += Polynomial::monomial(Monomial::from_pairs(std::move(exps)), coeff(rng));
    }
    return p;
}

std::vector<double> random_point(std::mt19937_64& rng, size_t n, double lo = -1.5,
                                 double hi = 1.5) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> pt(n);
    for (auto& x : pt) x = u(rng);
    return pt;
}

}  // namespace

TEST_CASE("difference of squares") {
    VarId x = var_id("x1");
    Polynomial xp1 = Polynomial::var(x) + 1.0;
    Polynomial xm1 = Polynomial::var(x) - 1.0;
    Polynomial expect = Polynomial::var(x, 2) - 1.0;
    CHECK(( xp1 * xm1 ).almost_equal(expect, 0.0));
}

TEST_CASE("bilinearity guard on product of decision-bearing polynomials") {
    VarId x = var_id("x1");
    ParamPolynomial p = ParamPolynomial::term(Monomial::var(x, 2), AffineExpr::variable(0));
    ParamPolynomial q = ParamPolynomial::term(Monomial::var(x), AffineExpr::variable(1));
    CHECK_THROWS_AS(p * q, BilinearProduct);
    // numeric * decision-bearing is fine
    CHECK_NOTHROW(ParamPolynomial(2.0) * p);
}

TEST_CASE("pointwise evaluation oracle for mul") {
    std::mt19937_64 rng(42);
    std::vector<VarId> vars = {var_id("x1"), var_id("x2"), var_id("x3")};
    for (int rep = 0; rep < 50; ++rep) {
        Polynomial p = random_poly(rng, vars, 4);
        Polynomial q = random_poly(rng, vars, 4);
        Polynomial pq = p * q;
        for (int k = 0; k < 20; ++k) {
            auto pt = random_point(rng, vars.size());
            double lhs = pq.evaluate(pt, vars);
            double rhs = p.evaluate(pt, vars) * q.evaluate(pt, vars);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        }
    }
}

TEST_CASE("degree of product is the sum of degrees") {
    std::mt19937_64 rng(7);
    std::vector<VarId> vars = {var_id("x1"), var_id("x2")};
    for (int rep = 0; rep < 20; ++rep) {
        Polynomial p = random_poly(rng, vars, 3) + Polynomial::var(vars[0], 3);
        Polynomial q = random_poly(rng, vars, 2) + Polynomial::var(vars[1], 2);
        CHECK(( p * q ).degree() == p.degree() + q.degree());
    }
}

TEST_CASE("ring axioms at sampled points") {
    std::mt19937_64 rng(99);
    std::vector<VarId> vars = {var_id("x1"), var_id("x2"), var_id("x3")};
    for (int rep = 0; rep < 20; ++rep) {
        Polynomial p = random_poly(rng, vars, 3);
        Polynomial q = random_poly(rng, vars, 3);
        Polynomial r = random_poly(rng, vars, 3);
        Polynomial assoc_l = (p + q) + r, assoc_r = p + (q + r);
        Polynomial dist_l = p * (q + r), dist_r = p * q + p * r;
        for (int k = 0; k < 5; ++k) {
            auto pt = random_point(rng, vars.size());
            double al = assoc_l.evaluate(pt, vars), ar = assoc_r.evaluate(pt, vars);
            CHECK(al == doctest::Approx(ar).epsilon(1e-9));
            double dl = dist_l.evaluate(pt, vars), dr = dist_r.evaluate(pt, vars);
            CHECK(dl == doctest::Approx(dr).epsilon(1e-9));
        }
    }
}

TEST_CASE("compose with identity map is identity") {
    std::mt19937_64 rng(5);
    std::vector<VarId> vars = {var_id("x1"), var_id("x2")};
    Polynomial h = random_poly(rng, vars, 3);
    PolyVec ident = {Polynomial::var(vars[0]), Polynomial::var(vars[1])};
    CHECK(compose(h, vars, ident).almost_equal(h, 0.0));
}

TEST_CASE("compose of parameterized quadratic against hand expansion") {
    // h = t0 + t1 x + t2 x^2 composed with x -> x + k1 + k2 x, numeric k.
    VarId x = var_id("x1");
    const double k1 = 0.7, k2 = -0.3;
    ParamPolynomial h = ParamPolynomial::term(Monomial::one(), AffineExpr::variable(0)) +
                        ParamPolynomial::term(Monomial::var(x), AffineExpr::variable(1)) +
                        ParamPolynomial::term(Monomial::var(x, 2), AffineExpr::variable(2));
    PolyVec subs = {Polynomial::var(x) * (1.0 + k2) + k1};
    ParamPolynomial got = compose(h, {x}, subs);

    ParamPolynomial expect =
        ParamPolynomial::term(Monomial::one(), AffineExpr::variable(0)) +
        ParamPolynomial::term(Monomial::var(x), AffineExpr::variable(1) * (1.0 + k2)) +
        ParamPolynomial::term(Monomial::one(), AffineExpr::variable(1) * k1) +
        ParamPolynomial::term(Monomial::var(x, 2),
                              AffineExpr::variable(2) * (1.0 + 2.0 * k2 + k2 * k2)) +
        ParamPolynomial::term(Monomial::var(x),
                              AffineExpr::variable(2) * (2.0 * k1 + 2.0 * k1 * k2)) +
        ParamPolynomial::term(Monomial::one(), AffineExpr::variable(2) * (k1 * k1));

    std::map<DecId, double> vals = {{0, 0.4}, {1, -1.2}, {2, 2.5}};
    CHECK(got.instantiate(vals).almost_equal(expect.instantiate(vals), 1e-12));
}

TEST_CASE("compose/evaluate commutation oracle") {
    std::mt19937_64 rng(11);
    std::vector<VarId> vars = {var_id("x1"), var_id("x2")};
    for (int rep = 0; rep < 10; ++rep) {
        Polynomial h = random_poly(rng, vars, 3);
        // affine substitutions
        PolyVec subs;
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (size_t i = 0; i < vars.size(); ++i)
            subs.push_back(Polynomial::var(vars[0]) * u(rng) + Polynomial::var(vars[1]) * u(rng) +
                           u(rng));
        Polynomial hs = compose(h, vars, subs);
        for (int k = 0; k < 20; ++k) {
            auto pt = random_point(rng, vars.size());
            std::vector<double> image;
            for (const auto& s : subs) image.push_back(s.evaluate(pt, vars));
            CHECK(hs.evaluate(pt, vars) ==
                  doctest::Approx(h.evaluate(image, vars)).epsilon(1e-9));
        }
    }
}

TEST_CASE("expand_in_policy on scalar integrator") {
    // h = t0 + t1 x + t2 x^2, f(x) = x, g = 1.
    VarId x = var_id("x1");
    ParamPolynomial h = ParamPolynomial::term(Monomial::one(), AffineExpr::variable(0)) +
                        ParamPolynomial::term(Monomial::var(x), AffineExpr::variable(1)) +
                        ParamPolynomial::term(Monomial::var(x, 2), AffineExpr::variable(2));
    PolyVec f = {Polynomial::var(x)};
    PolyMatrix g(1, 1);
    g.at(0, 0) = Polynomial(1.0);

    PolicyExpansion e = expand_in_policy(h, {x}, f, g);
    REQUIRE(e.a.size() == 1);
    PolicyIndex a11 = {2};
    REQUIRE(e.a.count(a11) == 1);

    std::map<DecId, double> vals = {{0, 1.0}, {1, -0.5}, {2, 2.0}};
    // a_{1,1} = t2
    CHECK(e.a.at(a11).instantiate(vals).almost_equal(Polynomial(2.0), 1e-12));
    // b_1 = t1 + 2 t2 x
    Polynomial expect_b = Polynomial(-0.5) + Polynomial::var(x) * 4.0;
    CHECK(e.b[0].instantiate(vals).almost_equal(expect_b, 1e-12));
    // c = h itself
    Polynomial expect_c = Polynomial(1.0) + Polynomial::var(x) * -0.5 + Polynomial::var(x, 2) * 2.0;
    CHECK(e.c.instantiate(vals).almost_equal(expect_c, 1e-12));
}

TEST_CASE("expand_in_policy of a constant") {
    VarId x = var_id("x1");
    ParamPolynomial h(3.5);
    PolyVec f = {Polynomial::var(x) * 0.5};
    PolyMatrix g(1, 1);
    g.at(0, 0) = Polynomial(1.0);
    PolicyExpansion e = expand_in_policy(h, {x}, f, g);
    CHECK(e.a.empty());
    CHECK(e.b[0].is_zero());
    CHECK(e.c.to_polynomial().almost_equal(Polynomial(3.5), 0.0));
}

TEST_CASE("recombination oracle on the cart-pole plant") {
    // Linearized cart-pole update with one input; quartic barrier.
    std::vector<VarId> xs = state_vars(4);
    PolyVec f = {Polynomial::var(xs[1]), Polynomial::var(xs[2]) * -0.98, Polynomial::var(xs[3]),
                 Polynomial::var(xs[2]) * 10.78};
    PolyMatrix g(4, 1);
    g.at(0, 0) = Polynomial(0.0);
    g.at(1, 0) = Polynomial(1.0);
    g.at(2, 0) = Polynomial(0.0);
    g.at(3, 0) = Polynomial(-1.0);

    std::mt19937_64 rng(2024);
    Polynomial h_num = random_poly(rng, xs, 4, 12);
    ParamPolynomial h(h_num);
    PolicyExpansion e = expand_in_policy(h, xs, f, g);
    CHECK(e.max_order() <= 4);

    for (int rep = 0; rep < 10; ++rep) {
        PolyVec pi = {random_poly(rng, xs, 3, 5)};
        Polynomial direct = compose(h_num, xs, {f[0] + g.at(0, 0) * pi[0], f[1] + g.at(1, 0) * pi[0],
                                                f[2] + g.at(2, 0) * pi[0], f[3] + g.at(3, 0) * pi[0]});
        Polynomial recombined = recombine(e, pi).to_polynomial();
        for (int k = 0; k < 50; ++k) {
            auto pt = random_point(rng, 4, -1.0, 1.0);
            double d = direct.evaluate(pt, xs) - recombined.evaluate(pt, xs);
            CHECK(std::abs(d) <= 1e-10);
        }
    }
}

TEST_CASE("recombination holds under random decision instantiations") {
    std::vector<VarId> xs = state_vars(2);
    PolyVec f = {Polynomial::var(xs[0]) * 0.5 + Polynomial::var(xs[1]),
                 Polynomial::var(xs[1]) * 0.8};
    PolyMatrix g(2, 2);
    g.at(0, 0) = Polynomial(1.0);
    g.at(0, 1) = Polynomial::var(xs[0]);
    g.at(1, 0) = Polynomial(0.0);
    g.at(1, 1) = Polynomial(1.0);

    // unknown quadratic h over 6 decision variables
    ParamPolynomial h;
    std::vector<Monomial> basis = {Monomial::one(), Monomial::var(xs[0]), Monomial::var(xs[1]),
                                   Monomial::var(xs[0]) * Monomial::var(xs[1]),
                                   Monomial::var(xs[0], 2), Monomial::var(xs[1], 2)};
    for (size_t i = 0; i < basis.size(); ++i)
        h += ParamPolynomial::term(basis[i], AffineExpr::variable(static_cast<DecId>(i)));

    PolicyExpansion e = expand_in_policy(h, xs, f, g);
    std::mt19937_64 rng(314);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int inst = 0; inst < 20; ++inst) {
        std::map<DecId, double> vals;
        for (size_t i = 0; i < basis.size(); ++i) vals[static_cast<DecId>(i)] = u(rng);
        PolyVec pi = {random_poly(rng, xs, 2, 4), random_poly(rng, xs, 2, 4)};
        Polynomial h_num = h.instantiate(vals);
        PolyVec update = {f[0] + g.at(0, 0) * pi[0] + g.at(0, 1) * pi[1],
                          f[1] + g.at(1, 0) * pi[0] + g.at(1, 1) * pi[1]};
        Polynomial direct = compose(h_num, xs, update);
        Polynomial recombined = recombine(e, pi).instantiate(vals);
        for (int k = 0; k < 50; ++k) {
            auto pt = random_point(rng, 2);
            CHECK(std::abs(direct.evaluate(pt, xs) - recombined.evaluate(pt, xs)) <= 1e-10);
        }
    }
}

TEST_CASE("bilinearity guard is complete over random expression trees") {
    std::mt19937_64 rng(555);
    std::vector<VarId> vars = {var_id("x1"), var_id("x2")};
    std::uniform_int_distribution<int> op(0, 2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    for (int rep = 0; rep < 200; ++rep) {
        // Build two random expressions, each tracking whether it carries
        // decision variables; any guarded product must throw exactly when
        // both sides do.
        auto make = [&](DecId id) -> std::pair<ParamPolynomial, bool> {
            ParamPolynomial p(u(rng));
            bool carries = false;
            for (int step = 0; step < 4; ++step) {
                switch (op(rng)) {
                    case 0:
                        p += ParamPolynomial::term(Monomial::var(vars[0]), AffineExpr(u(rng)));
                        break;
                    case 1:
                        p += ParamPolynomial::term(Monomial::var(vars[1], 2),
                                                   AffineExpr::variable(id));
                        carries = true;
                        break;
                    case 2:
                        p = p * u(rng);
                        break;
                }
            }
            return {p, carries};
        };
        auto [p, pc] = make(0);
        auto [q, qc] = make(1);
        if (pc && qc) {
            CHECK_THROWS_AS(p * q, BilinearProduct);
        } else {
            CHECK_NOTHROW(p * q);
        }
    }
}

TEST_CASE("evaluate examples") {
    std::vector<VarId> xs = state_vars(2);
    Polynomial s = Polynomial::var(xs[0], 2) + Polynomial::var(xs[1], 2) - 3.0;
    CHECK(s.evaluate({1.0, 1.0}, xs) == doctest::Approx(-1.0));
    Polynomial zero;
    CHECK(zero.evaluate({0.3, -0.7}, xs) == 0.0);
    CHECK_THROWS_AS(s.evaluate({1.0}, xs), DimensionMismatch);
}

TEST_CASE("coefficient_of returns zero for absent monomials") {
    VarId x = var_id("x1");
    ParamPolynomial p = ParamPolynomial::term(Monomial::var(x, 2), AffineExpr::variable(3));
    CHECK(p.coefficient(Monomial::var(x, 5)).is_zero());
    CHECK(p.coefficient(Monomial::var(x, 2)).has_decisions());
}

TEST_CASE("polynomial text grammar") {
    std::vector<VarId> xs = state_vars(2);
    Polynomial p = parse_polynomial("3 - x1^2 - x2^2");
    CHECK(p.evaluate({1.0, 1.0}, xs) == doctest::Approx(1.0));
    Polynomial q = parse_polynomial("-0.5*x1^2*x2 + 2*x2 - 1");
    CHECK(q.coefficient(Monomial::var(xs[0], 2) * Monomial::var(xs[1])) == doctest::Approx(-0.5));
    CHECK(q.coefficient(Monomial::one()) == doctest::Approx(-1.0));

    // whitespace-insensitive
    Polynomial r1 = parse_polynomial("  - 0.5 * x1 ^ 2 * x2+2*x2-1 ");
    CHECK(r1.almost_equal(q, 0.0));

    // round-trip
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        Polynomial rp = random_poly(rng, xs, 4);
        Polynomial back = parse_polynomial(print_polynomial(rp));
        CHECK(back.almost_equal(rp, 0.0));
    }

    CHECK_THROWS_AS(parse_polynomial("x1 +"), ParseError);
    CHECK_THROWS_AS(parse_polynomial("y1"), ParseError);
    CHECK_THROWS_AS(parse_polynomial(""), ParseError);
    CHECK_THROWS_AS(parse_polynomial("x1^-2"), ParseError);
}

TEST_CASE("monomial ordering is graded lexicographic and deterministic") {
    std::vector<VarId> xs = state_vars(2);
    Monomial one = Monomial::one();
    Monomial x1 = Monomial::var(xs[0]);
    Monomial x2 = Monomial::var(xs[1]);
    Monomial x1x2 = x1 * x2;
    Monomial x1sq = Monomial::var(xs[0], 2);
    CHECK(one < x1);
    CHECK(x2 < x1sq);       // degree dominates
    CHECK(x1x2 < x1sq);     // same degree: higher power on earlier var is larger
    CHECK(!(x1sq < x1x2));
}
