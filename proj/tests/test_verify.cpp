#include <cmath>

#include "doctest.h"
#include "dtcbf/errors.hpp"
#include "dtcbf/gram_basis.hpp"
#include "dtcbf/poly_text.hpp"
#include "dtcbf/synthesis.hpp"
#include "dtcbf/verify.hpp"

using namespace dtcbf;

namespace {

PlantModel toy_plant() {
    PlantModel p;
    p.n = 1;
    p.m = 1;
    p.state = state_vars(1);
    p.f = {Polynomial::var(p.state[0]) * 0.5};
    p.g = PolyMatrix(1, 1);
    p.g.at(0, 0) = Polynomial(1.0);
    return p;
}

InputPolytope box1d(double lo, double hi) {
    InputPolytope u;
    u.M = {{1.0}, {-1.0}};
    u.d = {-lo, hi};
    return u;
}

SynthesisResult toy_synthesis() {
    SynthesisConfig cfg;
    std::vector<VarId> xs = state_vars(1);
    cfg.h_basis = monomials_up_to(xs, 2);
    cfg.pi_bases = {monomials_up_to(xs, 1)};
    cfg.h0 = parse_polynomial("1 - x1^2");
    cfg.max_iters = 6;
    return run(toy_plant(), box1d(-1.0, 1.0), SafeSet{parse_polynomial("4 - x1^2")}, cfg);
}

}  // namespace

TEST_CASE("empty superlevel set passes vacuously with a warning") {
    DtcbfTriple triple;
    triple.h = Polynomial(-1.0);
    triple.gamma0 = 0.5;
    triple.pi = {Polynomial()};
    SamplingSpec spec;
    spec.samples = 2000;
    spec.trajectories = 0;
    VerificationReport rep =
        check_triple(triple, toy_plant(), box1d(-1.0, 1.0), SafeSet{parse_polynomial("4 - x1^2")},
                     spec);
    CHECK(rep.empty_superlevel_warning);
    CHECK(rep.samples_in_set == 0);
    CHECK(rep.decrease_violation == 0.0);
    CHECK(rep.admissibility_violation == 0.0);
}

TEST_CASE("synthesized toy triple verifies to tolerance") {
    SynthesisResult res = toy_synthesis();
    PlantModel plant = toy_plant();
    SafeSet safe{parse_polynomial("4 - x1^2")};
    SamplingSpec spec;
    spec.samples = 100000;
    spec.trajectories = 200;
    VerificationReport rep = check_triple(res.triple, plant, box1d(-1.0, 1.0), safe, spec);
    CHECK(rep.max_violation() <= 1e-6);
    CHECK(rep.gamma_in_range);
    CHECK(rep.trajectory_violations == 0);
    CHECK(rep.certificates_checked > 0);
    CHECK(rep.certificate_min_eig >= -1e-7);
    CHECK(rep.certificate_max_residual <= 1e-6);

    SUBCASE("reports are reproducible for a fixed seed") {
        VerificationReport rep2 = check_triple(res.triple, plant, box1d(-1.0, 1.0), safe, spec);
        CHECK(rep.decrease_violation == rep2.decrease_violation);
        CHECK(rep.admissibility_violation == rep2.admissibility_violation);
        CHECK(rep.containment_violation == rep2.containment_violation);
        CHECK(rep.samples_in_set == rep2.samples_in_set);
    }
    SUBCASE("monotone refinement: more samples never shrink the violation") {
        SamplingSpec small = spec;
        small.samples = 10000;
        small.trajectories = 0;
        VerificationReport rsmall =
            check_triple(res.triple, plant, box1d(-1.0, 1.0), safe, small);
        SamplingSpec big = spec;
        big.samples = 20000;
        big.trajectories = 0;
        VerificationReport rbig = check_triple(res.triple, plant, box1d(-1.0, 1.0), safe, big);
        CHECK(rbig.max_violation() >= rsmall.max_violation() - 1e-12);
    }
}

TEST_CASE("perturbed policy is caught and localized") {
    SynthesisResult res = toy_synthesis();
    DtcbfTriple bad = res.triple;
    bad.pi[0] += Polynomial(10.0);  // pushes the policy far outside [-1, 1]
    SamplingSpec spec;
    spec.samples = 20000;
    spec.trajectories = 0;
    VerificationReport rep =
        check_triple(bad, toy_plant(), box1d(-1.0, 1.0), SafeSet{parse_polynomial("4 - x1^2")},
                     spec);
    CHECK(rep.admissibility_violation > 1.0);
    REQUIRE(!rep.worst_admissibility_point.empty());
    // the witness point reproduces the violation
    double u = bad.pi[0].evaluate(rep.worst_admissibility_point, state_vars(1));
    CHECK(std::min(u + 1.0, 1.0 - u) <= -rep.admissibility_violation + 1e-9);
}

TEST_CASE("simulation of the contracting toy") {
    DtcbfTriple triple;
    triple.h = parse_polynomial("1 - x1^2");
    triple.gamma0 = 0.75;
    triple.pi = {Polynomial()};
    PlantModel plant = toy_plant();

    SUBCASE("interior states contract without violations") {
        auto x0 = sample_superlevel_set(triple.h, plant.state, {-1.0}, {1.0}, 100, 7);
        SimulationResult sim = simulate(triple, plant, x0, 50);
        CHECK(sim.violations == 0);
        CHECK(sim.min_h >= -1e-9);
        // trajectories shrink geometrically
        for (const auto& path : sim.paths)
            CHECK(std::abs(path.back()[0]) <= std::abs(path.front()[0]) + 1e-12);
    }
    SUBCASE("boundary start stays inside") {
        SimulationResult sim = simulate(triple, plant, {{1.0}, {-1.0}}, 50);
        CHECK(sim.violations == 0);
        CHECK(sim.min_h >= -1e-12);
    }
    SUBCASE("zero steps is trivially clean") {
        SimulationResult sim = simulate(triple, plant, {{0.5}}, 0);
        CHECK(sim.violations == 0);
        CHECK(sim.steps == 0);
    }
}

TEST_CASE("certificate re-validation") {
    SynthesisResult res = toy_synthesis();
    REQUIRE(!res.triple.certificates.empty());

    SUBCASE("fresh output passes") {
        CertificateReport rep = check_certificates(res.triple);
        CHECK(rep.failures.empty());
        CHECK(rep.ok(1e-7, 1e-6));
    }
    SUBCASE("zeroed Gram fails reconstruction") {
        DtcbfTriple bad = res.triple;
        bad.certificates[0].gram.setZero();
        // pick a certificate whose target is non-trivial
        for (auto& cert : bad.certificates) {
            bool nontrivial = false;
            for (auto& [kl, p] : cert.target) nontrivial = nontrivial || !p.is_zero();
            if (nontrivial) {
                cert.gram.setZero();
                break;
            }
        }
        CertificateReport rep = check_certificates(bad);
        CHECK(!rep.failures.empty());
        CHECK(rep.max_residual > 1e-6);
    }
    SUBCASE("eigenvalue tolerance semantics") {
        DtcbfTriple bad = res.triple;
        // inject a -1e-5 eigenvalue via a diagonal shift on one certificate
        auto& gram = bad.certificates[0].gram;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        double shift = es.eigenvalues().minCoeff() + 1e-5;
        gram.diagonal().array() -= shift;
        CertificateReport rep = check_certificates(bad, 1e-7, 1e6);
        CHECK(rep.min_eigenvalue < -1e-7);
        CHECK(!rep.failures.empty());
        CertificateReport relaxed = check_certificates(bad, 1e-4, 1e6);
        CHECK(relaxed.failures.empty());
    }
}

TEST_CASE("level-set sampling") {
    std::vector<VarId> xs = state_vars(2);
    SUBCASE("initial disk boundary sits at the expected radius") {
        Polynomial h = parse_polynomial("0.1 - x1^2 - x2^2");
        LevelsetGrid grid = levelset_sample(h, xs, {0, 1}, {0.0, 0.0}, {-0.5, -0.5}, {0.5, 0.5},
                                            201, 5e-3);
        REQUIRE(!grid.boundary.empty());
        double r = std::sqrt(0.1);
        for (const auto& [xa, xb] : grid.boundary) {
            double rr = std::hypot(xa, xb);
            CHECK(rr == doctest::Approx(r).epsilon(0.05));
        }
        CHECK(grid.rows.size() == 201u * 201u);
    }
    SUBCASE("constant barrier has no boundary band") {
        Polynomial h(1.0);
        LevelsetGrid grid =
            levelset_sample(h, xs, {0, 1}, {0.0, 0.0}, {-1.0, -1.0}, {1.0, 1.0}, 31, 1e-2);
        CHECK(grid.boundary.empty());
        for (const auto& row : grid.rows) CHECK(row[2] == 1.0);
    }
    SUBCASE("degenerate bounds are rejected") {
        Polynomial h(1.0);
        CHECK_THROWS_AS(
            levelset_sample(h, xs, {0, 1}, {0.0, 0.0}, {1.0, -1.0}, {-1.0, 1.0}, 31, 1e-2),
            DegenerateBounds);
        CHECK_THROWS_AS(
            levelset_sample(h, xs, {0, 1}, {0.0, 0.0}, {-1.0, -1.0}, {1.0, 1.0}, 1, 1e-2),
            DegenerateBounds);
    }
}

TEST_CASE("simulation agrees with the pointwise conditions") {
    SynthesisResult res = toy_synthesis();
    PlantModel plant = toy_plant();
    SafeSet safe{parse_polynomial("4 - x1^2")};
    SamplingSpec spec;
    spec.samples = 20000;
    spec.trajectories = 500;
    spec.steps = 50;
    VerificationReport rep = check_triple(res.triple, plant, box1d(-1.0, 1.0), safe, spec);
    if (rep.max_violation() <= spec.tol) CHECK(rep.trajectory_violations == 0);
}
