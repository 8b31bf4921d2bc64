#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "dtcbf/errors.hpp"
#include "dtcbf/sdp_solver.hpp"

using namespace dtcbf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Random instance with a known optimal value, built from a strictly
// complementary primal/dual pair: pick x* and s* complementary in the cone,
// y* free, then b := A x*, c := A'y* + s*. Optimum is c'x*.
struct KnownInstance {
    SdpProblem prob;
    double opt = 0.0;
};

KnownInstance make_known(std::mt19937_64& rng, int nf, int nl, int sblk, int p) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> pos(0.5, 2.0);
    KnownInstance ki;
    auto& prob = ki.prob;
    prob.cones.n_free = nf;
    prob.cones.n_nonneg = nl;
    prob.cones.psd_sizes = {sblk};
    const int N = prob.cones.total();

    // complementary pair
    VectorXd xs = VectorXd::Zero(N), ss = VectorXd::Zero(N);
    for (int i = 0; i < nf; ++i) xs(i) = g(rng);
    for (int i = 0; i < nl; ++i) {
        if (i % 2 == 0)
            xs(nf + i) = pos(rng);
        else
            ss(nf + i) = pos(rng);
    }
    MatrixXd Q = MatrixXd::Random(sblk, sblk);
    Eigen::HouseholderQR<MatrixXd> qr(Q);
    MatrixXd U = qr.householderQ();
    VectorXd dx = VectorXd::Zero(sblk), ds = VectorXd::Zero(sblk);
    for (int i = 0; i < sblk; ++i) {
        if (i % 2 == 0)
            dx(i) = pos(rng);
        else
            ds(i) = pos(rng);
    }
    MatrixXd X = U * dx.asDiagonal() * U.transpose();
    MatrixXd S = U * ds.asDiagonal() * U.transpose();
    int off = prob.cones.psd_offset(0);
    for (int j = 0; j < sblk; ++j)
        for (int i = 0; i <= j; ++i) {
            int idx = off + ConeLayout::svec_index(i, j);
            xs(idx) = (i == j) ? X(i, j) : kSqrt2 * X(i, j);
            ss(idx) = (i == j) ? S(i, j) : kSqrt2 * S(i, j);
        }

    MatrixXd A(p, N);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < N; ++j) A(i, j) = g(rng);
    VectorXd ystar(p);
    for (int i = 0; i < p; ++i) ystar(i) = g(rng);

    VectorXd b = A * xs;
    VectorXd c = A.transpose() * ystar + ss;

    prob.rows.resize(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < N; ++j) prob.rows[static_cast<size_t>(i)].add(j, A(i, j));
    prob.b.assign(b.data(), b.data() + p);
    prob.c.assign(c.data(), c.data() + N);
    ki.opt = c.dot(xs);
    return ki;
}

}  // namespace

TEST_CASE("one-variable PSD equality") {
    SdpProblem prob;
    prob.cones.psd_sizes = {1};
    prob.rows.resize(1);
    prob.rows[0].add(0, 1.0);
    prob.b = {2.0};
    prob.c = {0.0};
    Solution sol = solve(prob);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("random known-optimum suite") {
    std::mt19937_64 rng(20240601);
    struct Shape {
        int nf, nl, sblk, p;
    };
    std::vector<Shape> shapes = {
        {2, 3, 3, 4}, {0, 4, 2, 3}, {3, 0, 4, 5}, {1, 5, 3, 6}, {4, 2, 5, 7}};
    for (const auto& sh : shapes) {
        KnownInstance ki = make_known(rng, sh.nf, sh.nl, sh.sblk, sh.p);
        Solution sol = solve(ki.prob);
        REQUIRE(sol.status == SolveStatus::Optimal);
        CHECK(std::abs(sol.objective - ki.opt) <= 1e-6 * (1.0 + std::abs(ki.opt)));
        // self-validation invariant
        CHECK(sol.residuals.eq_inf <= 1e-6);
        CHECK(sol.residuals.min_psd_eig >= -1e-7);
    }
}

TEST_CASE("determinism across runs") {
    std::mt19937_64 rng(7);
    KnownInstance ki = make_known(rng, 2, 2, 3, 4);
    Solution a = solve(ki.prob);
    Solution b = solve(ki.prob);
    CHECK(a.status == b.status);
    CHECK(std::abs(a.objective - b.objective) <= 1e-10);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("row scaling does not change status") {
    std::mt19937_64 rng(13);
    KnownInstance ki = make_known(rng, 1, 3, 3, 4);
    Solution base = solve(ki.prob);
    SdpProblem scaled = ki.prob;
    for (size_t i = 0; i < scaled.rows.size(); ++i) {
        for (auto& [col, v] : scaled.rows[i].entries) v *= 1e3;
        scaled.b[i] *= 1e3;
    }
    Solution s2 = solve(scaled);
    CHECK(base.status == SolveStatus::Optimal);
    CHECK(s2.status == SolveStatus::Optimal);
    CHECK(std::abs(s2.objective - ki.opt) <= 1e-5 * (1.0 + std::abs(ki.opt)));
}

TEST_CASE("infeasible instance returns a Farkas certificate") {
    // x >= 0 with x = -1
    SdpProblem prob;
    prob.cones.n_nonneg = 1;
    prob.rows.resize(1);
    prob.rows[0].add(0, 1.0);
    prob.b = {-1.0};
    prob.c = {0.0};
    Solution sol = solve(prob);
    REQUIRE(sol.status == SolveStatus::Infeasible);
    // certificate: b'y = 1, A'y + s = 0, s >= 0
    double by = prob.b[0] * sol.y[0];
    CHECK(by == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.s[0] >= -1e-9);
    CHECK(std::abs(sol.y[0] + sol.s[0]) <= 1e-6);
}

TEST_CASE("infeasible PSD instance") {
    // 2x2 PSD with X11 = 0 and X12 = 1 cannot happen.
    SdpProblem prob;
    prob.cones.psd_sizes = {2};
    prob.rows.resize(2);
    prob.rows[0].add(ConeLayout::svec_index(0, 0), 1.0);
    prob.rows[1].add(ConeLayout::svec_index(0, 1), kSqrt2);  // = 2 X12
    prob.b = {0.0, 2.0};
    prob.c = {0.0, 0.0, 0.0};
    Solution sol = solve(prob);
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded objective is certified") {
    // min -x1 with x2 = 1, both nonneg: objective ray along x1.
    SdpProblem prob;
    prob.cones.n_nonneg = 2;
    prob.rows.resize(1);
    prob.rows[0].add(1, 1.0);
    prob.b = {1.0};
    prob.c = {-1.0, 0.0};
    Solution sol = solve(prob);
    REQUIRE(sol.status == SolveStatus::Unbounded);
    // ray: c'x = -1, A x ~ 0, x in cone
    CHECK(sol.x[0] >= 0.0);
    CHECK(std::abs(prob.c[0] * sol.x[0] + prob.c[1] * sol.x[1] + 1.0) <= 1e-6);
    CHECK(std::abs(sol.x[1]) <= 1e-6);
}

TEST_CASE("trivially contradictory row is reported infeasible") {
    SdpProblem prob;
    prob.cones.n_nonneg = 1;
    prob.rows.resize(2);
    prob.rows[0].add(0, 1.0);
    // second row left empty on purpose
    prob.b = {1.0, 5.0};
    prob.c = {0.0};
    Solution sol = solve(prob);
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("backend interface") {
    auto builtin = make_backend("builtin");
    CHECK(builtin->name() == "builtin");
    std::mt19937_64 rng(3);
    KnownInstance ki = make_known(rng, 1, 2, 2, 3);
    Solution via_backend = builtin->submit(ki.prob, SolverSettings{});
    CHECK(via_backend.status == SolveStatus::Optimal);
    CHECK(std::abs(via_backend.objective - ki.opt) <= 1e-6 * (1 + std::abs(ki.opt)));

    CHECK_THROWS_AS(make_backend("mosek"), BackendUnavailable);

    // canned test double
    class EchoBackend final : public SdpBackend {
      public:
        std::string name() const override { return "echo"; }
        Solution submit(const SdpProblem&, const SolverSettings&) override {
            Solution s;
            s.status = SolveStatus::Optimal;
            s.objective = 42.0;
            return s;
        }
    };
    EchoBackend echo;
    Solution canned = echo.submit(ki.prob, SolverSettings{});
    CHECK(canned.objective == 42.0);
}
