#include "dtcbf/verify.hpp"

#include <Eigen/Dense>
#include <random>

#include "dtcbf/errors.hpp"
#include "dtcbf/synthesis.hpp"

namespace dtcbf {

namespace {

std::vector<double> draw(std::mt19937_64& rng, const std::vector<double>& lo,
                         const std::vector<double>& hi) {
    std::vector<double> pt(lo.size());
    for (size_t i = 0; i < lo.size(); ++i) {
        std::uniform_real_distribution<double> u(lo[i], hi[i]);
        pt[i] = u(rng);
    }
    return pt;
}

}  // namespace

VerificationReport check_triple(const DtcbfTriple& triple, const PlantModel& plant,
                                const InputPolytope& input, const SafeSet& safe,
                                const SamplingSpec& spec) {
    VerificationReport rep;
    const std::vector<VarId>& xs = plant.state;
    std::vector<double> lo = spec.lo, hi = spec.hi;
    if (lo.empty() || hi.empty()) std::tie(lo, hi) = safe_set_box(safe, xs);

    rep.gamma_in_range = triple.gamma0 > 0.0 && triple.gamma0 <= 1.0 + 1e-12;

    // next-state and policy maps evaluated pointwise
    PolyVec closed = plant.closed_loop(triple.pi);
    std::mt19937_64 rng(spec.seed);

    int accepted = 0, outside = 0;
    const long budget = static_cast<long>(spec.samples) * 50;
    for (long attempt = 0;
         attempt < budget && (accepted < spec.samples || outside < spec.samples); ++attempt) {
        std::vector<double> pt = draw(rng, lo, hi);
        ++rep.samples_total;
        double hv = triple.h.evaluate(pt, xs);
        double sv = safe.s.evaluate(pt, xs);
        if (hv >= 0.0 && accepted < spec.samples) {
            ++accepted;
            // admissibility: M pi(x) + d >= 0
            double worst_row = 0.0;
            std::vector<double> u(static_cast<size_t>(plant.m));
            for (int j = 0; j < plant.m; ++j)
                u[static_cast<size_t>(j)] = triple.pi[static_cast<size_t>(j)].evaluate(pt, xs);
            for (int r = 0; r < input.rows(); ++r) {
                double row = input.d[static_cast<size_t>(r)];
                for (int j = 0; j < plant.m; ++j)
                    row += input.M[static_cast<size_t>(r)][static_cast<size_t>(j)] *
                           u[static_cast<size_t>(j)];
                worst_row = std::min(worst_row, row);
            }
            if (-worst_row > rep.admissibility_violation) {
                rep.admissibility_violation = -worst_row;
                rep.worst_admissibility_point = pt;
            }
            // decrease: h(x+) - h(x) + gamma0 h(x) >= 0
            std::vector<double> next(static_cast<size_t>(plant.n));
            for (int i = 0; i < plant.n; ++i)
                next[static_cast<size_t>(i)] = closed[static_cast<size_t>(i)].evaluate(pt, xs);
            double dec = triple.h.evaluate(next, xs) - hv + triple.gamma0 * hv;
            if (-dec > rep.decrease_violation) {
                rep.decrease_violation = -dec;
                rep.worst_decrease_point = pt;
            }
            // direct containment reading: the superlevel set stays safe
            if (-sv > rep.containment_violation) {
                rep.containment_violation = -sv;
                rep.worst_containment_point = pt;
            }
        }
        if (sv < 0.0 && outside < spec.samples) {
            ++outside;
            // contrapositive: outside the safe set the barrier is negative
            if (hv > rep.containment_violation) {
                rep.containment_violation = hv;
                rep.worst_containment_point = pt;
            }
        }
    }
    rep.samples_in_set = accepted;
    rep.samples_outside_safe = outside;
    rep.empty_superlevel_warning = (accepted == 0);

    // simulation from superlevel-set states
    if (spec.trajectories > 0 && accepted > 0) {
        auto x0 = sample_superlevel_set(triple.h, xs, lo, hi, spec.trajectories, spec.seed + 1);
        SimulationResult sim = simulate(triple, plant, x0, spec.steps, spec.tol, &safe);
        rep.trajectories_run = sim.trajectories;
        rep.trajectory_steps = sim.steps;
        rep.trajectory_violations = sim.violations;
        rep.trajectory_min_h = sim.min_h;
        rep.trajectory_min_s = sim.min_s;
    }

    CertificateReport certs = check_certificates(triple);
    rep.certificates_checked = certs.checked;
    rep.certificate_min_eig = certs.min_eigenvalue;
    rep.certificate_max_residual = certs.max_residual;
    return rep;
}

std::vector<std::vector<double>> sample_superlevel_set(const Polynomial& h,
                                                       const std::vector<VarId>& vars,
                                                       const std::vector<double>& lo,
                                                       const std::vector<double>& hi, int count,
                                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> out;
    const long budget = static_cast<long>(count) * 200;
    for (long attempt = 0; attempt < budget && static_cast<int>(out.size()) < count; ++attempt) {
        std::vector<double> pt = draw(rng, lo, hi);
        if (h.evaluate(pt, vars) >= 0.0) out.push_back(std::move(pt));
    }
    return out;
}

SimulationResult simulate(const DtcbfTriple& triple, const PlantModel& plant,
                          const std::vector<std::vector<double>>& x0, int steps, double tol,
                          const SafeSet* safe) {
    SimulationResult res;
    res.trajectories = static_cast<int>(x0.size());
    res.steps = steps;
    res.min_h = std::numeric_limits<double>::infinity();
    res.min_s = std::numeric_limits<double>::infinity();
    const std::vector<VarId>& xs = plant.state;
    PolyVec closed = plant.closed_loop(triple.pi);

    for (const auto& start : x0) {
        std::vector<double> x = start;
        std::vector<std::vector<double>> path = {x};
        bool violated = false;
        for (int k = 0; k < steps; ++k) {
            std::vector<double> next(x.size());
            for (size_t i = 0; i < x.size(); ++i) next[i] = closed[i].evaluate(x, xs);
            x = std::move(next);
            path.push_back(x);
            double hv = triple.h.evaluate(x, xs);
            res.min_h = std::min(res.min_h, hv);
            if (hv < -tol) violated = true;
            if (safe) {
                double sv = safe->s.evaluate(x, xs);
                res.min_s = std::min(res.min_s, sv);
                if (sv < -tol) violated = true;
            }
        }
        if (violated) ++res.violations;
        res.paths.push_back(std::move(path));
    }
    if (res.trajectories == 0) {
        res.min_h = 0.0;
        res.min_s = 0.0;
    }
    if (!safe) res.min_s = 0.0;
    return res;
}

CertificateReport check_certificates(const DtcbfTriple& triple, double eig_tol,
                                     double coeff_tol) {
    CertificateReport rep;
    rep.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& cert : triple.certificates) {
        ++rep.checked;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cert.gram, Eigen::EigenvaluesOnly);
        double mineig = es.eigenvalues().minCoeff();
        rep.min_eigenvalue = std::min(rep.min_eigenvalue, mineig);
        auto rec = gram_reconstruct(cert.basis, cert.gram);
        double res = 0.0;
        for (const auto& [kl, target] : cert.target) {
            Polynomial recon = rec.count(kl) ? rec.at(kl) : Polynomial();
            Polynomial diff = recon - target;
            for (const auto& [m, c] : diff.terms()) res = std::max(res, std::abs(c));
        }
        // stray reconstruction mass on entries without a target counts too
        for (const auto& [kl, recon] : rec)
            if (!cert.target.count(kl))
                for (const auto& [m, c] : recon.terms()) res = std::max(res, std::abs(c));
        rep.max_residual = std::max(rep.max_residual, res);
        if (mineig < -eig_tol || res > coeff_tol) rep.failures.push_back(cert.label);
    }
    if (rep.checked == 0) rep.min_eigenvalue = 0.0;
    return rep;
}

LevelsetGrid levelset_sample(const Polynomial& h, const std::vector<VarId>& vars,
                             const std::array<int, 2>& plane_axes,
                             const std::vector<double>& fixed_point,
                             const std::vector<double>& lo, const std::vector<double>& hi,
                             int resolution, double band) {
    if (resolution < 2) throw DegenerateBounds("levelset resolution must be at least 2");
    if (lo.size() != 2 || hi.size() != 2 || lo[0] >= hi[0] || lo[1] >= hi[1])
        throw DegenerateBounds("levelset bounds must satisfy lo < hi on both axes");
    if (fixed_point.size() != vars.size())
        throw DimensionMismatch("levelset fixed point must cover every variable");

    LevelsetGrid grid;
    grid.plane_axes = plane_axes;
    grid.fixed_point = fixed_point;
    grid.lo = lo;
    grid.hi = hi;
    grid.resolution = resolution;
    std::vector<double> pt = fixed_point;
    for (int i = 0; i < resolution; ++i) {
        double xa = lo[0] + (hi[0] - lo[0]) * i / (resolution - 1);
        for (int j = 0; j < resolution; ++j) {
            double xb = lo[1] + (hi[1] - lo[1]) * j / (resolution - 1);
            pt[static_cast<size_t>(plane_axes[0])] = xa;
            pt[static_cast<size_t>(plane_axes[1])] = xb;
            double hv = h.evaluate(pt, vars);
            grid.rows.push_back({xa, xb, hv});
            if (std::abs(hv) <= band) grid.boundary.push_back({xa, xb});
        }
    }
    return grid;
}

}  // namespace dtcbf
