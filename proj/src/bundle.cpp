#include "dtcbf/bundle.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "dtcbf/errors.hpp"
#include "dtcbf/poly_text.hpp"

namespace dtcbf {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json poly_json(const Polynomial& p) { return print_polynomial(p); }

Polynomial poly_from(const json& j) { return parse_polynomial(j.get<std::string>()); }

json certificate_json(const Certificate& cert) {
    json jc;
    jc["constraint_id"] = cert.constraint_id;
    jc["label"] = cert.label;
    json basis = json::array();
    for (const auto& m : cert.basis.monomials) basis.push_back(m.str());
    jc["basis"] = basis;
    jc["row_of"] = cert.basis.row_of;
    json gram = json::array();
    for (Eigen::Index i = 0; i < cert.gram.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < cert.gram.cols(); ++j) row.push_back(cert.gram(i, j));
        gram.push_back(row);
    }
    jc["gram"] = gram;
    json target = json::object();
    for (const auto& [kl, p] : cert.target)
        target[std::to_string(kl.first) + "," + std::to_string(kl.second)] = poly_json(p);
    jc["target"] = target;
    jc["min_eigenvalue"] = cert.min_eigenvalue;
    jc["max_residual"] = cert.max_residual;
    return jc;
}

Certificate certificate_from(const json& jc) {
    Certificate cert;
    cert.constraint_id = jc.at("constraint_id").get<int>();
    cert.label = jc.at("label").get<std::string>();
    for (const auto& m : jc.at("basis")) {
        Polynomial p = parse_polynomial(m.get<std::string>());
        cert.basis.monomials.push_back(p.terms().begin()->first);
    }
    cert.basis.row_of = jc.at("row_of").get<std::vector<int>>();
    const auto& gram = jc.at("gram");
    const auto rows = static_cast<Eigen::Index>(gram.size());
    cert.gram.resize(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < rows; ++j)
            cert.gram(i, j) = gram[static_cast<size_t>(i)][static_cast<size_t>(j)].get<double>();
    for (const auto& [key, val] : jc.at("target").items()) {
        auto comma = key.find(',');
        int k = std::stoi(key.substr(0, comma));
        int l = std::stoi(key.substr(comma + 1));
        cert.target[{k, l}] = poly_from(val);
    }
    cert.min_eigenvalue = jc.at("min_eigenvalue").get<double>();
    cert.max_residual = jc.at("max_residual").get<double>();
    return cert;
}

}  // namespace

void write_bundle(const std::string& dir, const ProblemSpec& spec,
                  const SynthesisResult& result) {
    fs::create_directories(dir);
    {
        std::ofstream f(dir + "/spec.toml");
        f << print_spec(spec);
    }
    json j;
    j["gamma0"] = result.triple.gamma0;
    j["h"] = poly_json(result.triple.h);
    json pis = json::array();
    for (const auto& p : result.triple.pi) pis.push_back(poly_json(p));
    j["pi"] = pis;
    json mults = json::object();
    for (const auto& [name, p] : result.triple.multipliers) mults[name] = poly_json(p);
    j["multipliers"] = mults;
    j["no_improvement"] = result.triple.no_improvement;
    j["stagnated"] = result.stagnated;
    j["shift"] = result.shift;

    json iterates = json::array();
    for (const auto& h : result.h_iterates) iterates.push_back(poly_json(h));
    j["h_iterates"] = iterates;

    json logs = json::array();
    for (const auto& log : result.logs) {
        json jl;
        jl["k"] = log.k;
        jl["step1_status"] = log.step1_status;
        jl["step2_status"] = log.step2_status;
        jl["gamma0"] = log.gamma0;
        jl["delta_achieved"] = log.delta_achieved;
        jl["area_estimate"] = log.area_estimate;
        jl["step1_seconds"] = log.step1_seconds;
        jl["step2_seconds"] = log.step2_seconds;
        logs.push_back(jl);
    }
    j["iterations"] = logs;

    // per-iteration surrogate data for the semantics checks
    json iters = json::array();
    for (const auto& it : result.iteration_data) {
        json ji;
        ji["k"] = it.k;
        ji["h_prev"] = poly_json(it.h_prev);
        ji["gamma0"] = it.s1.gamma0;
        json mu = json::array();
        for (const auto& p : it.s1.mu) mu.push_back(poly_json(p));
        ji["mu"] = mu;
        json acoeffs = json::object(), tildes = json::object();
        for (const auto& [alpha, p] : it.s1.a_coeffs) {
            std::string key;
            for (size_t t = 0; t < alpha.size(); ++t)
                key += (t ? "," : "") + std::to_string(alpha[t]);
            acoeffs[key] = poly_json(p);
            tildes[key] = poly_json(it.s1.tilde.at(alpha));
        }
        ji["a_coeffs"] = acoeffs;
        ji["tilde"] = tildes;
        iters.push_back(ji);
    }
    j["step1_data"] = iters;

    {
        std::ofstream f(dir + "/result.json");
        f << j.dump(1) << "\n";
    }
    {
        json jc = json::array();
        for (const auto& cert : result.triple.certificates) jc.push_back(certificate_json(cert));
        std::ofstream f(dir + "/certificates.json");
        f << jc.dump(1) << "\n";
    }
}

ResultBundle read_bundle(const std::string& dir) {
    ResultBundle b;
    {
        std::ifstream f(dir + "/spec.toml");
        if (!f) throw std::runtime_error("bundle is missing spec.toml in '" + dir + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        b.spec = parse_spec_text(ss.str(), dir + "/spec.toml");
    }
    std::ifstream f(dir + "/result.json");
    if (!f) throw std::runtime_error("bundle is missing result.json in '" + dir + "'");
    json j = json::parse(f);
    b.result.triple.gamma0 = j.at("gamma0").get<double>();
    b.result.triple.h = poly_from(j.at("h"));
    for (const auto& p : j.at("pi")) b.result.triple.pi.push_back(poly_from(p));
    for (const auto& [name, p] : j.at("multipliers").items())
        b.result.triple.multipliers[name] = poly_from(p);
    b.result.triple.no_improvement = j.at("no_improvement").get<bool>();
    b.result.stagnated = j.at("stagnated").get<bool>();
    b.result.shift = j.at("shift").get<std::vector<double>>();
    for (const auto& p : j.at("h_iterates")) b.result.h_iterates.push_back(poly_from(p));
    for (const auto& jl : j.at("iterations")) {
        IterationLog log;
        log.k = jl.at("k").get<int>();
        log.step1_status = jl.at("step1_status").get<std::string>();
        log.step2_status = jl.at("step2_status").get<std::string>();
        log.gamma0 = jl.at("gamma0").get<double>();
        log.delta_achieved = jl.at("delta_achieved").get<double>();
        log.area_estimate = jl.at("area_estimate").get<double>();
        log.step1_seconds = jl.at("step1_seconds").get<double>();
        log.step2_seconds = jl.at("step2_seconds").get<double>();
        b.result.logs.push_back(log);
    }
    for (const auto& ji : j.at("step1_data")) {
        SynthesisResult::IterationData it;
        it.k = ji.at("k").get<int>();
        it.h_prev = poly_from(ji.at("h_prev"));
        it.s1.gamma0 = ji.at("gamma0").get<double>();
        for (const auto& p : ji.at("mu")) it.s1.mu.push_back(poly_from(p));
        for (const auto& [key, val] : ji.at("a_coeffs").items()) {
            PolicyIndex alpha;
            std::stringstream ss(key);
            std::string tok;
            while (std::getline(ss, tok, ',')) alpha.push_back(std::stoi(tok));
            it.s1.a_coeffs[alpha] = poly_from(val);
            it.s1.tilde[alpha] = poly_from(ji.at("tilde").at(key));
        }
        b.result.iteration_data.push_back(std::move(it));
    }

    std::ifstream fc(dir + "/certificates.json");
    if (fc) {
        json jc = json::parse(fc);
        for (const auto& c : jc) b.result.triple.certificates.push_back(certificate_from(c));
    }
    return b;
}

void write_verification(const std::string& dir, const VerificationReport& report,
                        const SamplingSpec& spec) {
    json j;
    j["tol"] = spec.tol;
    j["samples_requested"] = spec.samples;
    j["seed"] = spec.seed;
    j["max_violation"] = report.max_violation();
    j["decrease_violation"] = report.decrease_violation;
    j["admissibility_violation"] = report.admissibility_violation;
    j["containment_violation"] = report.containment_violation;
    j["worst_decrease_point"] = report.worst_decrease_point;
    j["worst_admissibility_point"] = report.worst_admissibility_point;
    j["worst_containment_point"] = report.worst_containment_point;
    j["samples_in_set"] = report.samples_in_set;
    j["samples_outside_safe"] = report.samples_outside_safe;
    j["samples_total"] = report.samples_total;
    j["empty_superlevel_warning"] = report.empty_superlevel_warning;
    j["gamma_in_range"] = report.gamma_in_range;
    j["trajectories_run"] = report.trajectories_run;
    j["trajectory_steps"] = report.trajectory_steps;
    j["trajectory_violations"] = report.trajectory_violations;
    j["trajectory_min_h"] = report.trajectory_min_h;
    j["trajectory_min_s"] = report.trajectory_min_s;
    j["certificates_checked"] = report.certificates_checked;
    j["certificate_min_eig"] = report.certificate_min_eig;
    j["certificate_max_residual"] = report.certificate_max_residual;
    std::filesystem::create_directories(dir);
    std::ofstream f(dir + "/verification.json");
    f << j.dump(1) << "\n";
}

}  // namespace dtcbf
