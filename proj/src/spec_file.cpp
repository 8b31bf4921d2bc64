#include "dtcbf/spec_file.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "dtcbf/errors.hpp"
#include "dtcbf/gram_basis.hpp"
#include "dtcbf/poly_text.hpp"

namespace dtcbf {

namespace {

struct Value;
using Array = std::vector<Value>;

struct Value {
    std::variant<double, std::string, bool, Array> v;
    int line = 0;
};

struct Doc {
    // section -> key -> value; insertion order preserved for diagnostics
    std::map<std::string, std::map<std::string, Value>> sections;
    std::map<std::string, int> section_lines;
};

struct LineCursor {
    const std::string& s;
    size_t i = 0;
    int line;

    void skip_ws() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    }
    bool done() {
        skip_ws();
        return i >= s.size() || s[i] == '#';
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line, static_cast<int>(i) + 1);
    }
};

Value parse_value(LineCursor& c);

Value parse_array(LineCursor& c) {
    Value out;
    out.line = c.line;
    Array arr;
    ++c.i;  // '['
    c.skip_ws();
    if (c.i < c.s.size() && c.s[c.i] == ']') {
        ++c.i;
        out.v = std::move(arr);
        return out;
    }
    for (;;) {
        arr.push_back(parse_value(c));
        c.skip_ws();
        if (c.i >= c.s.size()) c.fail("unterminated array");
        if (c.s[c.i] == ',') {
            ++c.i;
            continue;
        }
        if (c.s[c.i] == ']') {
            ++c.i;
            break;
        }
        c.fail("expected ',' or ']' in array");
    }
    out.v = std::move(arr);
    return out;
}

Value parse_value(LineCursor& c) {
    c.skip_ws();
    if (c.i >= c.s.size()) c.fail("missing value");
    char ch = c.s[c.i];
    Value out;
    out.line = c.line;
    if (ch == '[') return parse_array(c);
    if (ch == '"') {
        size_t end = c.s.find('"', c.i + 1);
        if (end == std::string::npos) c.fail("unterminated string");
        out.v = c.s.substr(c.i + 1, end - c.i - 1);
        c.i = end + 1;
        return out;
    }
    if (c.s.compare(c.i, 4, "true") == 0) {
        out.v = true;
        c.i += 4;
        return out;
    }
    if (c.s.compare(c.i, 5, "false") == 0) {
        out.v = false;
        c.i += 5;
        return out;
    }
    char* end = nullptr;
    double d = std::strtod(c.s.c_str() + c.i, &end);
    if (end == c.s.c_str() + c.i) c.fail("cannot parse value");
    c.i = static_cast<size_t>(end - c.s.c_str());
    out.v = d;
    return out;
}

Doc parse_doc(const std::string& text) {
    Doc doc;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        LineCursor c{raw, 0, lineno};
        if (c.done()) continue;
        if (raw[c.i] == '[') {
            size_t end = raw.find(']', c.i);
            if (end == std::string::npos) c.fail("unterminated section header");
            section = raw.substr(c.i + 1, end - c.i - 1);
            doc.section_lines.emplace(section, lineno);
            doc.sections[section];
            continue;
        }
        size_t eq = raw.find('=', c.i);
        if (eq == std::string::npos) c.fail("expected 'key = value'");
        std::string key = raw.substr(c.i, eq - c.i);
        while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back())))
            key.pop_back();
        if (key.empty()) c.fail("empty key");
        if (section.empty()) c.fail("key outside of any [section]");
        LineCursor vc{raw, eq + 1, lineno};
        Value v = parse_value(vc);
        if (!vc.done()) vc.fail("trailing characters after value");
        doc.sections[section][key] = std::move(v);
    }
    return doc;
}

// typed access helpers with line-anchored errors
const Value* find(const Doc& doc, const std::string& sec, const std::string& key) {
    auto s = doc.sections.find(sec);
    if (s == doc.sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

const Value& need(const Doc& doc, const std::string& sec, const std::string& key) {
    auto s = doc.sections.find(sec);
    if (s == doc.sections.end()) throw ParseError("missing [" + sec + "] section", 1);
    auto k = s->second.find(key);
    if (k == s->second.end())
        throw ParseError("missing key '" + key + "' in [" + sec + "]",
                         doc.section_lines.count(sec) ? doc.section_lines.at(sec) : 1);
    return k->second;
}

double as_number(const Value& v, const std::string& what) {
    if (auto* d = std::get_if<double>(&v.v)) return *d;
    throw ParseError(what + " must be a number", v.line);
}

int as_int(const Value& v, const std::string& what) {
    double d = as_number(v, what);
    if (d != std::floor(d)) throw ParseError(what + " must be an integer", v.line);
    return static_cast<int>(d);
}

std::string as_string(const Value& v, const std::string& what) {
    if (auto* s = std::get_if<std::string>(&v.v)) return *s;
    throw ParseError(what + " must be a string", v.line);
}

const Array& as_array(const Value& v, const std::string& what) {
    if (auto* a = std::get_if<Array>(&v.v)) return *a;
    throw ParseError(what + " must be an array", v.line);
}

std::vector<double> as_numbers(const Value& v, const std::string& what) {
    std::vector<double> out;
    for (const auto& e : as_array(v, what)) out.push_back(as_number(e, what + " entry"));
    return out;
}

Polynomial as_poly(const Value& v, const std::string& what) {
    std::string text = as_string(v, what);
    try {
        return parse_polynomial(text);
    } catch (const ParseError& e) {
        throw ParseError(what + ": " + e.what(), v.line);
    }
}

Monomial as_monomial(const Value& v, const std::string& what) {
    Polynomial p = as_poly(v, what);
    if (p.terms().size() != 1 || std::abs(p.terms().begin()->second - 1.0) > 0.0)
        throw ParseError(what + " must be a single monomial with coefficient 1", v.line);
    return p.terms().begin()->first;
}

std::vector<Monomial> as_basis(const Value& v, const std::string& what) {
    std::vector<Monomial> out;
    for (const auto& e : as_array(v, what)) out.push_back(as_monomial(e, what + " entry"));
    return out;
}

}  // namespace

ProblemSpec parse_spec_text(const std::string& text, const std::string& origin) {
    Doc doc = parse_doc(text);
    ProblemSpec spec;

    if (!doc.sections.count("plant")) throw ParseError("missing [plant] section in " + origin, 1);

    // [plant]
    spec.plant.n = as_int(need(doc, "plant", "n"), "plant.n");
    spec.plant.m = as_int(need(doc, "plant", "m"), "plant.m");
    if (spec.plant.n <= 0 || spec.plant.m <= 0)
        throw SemanticError("plant dimensions must be positive");
    spec.plant.state = state_vars(spec.plant.n);
    input_vars(spec.plant.m);  // intern u1..um for a stable namespace
    {
        const Value& fv = need(doc, "plant", "f");
        const Array& fa = as_array(fv, "plant.f");
        if (static_cast<int>(fa.size()) != spec.plant.n)
            throw SemanticError("plant.f must list n = " + std::to_string(spec.plant.n) +
                                " polynomials");
        for (const auto& e : fa) spec.plant.f.push_back(as_poly(e, "plant.f entry"));

        const Value& gv = need(doc, "plant", "g");
        const Array& ga = as_array(gv, "plant.g");
        if (static_cast<int>(ga.size()) != spec.plant.n)
            throw SemanticError("plant.g must have n rows");
        spec.plant.g = PolyMatrix(spec.plant.n, spec.plant.m);
        for (int i = 0; i < spec.plant.n; ++i) {
            const Array& row = as_array(ga[static_cast<size_t>(i)], "plant.g row");
            if (static_cast<int>(row.size()) != spec.plant.m)
                throw SemanticError("plant.g row " + std::to_string(i + 1) + " must have m = " +
                                    std::to_string(spec.plant.m) + " entries");
            for (int j = 0; j < spec.plant.m; ++j)
                spec.plant.g.at(i, j) = as_poly(row[static_cast<size_t>(j)], "plant.g entry");
        }
    }
    spec.plant.validate();

    // [input]
    {
        const Array& Ma = as_array(need(doc, "input", "M"), "input.M");
        for (const auto& row : Ma) spec.input.M.push_back(as_numbers(row, "input.M row"));
        spec.input.d = as_numbers(need(doc, "input", "d"), "input.d");
        if (spec.input.M.empty()) throw SemanticError("input.M must have at least one row");
        for (const auto& row : spec.input.M)
            if (static_cast<int>(row.size()) != spec.plant.m)
                throw SemanticError("input.M rows must have m entries");
        if (spec.input.d.size() != spec.input.M.size())
            throw SemanticError("input.d length must match the number of rows of input.M");
        if (!spec.input.is_nonempty())
            throw SemanticError("the input polytope { u : M u + d >= 0 } is empty");
    }

    // [safe], [init]
    spec.safe.s = as_poly(need(doc, "safe", "s"), "safe.s");
    spec.config.h0 = as_poly(need(doc, "init", "h0"), "init.h0");

    // [param] with defaults
    auto& cfg = spec.config;
    if (const Value* H = find(doc, "param", "H")) {
        cfg.h_basis = as_basis(*H, "param.H");
    } else {
        cfg.h_basis = monomials_up_to(spec.plant.state, 2);
    }
    if (const Value* Pi = find(doc, "param", "Pi")) {
        const Array& arr = as_array(*Pi, "param.Pi");
        bool nested = !arr.empty() && std::holds_alternative<Array>(arr.front().v);
        if (nested) {
            for (const auto& e : arr) cfg.pi_bases.push_back(as_basis(e, "param.Pi entry"));
            if (static_cast<int>(cfg.pi_bases.size()) != spec.plant.m)
                throw SemanticError("param.Pi must list one basis per input");
        } else {
            std::vector<Monomial> shared = as_basis(*Pi, "param.Pi");
            cfg.pi_bases.assign(static_cast<size_t>(spec.plant.m), shared);
        }
    } else {
        cfg.pi_bases.assign(static_cast<size_t>(spec.plant.m),
                            monomials_up_to(spec.plant.state, 2));
    }

    auto opt_int = [&](const char* key, int* out) {
        if (const Value* v = find(doc, "param", key)) *out = as_int(*v, std::string("param.") + key);
    };
    auto opt_num = [&](const char* key, double* out) {
        if (const Value* v = find(doc, "param", key))
            *out = as_number(*v, std::string("param.") + key);
    };
    opt_int("deg_Lambda", &cfg.deg_Lambda);
    opt_int("deg_Omega", &cfg.deg_Omega);
    opt_int("deg_Phi", &cfg.deg_Phi);
    opt_int("deg_Psi", &cfg.deg_Psi);
    opt_int("deg_Xi", &cfg.deg_Xi);
    opt_int("deg_sigma", &cfg.deg_sigma);
    opt_int("deg_xi", &cfg.deg_xi);
    opt_int("deg_eta", &cfg.deg_eta);
    opt_int("deg_sigma_tilde", &cfg.deg_sigma_tilde);
    opt_int("deg_pi_tilde", &cfg.deg_pi_tilde);
    opt_int("deg_Theta", &cfg.deg_Theta);
    opt_int("deg_Delta", &cfg.deg_Delta);
    opt_int("deg_mu_tilde", &cfg.deg_mu_tilde);
    opt_num("epsilon", &cfg.epsilon);
    opt_num("delta", &cfg.delta);
    if (cfg.epsilon <= 0.0 || cfg.delta <= 0.0)
        throw SemanticError("param.epsilon and param.delta must be positive");
    if (const Value* v = find(doc, "param", "gamma_objective")) {
        std::string mode = as_string(*v, "param.gamma_objective");
        if (mode == "maximize")
            cfg.gamma_objective = GammaObjective::Maximize;
        else if (mode == "target")
            cfg.gamma_objective = GammaObjective::Target;
        else
            throw ParseError("param.gamma_objective must be \"maximize\" or \"target\"", v->line);
    }
    opt_num("gamma_target", &cfg.gamma_target);
    if (const Value* v = find(doc, "param", "growth_objective")) {
        std::string mode = as_string(*v, "param.growth_objective");
        if (mode == "max-delta")
            cfg.growth_objective = GrowthObjective::MaxDelta;
        else if (mode == "feasibility")
            cfg.growth_objective = GrowthObjective::Feasibility;
        else
            throw ParseError("param.growth_objective must be \"max-delta\" or \"feasibility\"",
                             v->line);
    }
    if (const Value* v = find(doc, "param", "anchor"))
        cfg.anchor = as_numbers(*v, "param.anchor");

    // [run]
    auto run_int = [&](const char* key, int* out) {
        if (const Value* v = find(doc, "run", key)) *out = as_int(*v, std::string("run.") + key);
    };
    run_int("max_iters", &cfg.max_iters);
    if (const Value* v = find(doc, "run", "seed"))
        cfg.seed = static_cast<std::uint64_t>(as_number(*v, "run.seed"));
    if (const Value* v = find(doc, "run", "extension")) {
        std::string mode = as_string(*v, "run.extension");
        if (mode == "quadratic")
            cfg.extension = ExtensionMode::Quadratic;
        else if (mode == "cascaded")
            cfg.extension = ExtensionMode::Cascaded;
        else if (mode == "fixed-policy")
            cfg.extension = ExtensionMode::FixedPolicy;
        else
            throw ParseError(
                "run.extension must be \"quadratic\", \"cascaded\" or \"fixed-policy\"", v->line);
    }
    if (const Value* v = find(doc, "run", "shift")) {
        if (std::holds_alternative<std::string>(v->v)) {
            if (as_string(*v, "run.shift") != "auto")
                throw ParseError("run.shift must be \"auto\" or an array", v->line);
        } else {
            cfg.shift = as_numbers(*v, "run.shift");
        }
    }
    run_int("target_degree", &cfg.target_degree);
    if (const Value* v = find(doc, "run", "H_final"))
        cfg.h_final_basis = as_basis(*v, "run.H_final");
    if (const Value* v = find(doc, "run", "feas_tol"))
        cfg.solver.feas_tol = as_number(*v, "run.feas_tol");
    if (const Value* v = find(doc, "run", "gap_tol"))
        cfg.solver.gap_tol = as_number(*v, "run.gap_tol");
    if (const Value* v = find(doc, "run", "eig_tol")) cfg.eig_tol = as_number(*v, "run.eig_tol");
    if (const Value* v = find(doc, "run", "coeff_tol"))
        cfg.coeff_tol = as_number(*v, "run.coeff_tol");
    run_int("max_solver_iters", &cfg.solver.max_iters);
    if (const Value* v = find(doc, "run", "verbose"))
        cfg.verbose = std::get_if<bool>(&v->v) ? std::get<bool>(v->v) : false;

    // cross-checks
    if (cfg.h0.is_zero()) throw SemanticError("init.h0 must be a nonzero polynomial");
    int hdeg = 0;
    for (const auto& m : cfg.h_basis) hdeg = std::max(hdeg, m.degree());
    if (hdeg % 2 != 0) throw SemanticError("param.H must have even top degree");
    return spec;
}

ProblemSpec parse_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open spec file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_spec_text(ss.str(), path);
}

std::string print_spec(const ProblemSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    auto poly_list = [&](const PolyVec& v) {
        std::string s = "[";
        for (size_t i = 0; i < v.size(); ++i) {
            if (i) s += ", ";
            s += "\"" + print_polynomial(v[i]) + "\"";
        }
        return s + "]";
    };
    os << "[plant]\n";
    os << "n = " << spec.plant.n << "\n";
    os << "m = " << spec.plant.m << "\n";
    os << "f = " << poly_list(spec.plant.f) << "\n";
    os << "g = [";
    for (int i = 0; i < spec.plant.n; ++i) {
        if (i) os << ", ";
        os << "[";
        for (int j = 0; j < spec.plant.m; ++j) {
            if (j) os << ", ";
            os << "\"" << print_polynomial(spec.plant.g.at(i, j)) << "\"";
        }
        os << "]";
    }
    os << "]\n\n[input]\n";
    os << "M = [";
    for (size_t i = 0; i < spec.input.M.size(); ++i) {
        if (i) os << ", ";
        os << "[";
        for (size_t j = 0; j < spec.input.M[i].size(); ++j) {
            if (j) os << ", ";
            os << spec.input.M[i][j];
        }
        os << "]";
    }
    os << "]\n";
    os << "d = [";
    for (size_t i = 0; i < spec.input.d.size(); ++i) {
        if (i) os << ", ";
        os << spec.input.d[i];
    }
    os << "]\n\n[safe]\n";
    os << "s = \"" << print_polynomial(spec.safe.s) << "\"\n";
    os << "\n[init]\n";
    os << "h0 = \"" << print_polynomial(spec.config.h0) << "\"\n";

    const auto& cfg = spec.config;
    os << "\n[param]\n";
    os << "H = [";
    for (size_t i = 0; i < cfg.h_basis.size(); ++i) {
        if (i) os << ", ";
        os << "\"" << cfg.h_basis[i].str() << "\"";
    }
    os << "]\n";
    os << "Pi = [";
    for (size_t p = 0; p < cfg.pi_bases.size(); ++p) {
        if (p) os << ", ";
        os << "[";
        for (size_t i = 0; i < cfg.pi_bases[p].size(); ++i) {
            if (i) os << ", ";
            os << "\"" << cfg.pi_bases[p][i].str() << "\"";
        }
        os << "]";
    }
    os << "]\n";
    os << "deg_Lambda = " << cfg.deg_Lambda << "\n";
    os << "deg_Omega = " << cfg.deg_Omega << "\n";
    os << "deg_Phi = " << cfg.deg_Phi << "\n";
    os << "deg_Psi = " << cfg.deg_Psi << "\n";
    os << "deg_Xi = " << cfg.deg_Xi << "\n";
    os << "deg_sigma = " << cfg.deg_sigma << "\n";
    os << "deg_xi = " << cfg.deg_xi << "\n";
    os << "deg_eta = " << cfg.deg_eta << "\n";
    os << "deg_sigma_tilde = " << cfg.deg_sigma_tilde << "\n";
    os << "deg_pi_tilde = " << cfg.deg_pi_tilde << "\n";
    os << "deg_Theta = " << cfg.deg_Theta << "\n";
    os << "deg_Delta = " << cfg.deg_Delta << "\n";
    os << "deg_mu_tilde = " << cfg.deg_mu_tilde << "\n";
    os << "epsilon = " << cfg.epsilon << "\n";
    os << "delta = " << cfg.delta << "\n";
    os << "gamma_objective = \""
       << (cfg.gamma_objective == GammaObjective::Maximize ? "maximize" : "target") << "\"\n";
    os << "gamma_target = " << cfg.gamma_target << "\n";
    os << "growth_objective = \""
       << (cfg.growth_objective == GrowthObjective::MaxDelta ? "max-delta" : "feasibility")
       << "\"\n";
    if (!cfg.anchor.empty()) {
        os << "anchor = [";
        for (size_t i = 0; i < cfg.anchor.size(); ++i) {
            if (i) os << ", ";
            os << cfg.anchor[i];
        }
        os << "]\n";
    }

    os << "\n[run]\n";
    os << "max_iters = " << cfg.max_iters << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "extension = \""
       << (cfg.extension == ExtensionMode::Quadratic
               ? "quadratic"
               : cfg.extension == ExtensionMode::Cascaded ? "cascaded" : "fixed-policy")
       << "\"\n";
    if (!cfg.shift.empty()) {
        os << "shift = [";
        for (size_t i = 0; i < cfg.shift.size(); ++i) {
            if (i) os << ", ";
            os << cfg.shift[i];
        }
        os << "]\n";
    }
    if (cfg.target_degree > 0) os << "target_degree = " << cfg.target_degree << "\n";
    if (!cfg.h_final_basis.empty()) {
        os << "H_final = [";
        for (size_t i = 0; i < cfg.h_final_basis.size(); ++i) {
            if (i) os << ", ";
            os << "\"" << cfg.h_final_basis[i].str() << "\"";
        }
        os << "]\n";
    }
    os << "feas_tol = " << cfg.solver.feas_tol << "\n";
    os << "gap_tol = " << cfg.solver.gap_tol << "\n";
    os << "eig_tol = " << cfg.eig_tol << "\n";
    os << "coeff_tol = " << cfg.coeff_tol << "\n";
    os << "max_solver_iters = " << cfg.solver.max_iters << "\n";
    return os.str();
}

}  // namespace dtcbf
