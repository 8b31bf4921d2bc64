#include "dtcbf/polynomial.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dtcbf/errors.hpp"

namespace dtcbf {

int Polynomial::degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
}

std::vector<VarId> Polynomial::variables() const {
    std::vector<VarId> vars;
    for (const auto& [m, c] : terms_)
        for (const auto& [v, e] : m.exponents()) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [m, c] : o.terms_) r.terms_[m] += c;
    r.prune();
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator-() const {
    Polynomial r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    Polynomial r;
    for (const auto& [ma, ca] : terms_)
        for (const auto& [mb, cb] : o.terms_) r.terms_[ma * mb] += ca * cb;
    r.prune();
    return r;
}

Polynomial Polynomial::operator*(double s) const {
    Polynomial r;
    if (s == 0.0) return r;
    for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
    r.prune();
    return r;
}

Polynomial Polynomial::pow(int e) const {
    if (e < 0) throw std::invalid_argument("negative polynomial power");
    Polynomial r(1.0);
    for (int i = 0; i < e; ++i) r = r * (*this);
    return r;
}

double Polynomial::evaluate(const std::vector<double>& point,
                            const std::vector<VarId>& vars) const {
    if (point.size() != vars.size())
        throw DimensionMismatch("evaluation point has " + std::to_string(point.size()) +
                                " entries for " + std::to_string(vars.size()) + " variables");
    double r = 0.0;
    for (const auto& [m, c] : terms_) r += c * m.evaluate(point, vars);
    return r;
}

Polynomial Polynomial::substitute(const std::vector<VarId>& vars,
                                  const std::vector<Polynomial>& values) const {
    if (vars.size() != values.size())
        throw ArityMismatch("substitute: " + std::to_string(vars.size()) + " variables vs " +
                            std::to_string(values.size()) + " values");
    Polynomial r;
    for (const auto& [m, c] : terms_) {
        Polynomial term(c);
        for (const auto& [v, e] : m.exponents()) {
            bool found = false;
            for (size_t k = 0; k < vars.size(); ++k) {
                if (vars[k] == v) {
                    term = term * values[k].pow(e);
                    found = true;
                    break;
                }
            }
            if (!found)
                throw ArityMismatch("substitute: no image for variable '" + var_name(v) + "'");
        }
        r += term;
    }
    return r;
}

bool Polynomial::almost_equal(const Polynomial& o, double tol) const {
    Polynomial d = *this - o;
    for (const auto& [m, c] : d.terms())
        if (std::abs(c) > tol) return false;
    return true;
}

void Polynomial::prune(double tol) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::abs(it->second) < tol)
            it = terms_.erase(it);
        else
            ++it;
    }
}

std::string Polynomial::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // Highest-degree terms first reads more naturally.
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const double c = it->second;
        if (first) {
            if (c < 0) os << "-";
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", std::abs(c));
        const bool unit = std::abs(std::abs(c) - 1.0) == 0.0;
        if (it->first.is_one()) {
            os << buf;
        } else if (unit) {
            os << it->first.str();
        } else {
            os << buf << "*" << it->first.str();
        }
    }
    return os.str();
}

}  // namespace dtcbf
