#include "dtcbf/param_polynomial.hpp"

#include <algorithm>
#include <sstream>

#include "dtcbf/errors.hpp"

namespace dtcbf {

int ParamPolynomial::degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
}

std::vector<DecId> ParamPolynomial::decision_ids() const {
    std::vector<DecId> ids;
    for (const auto& [m, c] : terms_)
        for (const auto& [id, w] : c.terms()) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::vector<VarId> ParamPolynomial::variables() const {
    std::vector<VarId> vars;
    for (const auto& [m, c] : terms_)
        for (const auto& [v, e] : m.exponents()) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

ParamPolynomial ParamPolynomial::operator+(const ParamPolynomial& o) const {
    ParamPolynomial r = *this;
    for (const auto& [m, c] : o.terms_) {
        auto it = r.terms_.find(m);
        if (it == r.terms_.end())
            r.terms_[m] = c;
        else
            it->second += c;
    }
    r.prune();
    return r;
}

ParamPolynomial ParamPolynomial::operator-(const ParamPolynomial& o) const {
    return *this + (-o);
}

ParamPolynomial ParamPolynomial::operator-() const {
    ParamPolynomial r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
}

ParamPolynomial ParamPolynomial::operator*(const ParamPolynomial& o) const {
    if (has_decisions() && o.has_decisions())
        throw BilinearProduct("product of two decision-bearing polynomials");
    ParamPolynomial r;
    for (const auto& [ma, ca] : terms_)
        for (const auto& [mb, cb] : o.terms_) {
            AffineExpr prod = ca * cb;
            auto it = r.terms_.find(ma * mb);
            if (it == r.terms_.end())
                r.terms_[ma * mb] = prod;
            else
                it->second += prod;
        }
    r.prune();
    return r;
}

ParamPolynomial ParamPolynomial::operator*(double s) const {
    ParamPolynomial r;
    if (s == 0.0) return r;
    for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
    r.prune();
    return r;
}

Polynomial ParamPolynomial::to_polynomial() const {
    Polynomial r;
    for (const auto& [m, c] : terms_) {
        if (c.has_decisions())
            throw std::logic_error("to_polynomial on a decision-bearing polynomial");
        r += Polynomial::monomial(m, c.constant());
    }
    return r;
}

Polynomial ParamPolynomial::instantiate(const std::map<DecId, double>& values) const {
    Polynomial r;
    for (const auto& [m, c] : terms_) r += Polynomial::monomial(m, c.evaluate(values));
    r.prune();
    return r;
}

AffineExpr ParamPolynomial::evaluate(const std::vector<double>& point,
                                     const std::vector<VarId>& vars) const {
    AffineExpr r(0.0);
    for (const auto& [m, c] : terms_) r += c * m.evaluate(point, vars);
    return r;
}

ParamPolynomial ParamPolynomial::substitute(const std::vector<VarId>& vars,
                                            const std::vector<Polynomial>& values) const {
    if (vars.size() != values.size())
        throw ArityMismatch("substitute: " + std::to_string(vars.size()) + " variables vs " +
                            std::to_string(values.size()) + " values");
    ParamPolynomial r;
    for (const auto& [m, c] : terms_) {
        Polynomial image(1.0);
        for (const auto& [v, e] : m.exponents()) {
            bool found = false;
            for (size_t k = 0; k < vars.size(); ++k) {
                if (vars[k] == v) {
                    image = image * values[k].pow(e);
                    found = true;
                    break;
                }
            }
            if (!found)
                throw ArityMismatch("substitute: no image for variable '" + var_name(v) + "'");
        }
        // coefficient (affine) times a numeric polynomial stays affine
        for (const auto& [mi, ci] : image.terms()) r += ParamPolynomial::term(mi, c * ci);
    }
    r.prune();
    return r;
}

void ParamPolynomial::prune(double tol) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        it->second.prune(tol);
        if (it->second.is_zero())
            it = terms_.erase(it);
        else
            ++it;
    }
}

std::string ParamPolynomial::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        if (!first) os << " + ";
        first = false;
        os << "(" << it->second.str() << ")";
        if (!it->first.is_one()) os << "*" << it->first.str();
    }
    return os.str();
}

}  // namespace dtcbf
