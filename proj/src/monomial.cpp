#include "dtcbf/monomial.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dtcbf/errors.hpp"

namespace dtcbf {

Monomial Monomial::from_pairs(std::vector<std::pair<VarId, int>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    Monomial m;
    for (const auto& [v, e] : pairs) {
        if (e < 0) throw std::invalid_argument("negative exponent in monomial");
        if (e == 0) continue;
        if (!m.exps_.empty() && m.exps_.back().first == v)
            m.exps_.back().second += e;
        else
            m.exps_.emplace_back(v, e);
    }
    return m;
}

Monomial Monomial::operator*(const Monomial& o) const {
    Monomial r;
    r.exps_.reserve(exps_.size() + o.exps_.size());
    size_t i = 0, j = 0;
    while (i < exps_.size() && j < o.exps_.size()) {
        if (exps_[i].first < o.exps_[j].first) {
            r.exps_.push_back(exps_[i++]);
        } else if (exps_[i].first > o.exps_[j].first) {
            r.exps_.push_back(o.exps_[j++]);
        } else {
            r.exps_.emplace_back(exps_[i].first, exps_[i].second + o.exps_[j].second);
            ++i;
            ++j;
        }
    }
    while (i < exps_.size()) r.exps_.push_back(exps_[i++]);
    while (j < o.exps_.size()) r.exps_.push_back(o.exps_[j++]);
    return r;
}

bool Monomial::operator<(const Monomial& o) const {
    const int da = degree(), db = o.degree();
    if (da != db) return da < db;
    // Walk both sparse vectors; the first variable where exponents differ
    // decides. Missing entries are zero exponents.
    size_t i = 0, j = 0;
    while (i < exps_.size() || j < o.exps_.size()) {
        VarId va = i < exps_.size() ? exps_[i].first : std::numeric_limits<int>::max();
        VarId vb = j < o.exps_.size() ? o.exps_[j].first : std::numeric_limits<int>::max();
        if (va < vb) return false;  // this has positive exponent on earlier var, other has 0
        if (vb < va) return true;
        if (exps_[i].second != o.exps_[j].second)
            return exps_[i].second < o.exps_[j].second;
        ++i;
        ++j;
    }
    return false;
}

double Monomial::evaluate(const std::vector<double>& point,
                          const std::vector<VarId>& vars) const {
    double r = 1.0;
    for (const auto& [v, e] : exps_) {
        double val = 0.0;
        bool found = false;
        for (size_t k = 0; k < vars.size(); ++k) {
            if (vars[k] == v) {
                val = point[k];
                found = true;
                break;
            }
        }
        if (!found)
            throw DimensionMismatch("monomial uses variable '" + var_name(v) +
                                    "' absent from the evaluation point");
        r *= std::pow(val, e);
    }
    return r;
}

std::string Monomial::str() const {
    if (exps_.empty()) return "1";
    std::string s;
    bool first = true;
    for (const auto& [v, e] : exps_) {
        if (!first) s += "*";
        first = false;
        s += var_name(v);
        if (e != 1) s += "^" + std::to_string(e);
    }
    return s;
}

}  // namespace dtcbf
