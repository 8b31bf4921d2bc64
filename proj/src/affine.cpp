#include "dtcbf/affine.hpp"

#include <algorithm>
#include <sstream>

namespace dtcbf {

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
    constant_ += o.constant_;
    if (o.terms_.empty()) return *this;
    std::vector<std::pair<DecId, double>> merged;
    merged.reserve(terms_.size() + o.terms_.size());
    size_t i = 0, j = 0;
    while (i < terms_.size() && j < o.terms_.size()) {
        if (terms_[i].first < o.terms_[j].first) {
            merged.push_back(terms_[i++]);
        } else if (terms_[i].first > o.terms_[j].first) {
            merged.push_back(o.terms_[j++]);
        } else {
            double w = terms_[i].second + o.terms_[j].second;
            if (w != 0.0) merged.emplace_back(terms_[i].first, w);
            ++i;
            ++j;
        }
    }
    while (i < terms_.size()) merged.push_back(terms_[i++]);
    while (j < o.terms_.size()) merged.push_back(o.terms_[j++]);
    terms_ = std::move(merged);
    return *this;
}

AffineExpr AffineExpr::operator-() const {
    AffineExpr r;
    r.constant_ = -constant_;
    r.terms_ = terms_;
    for (auto& [id, w] : r.terms_) w = -w;
    return r;
}

AffineExpr AffineExpr::operator*(double s) const {
    AffineExpr r;
    if (s == 0.0) return r;
    r.constant_ = constant_ * s;
    r.terms_ = terms_;
    for (auto& [id, w] : r.terms_) w *= s;
    return r;
}

AffineExpr AffineExpr::operator*(const AffineExpr& o) const {
    if (has_decisions() && o.has_decisions())
        throw BilinearProduct("product of two decision-bearing expressions: " + str() +
                              " * " + o.str());
    if (o.has_decisions()) return o * constant_;
    return *this * o.constant_;
}

double AffineExpr::evaluate(const std::map<DecId, double>& values) const {
    double r = constant_;
    for (const auto& [id, w] : terms_) {
        auto it = values.find(id);
        if (it == values.end())
            throw std::out_of_range("no value for decision variable " + std::to_string(id));
        r += w * it->second;
    }
    return r;
}

void AffineExpr::prune(double tol) {
    if (std::abs(constant_) < tol) constant_ = 0.0;
    terms_.erase(std::remove_if(terms_.begin(), terms_.end(),
                                [tol](const auto& t) { return std::abs(t.second) < tol; }),
                 terms_.end());
}

std::string AffineExpr::str() const {
    std::ostringstream os;
    os << constant_;
    for (const auto& [id, w] : terms_) {
        os << (w >= 0 ? " + " : " - ") << std::abs(w) << "*d" << id;
    }
    return os.str();
}

}  // namespace dtcbf
