#include "dtcbf/sdp_problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace dtcbf {

void SparseRow::compress() {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<int, double>> out;
    out.reserve(entries.size());
    for (const auto& [col, v] : entries) {
        if (!out.empty() && out.back().first == col)
            out.back().second += v;
        else
            out.emplace_back(col, v);
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const auto& e) { return e.second == 0.0; }),
              out.end());
    entries = std::move(out);
}

SdpProblem::PresolveReport SdpProblem::presolve() {
    PresolveReport rep;
    std::map<std::vector<std::pair<int, double>>, size_t> seen;
    std::vector<SparseRow> kept_rows;
    std::vector<double> kept_b;
    for (size_t i = 0; i < rows.size(); ++i) {
        rows[i].compress();
        if (rows[i].entries.empty()) {
            if (std::abs(b[i]) > 1e-12) {
                rep.trivially_infeasible = true;
                rep.warnings.push_back("row " + std::to_string(i) +
                                       " reduces to 0 = " + std::to_string(b[i]));
            }
            ++rep.removed_zero_rows;
            continue;
        }
        auto it = seen.find(rows[i].entries);
        if (it != seen.end() && kept_b[it->second] == b[i]) {
            ++rep.removed_duplicates;
            continue;
        }
        if (it == seen.end()) seen.emplace(rows[i].entries, kept_rows.size());
        kept_rows.push_back(std::move(rows[i]));
        kept_b.push_back(b[i]);
    }
    if (rep.removed_duplicates > 0)
        rep.warnings.push_back(std::to_string(rep.removed_duplicates) +
                               " duplicate equality rows removed");
    rows = std::move(kept_rows);
    b = std::move(kept_b);
    return rep;
}

std::string SdpProblem::layout_signature() const {
    std::string s = "free:" + std::to_string(cones.n_free) +
                    ";nn:" + std::to_string(cones.n_nonneg) + ";psd:";
    for (int p : cones.psd_sizes) s += std::to_string(p) + ",";
    s += ";rows:" + std::to_string(rows.size()) + ";";
    char buf[64];
    for (const auto& r : rows) {
        for (const auto& [col, v] : r.entries) {
            std::snprintf(buf, sizeof(buf), "%d:%.17g ", col, v);
            s += buf;
        }
        s += "|";
    }
    for (double v : b) {
        std::snprintf(buf, sizeof(buf), "%.17g ", v);
        s += buf;
    }
    return s;
}

}  // namespace dtcbf
