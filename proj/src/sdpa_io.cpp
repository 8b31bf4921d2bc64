#include "dtcbf/sdpa_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "dtcbf/errors.hpp"

namespace dtcbf {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

void write_sdpa(std::ostream& os, const SdpProblem& prob) {
    const int p = prob.num_rows();
    const int nf = prob.cones.n_free;
    const int nl = prob.cones.n_nonneg;
    const auto& psd = prob.cones.psd_sizes;

    // Block table: PSD blocks, then one diagonal block holding the nonneg
    // section plus the +/- pair for each free column.
    int diag_size = nl + 2 * nf;
    int nblocks = static_cast<int>(psd.size()) + (diag_size > 0 ? 1 : 0);

    os << "\"exported conic dual\"\n";
    os << p << " = mDIM\n";
    os << nblocks << " = nBLOCK\n";
    for (int s : psd) os << s << " ";
    if (diag_size > 0) os << -diag_size;
    os << " = bLOCKsTRUCT\n";
    // objective of the file: min (-b)'y
    os.precision(17);
    for (int i = 0; i < p; ++i) os << -prob.b[static_cast<size_t>(i)] << " ";
    os << "\n";

    // entries: <matno> <blkno> <i> <j> <value> with matno 0 = F0.
    // Constraint slack: X = C - sum_i y_i A_i  ->  F_i = A_i, F0 = ... with
    // X = sum y_i F_i - F0 >= 0 we need F_i = -A_i and F0 = -C.
    auto emit = [&](int matno, int blk, int i, int j, double v) {
        if (v != 0.0) os << matno << " " << blk << " " << i + 1 << " " << j + 1 << " " << v << "\n";
    };

    // helper mapping a column of the variable vector to (block, i, j, scale):
    // value contribution of svec coordinate to the matrix entry.
    struct Loc {
        int blk, i, j;
        double scale;
    };
    auto locate = [&](int col) -> Loc {
        if (col < nf) return {static_cast<int>(psd.size()) + 1, col, col, 1.0};  // handled separately
        if (col < nf + nl) {
            int loc = col - nf;
            return {static_cast<int>(psd.size()) + 1, 2 * nf + loc, 2 * nf + loc, 1.0};
        }
        for (size_t k = 0; k < psd.size(); ++k) {
            int off = prob.cones.psd_offset(k);
            int len = ConeLayout::tri(psd[k]);
            if (col < off + len) {
                int local = col - off;
                int j = 0;
                while (ConeLayout::svec_index(0, j + 1) <= local) ++j;
                int i = local - ConeLayout::svec_index(0, j);
                double scale = (i == j) ? 1.0 : 1.0 / kSqrt2;
                return {static_cast<int>(k) + 1, i, j, scale};
            }
        }
        throw DimensionMismatch("write_sdpa: column out of range");
    };

    const int diag_blk = static_cast<int>(psd.size()) + 1;
    // F_i = -A_i restricted to cone sections; free columns become the +/- pair.
    for (int r = 0; r < p; ++r) {
        for (const auto& [col, v] : prob.rows[static_cast<size_t>(r)].entries) {
            if (col < nf) {
                // c_f - A_f' y, then its negation
                emit(r + 1, diag_blk, col, col, -v);
                emit(r + 1, diag_blk, nf + col, nf + col, v);
            } else {
                Loc L = locate(col);
                emit(r + 1, L.blk, L.i, L.j, -v * L.scale);
            }
        }
    }
    // F0 = -C
    for (int col = 0; col < prob.cones.total(); ++col) {
        double cv = prob.c[static_cast<size_t>(col)];
        if (cv == 0.0) continue;
        if (col < nf) {
            emit(0, diag_blk, col, col, -cv);
            emit(0, diag_blk, nf + col, nf + col, cv);
        } else {
            Loc L = locate(col);
            emit(0, L.blk, L.i, L.j, -cv * L.scale);
        }
    }
}

void write_sdpa_file(const std::string& path, const SdpProblem& prob) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_sdpa(f, prob);
}

SdpProblem read_sdpa(std::istream& is) {
    auto next_data_line = [&](std::string& line) -> bool {
        while (std::getline(is, line)) {
            size_t pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos) continue;
            if (line[pos] == '"' || line[pos] == '*') continue;
            return true;
        }
        return false;
    };
    auto numbers_of = [](const std::string& line) {
        std::vector<double> out;
        std::string filtered;
        for (char ch : line)
            filtered += (ch == ',' || ch == '(' || ch == ')' || ch == '{' || ch == '}') ? ' ' : ch;
        std::istringstream ss(filtered);
        double v;
        while (ss >> v) out.push_back(v);
        return out;
    };

    std::string line;
    if (!next_data_line(line)) throw ParseError("SDPA: missing mDIM", 1);
    int m = static_cast<int>(numbers_of(line).at(0));
    if (!next_data_line(line)) throw ParseError("SDPA: missing nBLOCK", 2);
    int nblock = static_cast<int>(numbers_of(line).at(0));
    if (!next_data_line(line)) throw ParseError("SDPA: missing block structure", 3);
    std::vector<double> bs = numbers_of(line);
    if (static_cast<int>(bs.size()) < nblock) throw ParseError("SDPA: short block structure", 3);
    std::vector<double> cvec;
    while (static_cast<int>(cvec.size()) < m) {
        if (!next_data_line(line)) throw ParseError("SDPA: short objective vector", 4);
        for (double v : numbers_of(line)) cvec.push_back(v);
    }

    // layout: z (free, m) first, then per block a cone variable.
    SdpProblem prob;
    prob.cones.n_free = m;
    std::vector<int> blk_kind(static_cast<size_t>(nblock));  // >0 psd size, <0 diag size
    int n_nonneg = 0;
    std::vector<int> psd_sizes;
    for (int k = 0; k < nblock; ++k) {
        int s = static_cast<int>(bs[static_cast<size_t>(k)]);
        blk_kind[static_cast<size_t>(k)] = s;
        if (s < 0)
            n_nonneg += -s;
        else
            psd_sizes.push_back(s);
    }
    prob.cones.n_nonneg = n_nonneg;
    prob.cones.psd_sizes = psd_sizes;

    // column of entry (blk, i, j)
    std::vector<int> diag_offset(static_cast<size_t>(nblock), 0);
    std::vector<size_t> psd_index(static_cast<size_t>(nblock), 0);
    {
        int dacc = 0;
        size_t pacc = 0;
        for (int k = 0; k < nblock; ++k) {
            if (blk_kind[static_cast<size_t>(k)] < 0) {
                diag_offset[static_cast<size_t>(k)] = dacc;
                dacc += -blk_kind[static_cast<size_t>(k)];
            } else {
                psd_index[static_cast<size_t>(k)] = pacc++;
            }
        }
    }
    auto column_of = [&](int blk, int i, int j, double* scale) -> int {
        int kind = blk_kind[static_cast<size_t>(blk)];
        if (kind < 0) {
            if (i != j) throw ParseError("SDPA: off-diagonal entry in diagonal block", 0);
            *scale = 1.0;
            return prob.cones.n_free + diag_offset[static_cast<size_t>(blk)] + i;
        }
        *scale = (i == j) ? 1.0 : kSqrt2;  // svec coordinate = sqrt2 * X_ij
        int a = std::min(i, j), b = std::max(i, j);
        return prob.cones.psd_offset(psd_index[static_cast<size_t>(blk)]) +
               ConeLayout::svec_index(a, b);
    };

    // matching rows: one per (blk, i<=j) entry that appears anywhere.
    // X_blk entries satisfy X = sum_i z_i F_i - F0, i.e.
    //   X_entry - sum_i F_i_entry z_i = -F0_entry.
    std::map<std::tuple<int, int, int>, std::pair<SparseRow, double>> match;
    auto row_for = [&](int blk, int i, int j) -> std::pair<SparseRow, double>& {
        auto key = std::make_tuple(blk, std::min(i, j), std::max(i, j));
        auto it = match.find(key);
        if (it == match.end()) {
            double scale;
            int col = column_of(blk, std::min(i, j), std::max(i, j), &scale);
            SparseRow r;
            r.add(col, 1.0 / scale);  // X entry in natural (matrix) units
            it = match.emplace(key, std::make_pair(std::move(r), 0.0)).first;
        }
        return it->second;
    };

    while (next_data_line(line)) {
        std::vector<double> v = numbers_of(line);
        if (v.size() < 5) continue;
        int matno = static_cast<int>(v[0]);
        int blk = static_cast<int>(v[1]) - 1;
        int i = static_cast<int>(v[2]) - 1;
        int j = static_cast<int>(v[3]) - 1;
        double val = v[4];
        if (blk < 0 || blk >= nblock) throw ParseError("SDPA: bad block number", 0);
        auto& [row, rhs] = row_for(blk, i, j);
        if (matno == 0)
            rhs = -val;  // -F0 entry
        else
            row.add(matno - 1, -val);  // -F_matno entry times z
    }

    for (auto& [key, rp] : match) {
        rp.first.compress();
        prob.rows.push_back(std::move(rp.first));
        prob.b.push_back(rp.second);
    }
    prob.c.assign(static_cast<size_t>(prob.cones.total()), 0.0);
    for (int i = 0; i < m; ++i) prob.c[static_cast<size_t>(i)] = cvec[static_cast<size_t>(i)];
    return prob;
}

SdpProblem read_sdpa_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    return read_sdpa(f);
}

}  // namespace dtcbf
