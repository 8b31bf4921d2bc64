#pragma once

#include <string>
#include <vector>

namespace dtcbf {

// Variable vector layout: [free | nonneg | svec(PSD_1) | svec(PSD_2) | ...].
// svec packs the upper triangle column-major with off-diagonal entries
// scaled by sqrt(2), so Euclidean inner products equal trace inner products.
struct ConeLayout {
    int n_free = 0;
    int n_nonneg = 0;
    std::vector<int> psd_sizes;

    static int tri(int s) { return s * (s + 1) / 2; }

    int psd_offset(size_t k) const {
        int off = n_free + n_nonneg;
        for (size_t i = 0; i < k; ++i) off += tri(psd_sizes[i]);
        return off;
    }
    int total() const {
        int t = n_free + n_nonneg;
        for (int s : psd_sizes) t += tri(s);
        return t;
    }
    // svec index of entry (i,j), i<=j, within a block of size s.
    static int svec_index(int i, int j) { return j * (j + 1) / 2 + i; }
};

struct SparseRow {
    std::vector<std::pair<int, double>> entries;  // sorted by column

    void add(int col, double v) {
        if (v != 0.0) entries.emplace_back(col, v);
    }
    void compress();
};

// min c'x  s.t.  A x = b,  x in (free x nonneg x PSD...).
struct SdpProblem {
    ConeLayout cones;
    std::vector<SparseRow> rows;
    std::vector<double> b;
    std::vector<double> c;

    int num_rows() const { return static_cast<int>(rows.size()); }

    struct PresolveReport {
        int removed_duplicates = 0;
        int removed_zero_rows = 0;
        bool trivially_infeasible = false;
        std::vector<std::string> warnings;
    };
    // Drops exact duplicate rows and zero rows; detects 0 = b contradictions.
    PresolveReport presolve();

    // Layout fingerprint used by determinism tests.
    std::string layout_signature() const;
};

}  // namespace dtcbf
