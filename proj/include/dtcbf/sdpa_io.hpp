#pragma once

#include <iosfwd>
#include <string>

#include "dtcbf/sdp_problem.hpp"

namespace dtcbf {

// Sparse SDPA (".dat-s") interop for cross-checking against external
// solvers.
//
// The file encodes  min c'z  s.t.  sum_i z_i F_i - F0 >= 0 (block diagonal).
// Our equality-form problem is written through its conic dual
// (max b'y s.t. c - A'y in K), so the optimal value of the exported file is
// the negative of the original problem's optimal value. Free-block rows are
// emitted as paired +/- diagonal blocks.
void write_sdpa(std::ostream& os, const SdpProblem& prob);
void write_sdpa_file(const std::string& path, const SdpProblem& prob);

// Reads an SDPA sparse file back into equality standard form: variables
// z (free) plus one cone variable per block, with entrywise matching rows.
SdpProblem read_sdpa(std::istream& is);
SdpProblem read_sdpa_file(const std::string& path);

}  // namespace dtcbf
