#pragma once

#include <vector>

#include "dtcbf/monomial.hpp"
#include "dtcbf/param_polynomial.hpp"

namespace dtcbf {

// All monomials in `vars` with total degree <= deg, graded-lex ascending.
std::vector<Monomial> monomials_up_to(const std::vector<VarId>& vars, int deg);

// Candidate Gram basis for a scalar SOS constraint: the integer points of
// half the Newton polytope of the support. Falls back to the full degree
// basis when the membership LP misbehaves (pruned=false then).
std::vector<Monomial> sos_basis(const std::vector<Monomial>& support,
                                const std::vector<VarId>& vars, bool* pruned = nullptr);

}  // namespace dtcbf
