#pragma once

#include <string>

#include "dtcbf/polynomial.hpp"

namespace dtcbf {

// Term grammar: [+|-] [coeff] {*, variable[^exp]}..., terms joined by +/-.
// Variables are x1..xn and u1..um; whitespace is ignored anywhere.
// Examples: "3 - x1^2 - x2^2", "-0.98*x3", "0.333*x1^3 + 2*x2".
Polynomial parse_polynomial(const std::string& text);

// Round-trips through parse_polynomial bit-exactly (coefficients printed
// with 17 significant digits).
std::string print_polynomial(const Polynomial& p);

}  // namespace dtcbf
