#include "dtcbf/poly_text.hpp"

#include <cctype>
#include <cstdlib>

#include "dtcbf/errors.hpp"
#include "dtcbf/variables.hpp"

namespace dtcbf {

namespace {

struct Cursor {
    const std::string& s;
    size_t i = 0;

    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool done() {
        skip_ws();
        return i >= s.size();
    }
    char peek() {
        skip_ws();
        return i < s.size() ? s[i] : '\0';
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("polynomial syntax: " + msg + " in \"" + s + "\"", 0,
                         static_cast<int>(i) + 1);
    }
};

bool parse_number(Cursor& c, double* out) {
    c.skip_ws();
    const char* begin = c.s.c_str() + c.i;
    if (!std::isdigit(static_cast<unsigned char>(*begin)) && *begin != '.') return false;
    char* end = nullptr;
    *out = std::strtod(begin, &end);
    if (end == begin) return false;
    c.i += static_cast<size_t>(end - begin);
    return true;
}

bool parse_variable(Cursor& c, VarId* out) {
    c.skip_ws();
    if (c.i >= c.s.size()) return false;
    char head = c.s[c.i];
    if (head != 'x' && head != 'u') return false;
    size_t j = c.i + 1;
    std::string digits;
    while (j < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[j]))) {
        digits += c.s[j];
        ++j;
    }
    if (digits.empty()) c.fail("variable name must be x<k> or u<k>");
    c.i = j;
    *out = var_id(std::string(1, head) + digits);
    return true;
}

// coeff and/or variable powers joined by '*'
Polynomial parse_term(Cursor& c) {
    double coeff = 1.0;
    bool saw_factor = false;
    std::vector<std::pair<VarId, int>> exps;

    for (;;) {
        double num;
        VarId v;
        if (parse_number(c, &num)) {
            coeff *= num;
            saw_factor = true;
        } else if (parse_variable(c, &v)) {
            int e = 1;
            if (c.peek() == '^') {
                ++c.i;
                double ed;
                if (!parse_number(c, &ed) || ed != static_cast<int>(ed) || ed < 0)
                    c.fail("exponent must be a non-negative integer");
                e = static_cast<int>(ed);
            }
            exps.emplace_back(v, e);
            saw_factor = true;
        } else {
            c.fail("expected a coefficient or variable");
        }
        if (c.peek() == '*') {
            ++c.i;
            continue;
        }
        break;
    }
    if (!saw_factor) c.fail("empty term");
    return Polynomial::monomial(Monomial::from_pairs(std::move(exps)), coeff);
}

}  // namespace

Polynomial parse_polynomial(const std::string& text) {
    Cursor c{text};
    if (c.done()) throw ParseError("polynomial syntax: empty input", 0, 1);
    Polynomial p;
    double sign = 1.0;
    if (c.peek() == '+' || c.peek() == '-') {
        sign = c.peek() == '-' ? -1.0 : 1.0;
        ++c.i;
    }
    for (;;) {
        p += parse_term(c) * sign;
        if (c.done()) break;
        char op = c.peek();
        if (op == '+')
            sign = 1.0;
        else if (op == '-')
            sign = -1.0;
        else
            c.fail("expected '+' or '-' between terms");
        ++c.i;
    }
    p.prune();
    return p;
}

std::string print_polynomial(const Polynomial& p) { return p.str(); }

}  // namespace dtcbf
