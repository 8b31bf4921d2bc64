#pragma once

#include <string>

#include "dtcbf/plant.hpp"

namespace dtcbf {

// Parsed problem specification: plant, input polytope, safe set and the
// synthesis configuration with defaults applied.
struct ProblemSpec {
    PlantModel plant;
    InputPolytope input;
    SafeSet safe;
    SynthesisConfig config;
};

// TOML-structured text: [section] headers, key = value lines, values are
// numbers, "strings", booleans or (nested) arrays; '#' starts a comment.
// Polynomial-valued fields use the polynomial term grammar.
ProblemSpec parse_spec(const std::string& path);
ProblemSpec parse_spec_text(const std::string& text, const std::string& origin = "<memory>");

// Canonical re-print; parse(print(spec)) reproduces an identical model.
std::string print_spec(const ProblemSpec& spec);

}  // namespace dtcbf
