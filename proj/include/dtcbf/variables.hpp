#pragma once

#include <string>
#include <vector>

namespace dtcbf {

// Polynomial variables are interned process-wide so that state variables,
// control inputs, shifted inputs and any auxiliary variables share one id
// space and one deterministic ordering.
using VarId = int;

VarId var_id(const std::string& name);
const std::string& var_name(VarId id);
bool var_exists(const std::string& name);

// Convenience for the canonical grids: x1..xn and u1..um.
std::vector<VarId> state_vars(int n);
std::vector<VarId> input_vars(int m);

}  // namespace dtcbf
