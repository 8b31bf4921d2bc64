#include "dtcbf/variables.hpp"

#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace dtcbf {

namespace {

struct Interner {
    std::mutex mu;
    std::unordered_map<std::string, VarId> by_name;
    std::vector<std::string> names;
};

Interner& interner() {
    static Interner it;
    return it;
}

}  // namespace

VarId var_id(const std::string& name) {
    auto& it = interner();
    std::lock_guard<std::mutex> lock(it.mu);
    auto found = it.by_name.find(name);
    if (found != it.by_name.end()) return found->second;
    VarId id = static_cast<VarId>(it.names.size());
    it.names.push_back(name);
    it.by_name.emplace(name, id);
    return id;
}

const std::string& var_name(VarId id) {
    auto& it = interner();
    std::lock_guard<std::mutex> lock(it.mu);
    if (id < 0 || id >= static_cast<VarId>(it.names.size()))
        throw std::out_of_range("unknown variable id " + std::to_string(id));
    return it.names[static_cast<size_t>(id)];
}

bool var_exists(const std::string& name) {
    auto& it = interner();
    std::lock_guard<std::mutex> lock(it.mu);
    return it.by_name.count(name) > 0;
}

std::vector<VarId> state_vars(int n) {
    std::vector<VarId> ids;
    ids.reserve(static_cast<size_t>(n));
    for (int i = 1; i <= n; ++i) ids.push_back(var_id("x" + std::to_string(i)));
    return ids;
}

std::vector<VarId> input_vars(int m) {
    std::vector<VarId> ids;
    ids.reserve(static_cast<size_t>(m));
    for (int i = 1; i <= m; ++i) ids.push_back(var_id("u" + std::to_string(i)));
    return ids;
}

}  // namespace dtcbf
