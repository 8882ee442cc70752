#ifndef AVOL_ERRORS_HPP
#define AVOL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace avol {

// Error taxonomy mapped to the CLI exit-code contract:
//   config/domain violations -> 2, resource caps and broken
//   preconditions -> 3, non-finite numerics -> 4.

struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct contract_error : std::runtime_error {
    std::string witness;
    explicit contract_error(const std::string& msg, std::string w = {})
        : std::runtime_error(msg), witness(std::move(w)) {}
};

struct resource_error : std::runtime_error {
    explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numeric_error : std::runtime_error {
    long step_index = -1;
    explicit numeric_error(const std::string& msg, long step = -1)
        : std::runtime_error(msg), step_index(step) {}
};

}  // namespace avol

#endif
