#pragma once

#include <stdexcept>
#include <string>

namespace canlift {

// Data/contract errors. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

} // namespace canlift
