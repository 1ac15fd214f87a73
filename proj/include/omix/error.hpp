#pragma once

#include <stdexcept>
#include <string>

namespace omix {

// All recoverable failures surface as omix::Error with a context-carrying
// message ("what failed: block=..., row=...").
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

}  // namespace omix
