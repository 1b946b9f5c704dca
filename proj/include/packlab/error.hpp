#pragma once

#include <stdexcept>
#include <string>

namespace packlab {

// Broad failure categories; the CLI maps each to a distinct exit status.
enum class ErrorKind {
    invalid_argument,
    parse,
    invariant,
    budget,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) {
        fail(ErrorKind::invalid_argument, what);
    }
}

}  // namespace packlab
