#pragma once

#include <stdexcept>
#include <string>

namespace exptype {

// domain: precondition or region violations (bad input for the math).
// numeric: the computation ran but failed (divergence, overflow, NaN).
// config: invalid tuning parameters (node counts, tolerances).
// parse: malformed serialized input.
enum class ErrorKind { domain, numeric, config, parse };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    // Module-qualified identifier, e.g. "borel_polya.near_pole".
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] inline void throw_domain(std::string code, const std::string& msg) {
    throw Error(ErrorKind::domain, std::move(code), msg);
}
[[noreturn]] inline void throw_numeric(std::string code, const std::string& msg) {
    throw Error(ErrorKind::numeric, std::move(code), msg);
}
[[noreturn]] inline void throw_parse(std::string code, const std::string& msg) {
    throw Error(ErrorKind::parse, std::move(code), msg);
}
[[noreturn]] inline void throw_config(std::string code, const std::string& msg) {
    throw Error(ErrorKind::config, std::move(code), msg);
}

}  // namespace exptype
