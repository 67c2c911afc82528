#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nplap {

/// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A pointwise check was requested at a point where |Dv| is below threshold.
class DegenerateGradient : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The iterative linear solve did not reach the requested relative residual.
class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration rejected; carries every violation with its key path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations))
    {
    }

    [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v)
    {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

#define NPLAP_REQUIRE(cond, msg)                        \
    do {                                                \
        if (!(cond)) throw ::nplap::InvalidArgument(msg); \
    } while (false)

} // namespace nplap
