#pragma once

#include <stdexcept>
#include <string>

namespace flpl {

// Precondition or internal invariant broken by the caller.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Malformed dataset file (bad magic, truncation, misaligned records).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or other numeric breakdown at run time.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Aggregation asked to average an empty model set.
class DegenerateAggregation : public NumericError {
public:
    explicit DegenerateAggregation(const std::string& what) : NumericError(what) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

} // namespace detail
} // namespace flpl
