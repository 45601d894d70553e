#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

/// Thrown when an operation is called outside its documented domain.
class precondition_error : public std::invalid_argument {
public:
    explicit precondition_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown by the sweep harness when a plan exceeds the configured work budget.
class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

/// I/O failures carry the offending path in the message.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw precondition_error(message);
}

}  // namespace detail
}  // namespace qwalk
