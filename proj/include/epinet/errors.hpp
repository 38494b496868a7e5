#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace epinet {

// Bad argument to a library call (negative rate, count too large, ...).
class invalid_argument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input file. line() is 1-based; 0 when not tied to a line.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), message_(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    /// The message without the line prefix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::size_t line_;
};

// Aggregated semantic errors; carries every problem found, not just the first.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string out;
        for (const auto& e : errors) {
            if (!out.empty()) out += "; ";
            out += e;
        }
        return out;
    }
    std::vector<std::string> errors_;
};

class non_realizable_sequence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class degenerate_network : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class infeasible_policy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace epinet
