#pragma once

#include <stdexcept>
#include <string>

namespace kergap {

// Thrown when a rank-one update would divide by a vanishing Schur complement.
struct degeneracy_error : std::runtime_error {
    explicit degeneracy_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown by finite data streams once exhausted.
struct end_of_data : std::runtime_error {
    explicit end_of_data(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file content; message carries the 1-based line number.
struct parse_error : std::runtime_error {
    parse_error(const std::string& msg, std::size_t line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};

// Structurally valid file whose declared shape does not match its contents.
struct schema_error : std::runtime_error {
    explicit schema_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation requested on data that cannot support it (e.g. regret without means).
struct unsupported_error : std::runtime_error {
    explicit unsupported_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kergap
