#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mbstat {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Violated mathematical precondition (empty series, zero weight mass, ...).
struct DomainError : Error {
    using Error::Error;
};

// Bad user-supplied configuration (window size, unknown policy/format, ...).
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// Malformed input row. `line` and `column` are 1-based.
struct ParseError : Error {
    ParseError(std::size_t line_, std::size_t column_, const std::string& reason_)
        : Error("parse error at line " + std::to_string(line_) + ", column " +
                std::to_string(column_) + ": " + reason_),
          line(line_), column(column_), reason(reason_) {}

    std::size_t line;
    std::size_t column;
    std::string reason;
};

// Events out of time order.
struct OrderingError : Error {
    explicit OrderingError(std::size_t line_, const std::string& what_ = "events out of time order")
        : Error(what_ + " (line " + std::to_string(line_) + ")"), line(line_) {}

    std::size_t line;
};

// Sale volume exceeds the investor's remaining lot inventory.
struct InsufficientInventory : Error {
    InsufficientInventory(const std::string& investor_, double requested_, double available_)
        : Error("insufficient inventory for investor '" + investor_ + "': requested " +
                std::to_string(requested_) + ", available " + std::to_string(available_)),
          investor(investor_), requested(requested_), available(available_) {}

    std::string investor;
    double requested;
    double available;

    double shortfall() const { return requested - available; }
};

// No trade exists at or before the requested past timestamp.
struct MissingPastPrice : Error {
    explicit MissingPastPrice(double timestamp_)
        : Error("no trade at or before time " + std::to_string(timestamp_)),
          timestamp(timestamp_) {}

    double timestamp;
};

}  // namespace mbstat
