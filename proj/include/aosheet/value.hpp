#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace aosheet {

enum class ErrorKind { Div0, Ref, Name, Value, Cycle };

struct ErrorValue {
    ErrorKind kind = ErrorKind::Value;
    friend bool operator==(const ErrorValue&, const ErrorValue&) = default;
};

/// Result of evaluating a formula or reading a literal cell.
using Value = std::variant<double, std::string, bool, ErrorValue>;

inline bool is_number(const Value& v) { return std::holds_alternative<double>(v); }
inline bool is_text(const Value& v) { return std::holds_alternative<std::string>(v); }
inline bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }
inline bool is_error(const Value& v) { return std::holds_alternative<ErrorValue>(v); }

/// Ordering of two values of the same type (numbers by value, text bytewise, false < true).
/// Mixed types, or errors, have no ordering.
std::optional<int> order_values(const Value& a, const Value& b);

/// "#DIV/0!", "#REF!", "#NAME?", "#VALUE!", "#CYCLE!"
std::string_view error_text(ErrorKind kind);
bool parse_error_text(std::string_view text, ErrorKind& out);

/// Shortest round-trip decimal text; integral values print without a decimal point.
std::string format_number(double value);

/// Display text with 15 significant digits, the way spreadsheet grids show values.
std::string display_number(double value);

/// Text used for display grids: numbers via display_number, booleans TRUE/FALSE, errors by code.
std::string display_value(const Value& v);

}  // namespace aosheet
