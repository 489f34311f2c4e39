#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "aosheet/workbook.hpp"

namespace aosheet {

/// Load failure in WBK text, with the 1-based line it occurred on.
class WbkError : public std::runtime_error {
public:
    WbkError(std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Parses a WBK workbook:
///
///     sheet Grades
///     A1: Name
///     B2: 5.2
///     E2: =AVERAGE(B2:D2)
///     A6: "5.2"        # quoted: text that would otherwise read as a number
///
/// Blank lines and lines starting with '#' are ignored.
Workbook load_workbook(std::string_view text);

/// Deterministic serialization: sheets in order, cells row-major.
std::string save_workbook(const Workbook& wb);

/// WBK content rules: leading '=' is a formula, true/false booleans, decimal literal number,
/// "..." escaped text, anything else bare text. Throws FormulaSyntaxError for bad formulas.
CellContent parse_cell_content(std::string_view text);

/// Inverse of parse_cell_content; quotes text that would not round-trip bare.
std::string format_cell_content(const CellContent& content);

/// Strict decimal literal check used by the content rules.
bool parse_decimal(std::string_view text, double& out);

}  // namespace aosheet
