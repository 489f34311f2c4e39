#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aosheet/box.hpp"
#include "aosheet/cell_addr.hpp"
#include "aosheet/value.hpp"

namespace aosheet {

// ---------------------------------------------------------------------------
// Formula syntax tree
// ---------------------------------------------------------------------------

struct FormulaNode;
using FormulaAst = Box<FormulaNode>;

struct NumberLit {
    double value = 0;
    friend bool operator==(const NumberLit&, const NumberLit&) = default;
};

struct TextLit {
    std::string value;
    friend bool operator==(const TextLit&, const TextLit&) = default;
};

struct BoolLit {
    bool value = false;
    friend bool operator==(const BoolLit&, const BoolLit&) = default;
};

/// Literal error such as #REF!, produced when a reference is severed by a rewrite.
struct ErrorLit {
    ErrorKind kind = ErrorKind::Ref;
    friend bool operator==(const ErrorLit&, const ErrorLit&) = default;
};

struct CellRef {
    std::optional<std::string> sheet;
    CellPos pos;
    friend bool operator==(const CellRef&, const CellRef&) = default;
};

struct RangeRef {
    std::optional<std::string> sheet;
    Rect rect;
    friend bool operator==(const RangeRef&, const RangeRef&) = default;
};

struct Call {
    std::string name;  // uppercase
    std::vector<FormulaAst> args;
    friend bool operator==(const Call&, const Call&) = default;
};

enum class BinaryOp { Add, Sub, Mul, Div, Concat, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnaryOp { Neg, Not };

struct Binary {
    BinaryOp op;
    FormulaAst lhs;
    FormulaAst rhs;
    friend bool operator==(const Binary&, const Binary&) = default;
};

struct Unary {
    UnaryOp op;
    FormulaAst arg;
    friend bool operator==(const Unary&, const Unary&) = default;
};

struct FormulaNode {
    std::variant<NumberLit, TextLit, BoolLit, ErrorLit, CellRef, RangeRef, Call, Binary, Unary> node;
    friend bool operator==(const FormulaNode&, const FormulaNode&) = default;
};

template <class T>
FormulaAst make_formula(T node) {
    return FormulaAst(FormulaNode{std::move(node)});
}

// ---------------------------------------------------------------------------
// Parsing and printing
// ---------------------------------------------------------------------------

/// Syntax error in formula text. `offset` is a byte offset into the text given to the parser.
class FormulaSyntaxError : public std::runtime_error {
public:
    FormulaSyntaxError(std::size_t offset, std::string message, std::string expected);
    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

/// Parses text that must begin with '='. Whitespace (including newlines) between tokens is ignored.
FormulaAst parse_formula(std::string_view text);

/// Canonical text, always with the leading '='.
std::string print_formula(const FormulaAst& ast);

/// Operator precedence, higher binds tighter.
int binary_precedence(BinaryOp op);
std::string_view binary_op_text(BinaryOp op);

/// Sheet names that need quoting in references ('My Sheet'!A1).
std::string format_sheet_prefix(std::string_view sheet);

// ---------------------------------------------------------------------------
// Reference rewriting
// ---------------------------------------------------------------------------

/// Maps a cell on a named sheet to its new position. Unmapped cells return the input position.
using AddressMap = std::function<CellPos(std::string_view sheet, CellPos pos)>;

/// Maps every reference through `map`. Unqualified references belong to `owner_sheet`.
/// A range whose cells no longer form the rectangle spanned by its mapped corners is
/// replaced by a #REF! literal.
FormulaAst rewrite_references(const FormulaAst& ast, std::string_view owner_sheet, const AddressMap& map);

/// Visits every cell and range reference in the tree.
void for_each_reference(const FormulaAst& ast, const std::function<void(const CellRef&)>& on_cell,
                        const std::function<void(const RangeRef&)>& on_range);

}  // namespace aosheet
