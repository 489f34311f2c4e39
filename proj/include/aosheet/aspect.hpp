#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aosheet/box.hpp"
#include "aosheet/cell_addr.hpp"

namespace aosheet {

// ===========================================================================
// Aspect language syntax tree
//
//   aspect BorderlineCase
//   finalmark : select sheet{*}.column{*}.cell{*}
//   around finalmark {
//       #{cell.result >= 4.8 && cell.result < 5 ? 5 : cell.value}
//     } when {
//       cell.column[0].value = "Final Mark"
//     }
//   end
// ===========================================================================

struct SourcePos {
    std::size_t line = 1;
    std::size_t column = 1;
};

enum class Comparator { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view comparator_text(Comparator c);

/// Applies a comparator to an ordering result (<0, 0, >0).
bool comparator_holds(Comparator c, int ordering);

// --- expressions used by `when` guards and `#{...}` interpolations ---------

struct ExprNode;
using Expr = Box<ExprNode>;

/// One step of an attribute path: `column[0]` is {"column", 0}.
struct PathStep {
    std::string name;
    std::optional<int> index;
    friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// `cell.column[0].value`. The first step names the variable; `worksheet` is stored as `sheet`.
struct ExprPath {
    std::vector<PathStep> steps;
    friend bool operator==(const ExprPath&, const ExprPath&) = default;
};

struct ExprNumber {
    double value = 0;
    friend bool operator==(const ExprNumber&, const ExprNumber&) = default;
};

struct ExprText {
    std::string value;
    friend bool operator==(const ExprText&, const ExprText&) = default;
};

struct ExprBool {
    bool value = false;
    friend bool operator==(const ExprBool&, const ExprBool&) = default;
};

/// Bare cell reference such as `E4`: the evaluated result of that cell on the join point's sheet.
struct ExprCellRef {
    CellPos pos;
    friend bool operator==(const ExprCellRef&, const ExprCellRef&) = default;
};

/// Bare range reference such as `A2:C3`: evaluates to its canonical name text.
struct ExprRangeRef {
    Rect rect;
    friend bool operator==(const ExprRangeRef&, const ExprRangeRef&) = default;
};

struct ExprCompare {
    Comparator cmp;
    Expr lhs;
    Expr rhs;
    friend bool operator==(const ExprCompare&, const ExprCompare&) = default;
};

struct ExprLogic {
    bool is_and;
    Expr lhs;
    Expr rhs;
    friend bool operator==(const ExprLogic&, const ExprLogic&) = default;
};

struct ExprNot {
    Expr arg;
    friend bool operator==(const ExprNot&, const ExprNot&) = default;
};

struct ExprTernary {
    Expr cond;
    Expr then_branch;
    Expr else_branch;
    friend bool operator==(const ExprTernary&, const ExprTernary&) = default;
};

struct ExprNode {
    std::variant<ExprPath, ExprNumber, ExprText, ExprBool, ExprCellRef, ExprRangeRef, ExprCompare, ExprLogic,
                 ExprNot, ExprTernary>
        node;
    friend bool operator==(const ExprNode&, const ExprNode&) = default;
};

template <class T>
Expr make_expr(T node) {
    return Expr(ExprNode{std::move(node)});
}

std::string print_expr(const Expr& e);

// --- pointcuts ---------------------------------------------------------------

struct SheetPat {
    enum class Kind { Any, Name, Number };
    Kind kind = Kind::Any;
    Comparator cmp = Comparator::Eq;
    std::string name;
    long number = 0;  // 1-based sheet position
    friend bool operator==(const SheetPat&, const SheetPat&) = default;
};

struct RangePat {
    enum class Kind { Any, Name, Index };
    RangeKind range_kind = RangeKind::Range;
    Kind kind = Kind::Any;
    Comparator cmp = Comparator::Eq;
    std::string name;  // canonical rectangle text
    long index = 0;    // 1-based used row/column
    friend bool operator==(const RangePat&, const RangePat&) = default;
};

struct CellPat {
    enum class Kind { Any, Name, Match };
    Kind kind = Kind::Any;
    Comparator cmp = Comparator::Eq;
    std::string text;  // canonical address, or regular expression for Match
    friend bool operator==(const CellPat&, const CellPat&) = default;
};

enum class TargetKind { Sheet, Range, Cell };

struct Pointcut {
    std::string name;
    SheetPat sheet;
    std::optional<RangePat> range;
    std::optional<CellPat> cell;
    SourcePos pos;

    TargetKind target() const {
        if (cell) return TargetKind::Cell;
        if (range) return TargetKind::Range;
        return TargetKind::Sheet;
    }

    friend bool operator==(const Pointcut& a, const Pointcut& b) {
        return a.name == b.name && a.sheet == b.sheet && a.range == b.range && a.cell == b.cell;
    }
};

// --- advice ----------------------------------------------------------------

enum class AdvicePosition { Left, Above, Right, Below, Around, Before, After };

std::string_view position_keyword(AdvicePosition p);

/// Content with `#{...}` interpolations. Literal segments hold decoded text.
struct Template {
    struct Segment {
        std::variant<std::string, Expr> part;
        friend bool operator==(const Segment&, const Segment&) = default;
    };
    std::vector<Segment> segments;

    bool has_interpolation() const;
    /// Literal text with interpolations printed as `#{expr}`.
    std::string source() const;

    friend bool operator==(const Template&, const Template&) = default;
};

/// `A1 = "..."; B1 = "..."`. Addresses are relative to the insertion origin.
struct CellListEntry {
    CellPos pos;
    Template content;
    friend bool operator==(const CellListEntry&, const CellListEntry&) = default;
};

struct CopySheet {
    std::string sheet;
    friend bool operator==(const CopySheet&, const CopySheet&) = default;
};

struct AdviceBody {
    std::variant<Template, std::vector<CellListEntry>, CopySheet> body;
    friend bool operator==(const AdviceBody&, const AdviceBody&) = default;
};

struct Advice {
    std::optional<std::string> name;
    AdvicePosition position = AdvicePosition::Around;
    std::string pointcut;
    AdviceBody body;
    std::optional<Expr> guard;
    SourcePos pos;

    friend bool operator==(const Advice& a, const Advice& b) {
        return a.name == b.name && a.position == b.position && a.pointcut == b.pointcut && a.body == b.body &&
               a.guard == b.guard;
    }
};

struct AspectDef {
    std::string name;
    std::vector<Pointcut> pointcuts;
    std::vector<Advice> advice;

    const Pointcut* find_pointcut(std::string_view name) const;

    friend bool operator==(const AspectDef&, const AspectDef&) = default;
};

// --- parsing, printing, validation -------------------------------------------

class AspectSyntaxError : public std::runtime_error {
public:
    AspectSyntaxError(SourcePos pos, const std::string& message, std::string expected = {});
    SourcePos pos() const { return pos_; }
    const std::string& expected() const { return expected_; }

private:
    SourcePos pos_;
    std::string expected_;
};

AspectDef parse_aspect(std::string_view text);

/// Parses a standalone expression. `allow_ternary` selects interpolation vs guard syntax.
Expr parse_expr(std::string_view text, bool allow_ternary);

/// Parses the inside of a body or cell-list string into a template.
Template parse_template(std::string_view text);

std::string print_aspect(const AspectDef& aspect);

struct Diagnostic {
    std::string message;
    SourcePos pos;
};

std::vector<Diagnostic> validate(const AspectDef& aspect);

/// Variables a pointcut binds: always `sheet`; the range keyword and `range` with a range
/// pattern; `cell` with a cell pattern.
std::vector<std::string> bound_variables(const Pointcut& pc);

/// Static check of an attribute path against a binding set; returns an error message.
std::optional<std::string> check_path(const ExprPath& path, const std::vector<std::string>& bound);

}  // namespace aosheet
