#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "aosheet/aspect.hpp"
#include "aosheet/evaluator.hpp"
#include "aosheet/workbook.hpp"

namespace aosheet {

struct SheetJP {
    int sheet = 0;
    friend bool operator==(const SheetJP&, const SheetJP&) = default;
};

struct RangeJP {
    RangeRect rect;
    friend bool operator==(const RangeJP&, const RangeJP&) = default;
};

struct CellJP {
    CellAddr addr;
    std::optional<RangeRect> enclosing;
    friend bool operator==(const CellJP&, const CellJP&) = default;
};

struct JoinPoint {
    std::variant<SheetJP, RangeJP, CellJP> point;

    int sheet() const;
    /// "Grades", "Grades!B1:B5", "Grades!E3"
    std::string describe(const Workbook& wb) const;

    friend bool operator==(const JoinPoint&, const JoinPoint&) = default;
};

/// Raised when an attribute path cannot be resolved (unbound variable, index out of range).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Variables visible to advice at one join point, over a read-only snapshot.
class BindingEnv {
public:
    BindingEnv(const Workbook& wb, const ValueGrid& grid, int sheet) : wb_(&wb), grid_(&grid), sheet_(sheet) {}

    const Workbook& workbook() const { return *wb_; }
    const ValueGrid& grid() const { return *grid_; }
    int sheet() const { return sheet_; }
    const std::optional<RangeRect>& range() const { return range_; }
    const std::optional<CellAddr>& cell() const { return cell_; }

    void bind_range(RangeRect r) { range_ = r; }
    void bind_cell(CellAddr a) { cell_ = a; }

    /// Contents that `.value` reads instead of the snapshot (output of earlier around advice).
    void set_overrides(const std::map<CellAddr, CellContent>* overrides) { overrides_ = overrides; }
    const CellContent* content_at(const CellAddr& addr) const;

    std::vector<std::string> bound_names() const;

private:
    const Workbook* wb_;
    const ValueGrid* grid_;
    int sheet_;
    std::optional<RangeRect> range_;
    std::optional<CellAddr> cell_;
    const std::map<CellAddr, CellContent>* overrides_ = nullptr;
};

struct Match {
    JoinPoint join_point;
    BindingEnv env;
};

/// Join points of `pc` in enumeration order: sheets ascending, ranges in reading order,
/// cells row-major within each range.
std::vector<Match> enumerate_join_points(const Workbook& wb, const ValueGrid& grid, const Pointcut& pc);

/// Resolves `cell.result`, `column[0].value`, `sheet.number`, ... Throws EvalError.
Value resolve_attribute(const BindingEnv& env, const ExprPath& path);

/// Evaluates a guard or interpolation expression. Value-level failures come back as
/// error values; binding failures throw EvalError.
Value eval_expr(const BindingEnv& env, const Expr& e);

struct GuardResult {
    bool passed = false;
    std::optional<std::string> error;  // set when evaluation failed and the guard was demoted to false
};

/// An absent guard passes. Errors never propagate: they make the guard false.
GuardResult eval_guard(const BindingEnv& env, const std::optional<Expr>& guard);

/// Renders interpolations and reads the result as cell content. Throws EvalError.
CellContent eval_template(const BindingEnv& env, const Template& body);

/// Value as interpolated text: numbers shortest round-trip, booleans true/false.
std::string interpolation_text(const Value& v);

}  // namespace aosheet
