#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "aosheet/aspect.hpp"
#include "aosheet/evaluator.hpp"
#include "aosheet/matcher.hpp"
#include "aosheet/workbook.hpp"

namespace aosheet {

enum class Side { Left, Above, Right, Below };

std::string_view side_keyword(Side s);

// Sheet indexes and addresses in actions refer to the snapshot the plan was built from.

struct ReplaceCell {
    CellAddr addr;
    CellContent content;
};

struct InsertCell {
    CellAddr addr;
    Side side = Side::Right;
    CellContent content;
};

struct InsertRangeBlock {
    RangeRect anchor;
    Side side = Side::Right;
    CellGrid grid;  // padded to the anchor's height (left/right) or width (above/below)
};

struct InsertSheet {
    int anchor = 0;
    bool after = false;
    Worksheet sheet;  // name is a request; apply_plan makes it unique
};

struct ReplaceSheet {
    int index = 0;
    Worksheet sheet;
};

struct ActionOrigin {
    std::string aspect;
    std::size_t advice = 0;  // 0-based declaration ordinal
    JoinPoint join_point;
    std::string where;  // join point as text, e.g. "Grades!E3"
};

struct WeaveAction {
    using Variant = std::variant<ReplaceCell, InsertCell, InsertRangeBlock, InsertSheet, ReplaceSheet>;
    Variant action;
    ActionOrigin origin;
};

struct AdviceReport {
    std::size_t ordinal = 0;
    std::optional<std::string> name;
    AdvicePosition position = AdvicePosition::Around;
    std::string pointcut;
    std::size_t matches = 0;
    std::size_t passed = 0;
    std::size_t skipped = 0;       // guard evaluated to false
    std::size_t guard_errors = 0;  // guard failed to evaluate; counted as not applied
    std::size_t applied = 0;       // actions emitted
    std::size_t identity_elided = 0;
    std::vector<std::string> errors;  // "Grades!A1: ..." for each guard error
};

struct AspectReport {
    std::string name;
    std::vector<AdviceReport> advice;
};

struct WeaveReport {
    std::vector<AspectReport> aspects;

    std::string to_text() const;
    nlohmann::json to_json() const;
};

struct WeavePlan {
    std::vector<WeaveAction> actions;
    AspectReport report;
};

/// Planning or application failure, with the aspect/advice/join point it came from.
class WeaveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matches every advice of `aspect` against the snapshot (wb, grid). Throws WeaveError.
WeavePlan plan_aspect(const Workbook& wb, const ValueGrid& grid, const AspectDef& aspect);

/// Applies a plan built from `wb`. Returns a new workbook.
Workbook apply_plan(const Workbook& wb, const WeavePlan& plan);

struct WeaveResult {
    Workbook workbook;
    ValueGrid values;
    WeaveReport report;
};

/// Weaves aspects one after another, each matching the previous one's output.
WeaveResult weave(const Workbook& wb, const std::vector<AspectDef>& aspects);

}  // namespace aosheet
