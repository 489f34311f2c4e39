#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aosheet/cell_addr.hpp"
#include "aosheet/formula.hpp"

namespace aosheet {

/// A formula cell: canonical source text plus its parsed tree.
class Formula {
public:
    explicit Formula(FormulaAst ast) : ast_(std::move(ast)), text_(print_formula(ast_)) {}
    static Formula parse(std::string_view text) { return Formula(parse_formula(text)); }

    const FormulaAst& ast() const { return ast_; }
    const std::string& text() const { return text_; }

    friend bool operator==(const Formula& a, const Formula& b) { return a.text_ == b.text_; }

private:
    FormulaAst ast_;
    std::string text_;
};

struct CellContent {
    std::variant<std::monostate, double, std::string, bool, Formula> data;

    static CellContent empty() { return {}; }
    static CellContent number(double v) { return {v}; }
    static CellContent text(std::string v) { return {std::move(v)}; }
    static CellContent boolean(bool v) { return {v}; }
    static CellContent formula(std::string_view source) { return {Formula::parse(source)}; }
    static CellContent formula(FormulaAst ast) { return {Formula(std::move(ast))}; }

    bool is_empty() const { return std::holds_alternative<std::monostate>(data); }
    const Formula* as_formula() const { return std::get_if<Formula>(&data); }

    friend bool operator==(const CellContent&, const CellContent&) = default;
};

/// Content as shown to `match` patterns and `cell.value`: formulas include '='.
std::string content_text(const CellContent& c);

class WorkbookError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Worksheet {
public:
    using CellMap = std::map<CellPos, CellContent>;

    Worksheet() = default;
    explicit Worksheet(std::string name) : name_(std::move(name)) {}
    Worksheet(std::string name, CellMap cells);

    const std::string& name() const { return name_; }
    void rename(std::string name) { name_ = std::move(name); }

    const CellMap& cells() const { return cells_; }
    const CellContent* find(CellPos pos) const;

    /// Storing an empty content erases the cell.
    void set(CellPos pos, CellContent content);

    /// Bounding rectangle of stored cells, if any.
    std::optional<Rect> used_region() const;

    friend bool operator==(const Worksheet&, const Worksheet&) = default;

private:
    std::string name_;
    CellMap cells_;
};

class Workbook {
public:
    Workbook() = default;
    explicit Workbook(std::vector<Worksheet> sheets);

    const std::vector<Worksheet>& sheets() const { return sheets_; }
    int sheet_count() const { return static_cast<int>(sheets_.size()); }
    const Worksheet& sheet(int index) const { return sheets_.at(static_cast<std::size_t>(index)); }
    std::optional<int> find_sheet(std::string_view name) const;

    const CellContent* find(const CellAddr& addr) const;

    /// Appends a sheet; throws WorkbookError on a duplicate name.
    void add_sheet(Worksheet sheet);
    void set_cell(const CellAddr& addr, CellContent content);

    friend bool operator==(const Workbook&, const Workbook&) = default;

private:
    std::vector<Worksheet> sheets_;
};

enum class ShiftDirection { Right, Down };

/// Row-local (Right) or column-local (Down) displacement of stored cells.
/// Cells whose cross-axis coordinate lies in [band_first, band_last] and whose
/// axis coordinate is >= threshold move by `amount`.
struct Shift {
    int sheet = 0;
    ShiftDirection direction = ShiftDirection::Right;
    int band_first = 0;
    int band_last = 0;
    int threshold = 0;
    int amount = 1;

    CellPos apply(CellPos p) const;
};

/// The shift that inserting a height x width block at `at` performs.
Shift block_shift(const CellAddr& at, ShiftDirection direction, int height, int width);

/// Rows of a rectangular block of contents; row-major, all rows the same width.
using CellGrid = std::vector<std::vector<CellContent>>;

/// Inserts `content` at `at`, pushing cells at/after it in the row (Right) or column (Down).
/// Every formula in the workbook is rewritten to follow moved cells.
Workbook insert_cell_shift(const Workbook& wb, const CellAddr& at, ShiftDirection direction, CellContent content);

/// Block version of insert_cell_shift: the band is the block's height (Right) or width (Down).
/// Formulas inside `block` are interpreted in pre-insertion coordinates and rewritten with the rest.
Workbook insert_block_shift(const Workbook& wb, const CellAddr& at, ShiftDirection direction, const CellGrid& block);

/// Applies a shift without inserting anything, rewriting references. Useful for composing edits.
Workbook apply_shift(const Workbook& wb, const Shift& shift);

Workbook insert_sheet_at(const Workbook& wb, int index, Worksheet sheet);
Workbook replace_sheet(const Workbook& wb, int index, Worksheet sheet);

/// Copy of `wb` with one cell replaced (empty content erases).
Workbook with_cell(const Workbook& wb, const CellAddr& addr, CellContent content);

}  // namespace aosheet
