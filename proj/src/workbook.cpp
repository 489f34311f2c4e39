#include "aosheet/workbook.hpp"

#include <algorithm>

#include "aosheet/value.hpp"

namespace aosheet {

std::string content_text(const CellContent& c) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(double d) const { return format_number(d); }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const Formula& f) const { return f.text(); }
    };
    return std::visit(Visitor{}, c.data);
}

Worksheet::Worksheet(std::string name, CellMap cells) : name_(std::move(name)) {
    for (auto& [pos, content] : cells) set(pos, std::move(content));
}

const CellContent* Worksheet::find(CellPos pos) const {
    auto it = cells_.find(pos);
    return it == cells_.end() ? nullptr : &it->second;
}

void Worksheet::set(CellPos pos, CellContent content) {
    if (pos.col < 0 || pos.row < 0) throw WorkbookError("cell position out of range: " + std::to_string(pos.col) + "," + std::to_string(pos.row));
    if (content.is_empty()) {
        cells_.erase(pos);
    } else {
        cells_.insert_or_assign(pos, std::move(content));
    }
}

std::optional<Rect> Worksheet::used_region() const {
    if (cells_.empty()) return std::nullopt;
    Rect r{cells_.begin()->first, cells_.begin()->first};
    for (const auto& [pos, _] : cells_) {
        r.first.col = std::min(r.first.col, pos.col);
        r.first.row = std::min(r.first.row, pos.row);
        r.last.col = std::max(r.last.col, pos.col);
        r.last.row = std::max(r.last.row, pos.row);
    }
    return r;
}

Workbook::Workbook(std::vector<Worksheet> sheets) {
    for (auto& s : sheets) add_sheet(std::move(s));
}

std::optional<int> Workbook::find_sheet(std::string_view name) const {
    for (std::size_t i = 0; i < sheets_.size(); ++i) {
        if (sheets_[i].name() == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

const CellContent* Workbook::find(const CellAddr& addr) const {
    if (addr.sheet < 0 || addr.sheet >= sheet_count()) return nullptr;
    return sheets_[static_cast<std::size_t>(addr.sheet)].find(addr.pos);
}

void Workbook::add_sheet(Worksheet sheet) {
    if (find_sheet(sheet.name())) throw WorkbookError("duplicate sheet name '" + sheet.name() + "'");
    sheets_.push_back(std::move(sheet));
}

void Workbook::set_cell(const CellAddr& addr, CellContent content) {
    if (addr.sheet < 0 || addr.sheet >= sheet_count()) {
        throw WorkbookError("sheet index " + std::to_string(addr.sheet) + " out of range");
    }
    sheets_[static_cast<std::size_t>(addr.sheet)].set(addr.pos, std::move(content));
}

CellPos Shift::apply(CellPos p) const {
    if (direction == ShiftDirection::Right) {
        if (p.row >= band_first && p.row <= band_last && p.col >= threshold) p.col += amount;
    } else {
        if (p.col >= band_first && p.col <= band_last && p.row >= threshold) p.row += amount;
    }
    return p;
}

namespace {

CellContent rewrite_content(const CellContent& c, std::string_view owner, const AddressMap& map) {
    const Formula* f = c.as_formula();
    if (!f) return c;
    auto rewritten = rewrite_references(f->ast(), owner, map);
    if (rewritten == f->ast()) return c;
    return CellContent::formula(std::move(rewritten));
}

// Moves cells on the shifted sheet and rewrites every formula of the workbook.
std::vector<Worksheet> shifted_sheets(const Workbook& wb, const Shift& shift) {
    if (shift.sheet < 0 || shift.sheet >= wb.sheet_count()) {
        throw WorkbookError("sheet index " + std::to_string(shift.sheet) + " out of range");
    }
    const std::string& target = wb.sheet(shift.sheet).name();
    AddressMap map = [&](std::string_view sheet, CellPos p) { return sheet == target ? shift.apply(p) : p; };

    std::vector<Worksheet> out;
    out.reserve(wb.sheets().size());
    for (int i = 0; i < wb.sheet_count(); ++i) {
        const Worksheet& src = wb.sheet(i);
        Worksheet::CellMap cells;
        for (const auto& [pos, content] : src.cells()) {
            CellPos dest = i == shift.sheet ? shift.apply(pos) : pos;
            cells.emplace(dest, rewrite_content(content, src.name(), map));
        }
        out.emplace_back(src.name(), std::move(cells));
    }
    return out;
}

int block_width(const CellGrid& block) {
    std::size_t w = 0;
    for (const auto& row : block) w = std::max(w, row.size());
    return static_cast<int>(w);
}

}  // namespace

Workbook apply_shift(const Workbook& wb, const Shift& shift) { return Workbook(shifted_sheets(wb, shift)); }

Shift block_shift(const CellAddr& at, ShiftDirection direction, int height, int width) {
    Shift shift;
    shift.sheet = at.sheet;
    shift.direction = direction;
    if (direction == ShiftDirection::Right) {
        shift.band_first = at.pos.row;
        shift.band_last = at.pos.row + height - 1;
        shift.threshold = at.pos.col;
        shift.amount = width;
    } else {
        shift.band_first = at.pos.col;
        shift.band_last = at.pos.col + width - 1;
        shift.threshold = at.pos.row;
        shift.amount = height;
    }
    return shift;
}

Workbook insert_block_shift(const Workbook& wb, const CellAddr& at, ShiftDirection direction, const CellGrid& block) {
    int height = static_cast<int>(block.size());
    int width = block_width(block);
    if (height == 0 || width == 0) return wb;

    Shift shift = block_shift(at, direction, height, width);
    auto sheets = shifted_sheets(wb, shift);
    const std::string& target = wb.sheet(at.sheet).name();
    AddressMap map = [&](std::string_view sheet, CellPos p) { return sheet == target ? shift.apply(p) : p; };
    Worksheet& dest = sheets[static_cast<std::size_t>(at.sheet)];
    for (int r = 0; r < height; ++r) {
        const auto& row = block[static_cast<std::size_t>(r)];
        for (int c = 0; c < static_cast<int>(row.size()); ++c) {
            const CellContent& content = row[static_cast<std::size_t>(c)];
            if (content.is_empty()) continue;
            dest.set({at.pos.col + c, at.pos.row + r}, rewrite_content(content, target, map));
        }
    }
    return Workbook(std::move(sheets));
}

Workbook insert_cell_shift(const Workbook& wb, const CellAddr& at, ShiftDirection direction, CellContent content) {
    CellGrid block{{std::move(content)}};
    if (block[0][0].is_empty()) {
        // An empty insertion still opens a gap.
        Shift s{at.sheet, direction, direction == ShiftDirection::Right ? at.pos.row : at.pos.col,
                direction == ShiftDirection::Right ? at.pos.row : at.pos.col,
                direction == ShiftDirection::Right ? at.pos.col : at.pos.row, 1};
        return apply_shift(wb, s);
    }
    return insert_block_shift(wb, at, direction, block);
}

Workbook insert_sheet_at(const Workbook& wb, int index, Worksheet sheet) {
    if (index < 0 || index > wb.sheet_count()) {
        throw WorkbookError("sheet insertion index " + std::to_string(index) + " out of range");
    }
    if (wb.find_sheet(sheet.name())) throw WorkbookError("duplicate sheet name '" + sheet.name() + "'");
    std::vector<Worksheet> sheets = wb.sheets();
    sheets.insert(sheets.begin() + index, std::move(sheet));
    return Workbook(std::move(sheets));
}

Workbook replace_sheet(const Workbook& wb, int index, Worksheet sheet) {
    if (index < 0 || index >= wb.sheet_count()) {
        throw WorkbookError("sheet index " + std::to_string(index) + " out of range");
    }
    auto clash = wb.find_sheet(sheet.name());
    if (clash && *clash != index) throw WorkbookError("duplicate sheet name '" + sheet.name() + "'");
    std::vector<Worksheet> sheets = wb.sheets();
    sheets[static_cast<std::size_t>(index)] = std::move(sheet);
    return Workbook(std::move(sheets));
}

Workbook with_cell(const Workbook& wb, const CellAddr& addr, CellContent content) {
    Workbook out = wb;
    out.set_cell(addr, std::move(content));
    return out;
}

}  // namespace aosheet
