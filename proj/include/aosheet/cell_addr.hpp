#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aosheet {

/// A cell position inside one worksheet, 0-based. Orders row-major.
struct CellPos {
    int col = 0;
    int row = 0;

    friend bool operator==(const CellPos&, const CellPos&) = default;
    friend std::strong_ordering operator<=>(const CellPos& a, const CellPos& b) {
        if (auto c = a.row <=> b.row; c != 0) return c;
        return a.col <=> b.col;
    }
};

/// A cell position bound to a sheet of a workbook.
struct CellAddr {
    int sheet = 0;
    CellPos pos;

    friend bool operator==(const CellAddr&, const CellAddr&) = default;
    friend auto operator<=>(const CellAddr&, const CellAddr&) = default;
};

/// Inclusive rectangle of cells; always normalized so first <= last on both axes.
struct Rect {
    CellPos first;
    CellPos last;

    static Rect normalized(CellPos a, CellPos b);
    static Rect single(CellPos p) { return {p, p}; }

    int width() const { return last.col - first.col + 1; }
    int height() const { return last.row - first.row + 1; }
    bool contains(CellPos p) const {
        return p.col >= first.col && p.col <= last.col && p.row >= first.row && p.row <= last.row;
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

enum class RangeKind { Range, Column, Row };

/// A rectangular range on a specific sheet, tagged with the pattern keyword that produced it.
struct RangeRect {
    int sheet = 0;
    Rect rect;
    RangeKind kind = RangeKind::Range;

    friend bool operator==(const RangeRect&, const RangeRect&) = default;
};

class AddressError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses an A1-style address (case-insensitive). Throws AddressError naming the text.
CellPos parse_a1(std::string_view text);

/// Returns true and fills `out` if `text` is a well-formed A1 address.
bool try_parse_a1(std::string_view text, CellPos& out);

std::string format_a1(CellPos pos);

/// Column letters only: 0 -> "A", 26 -> "AA".
std::string column_letters(int col);

/// Parses "A1:B2" or a single address (1x1). Corners are normalized.
Rect parse_rect(std::string_view text);
bool try_parse_rect(std::string_view text, Rect& out);

/// "B2:D2"; a 1x1 rect formats as a plain address.
std::string format_rect(const Rect& rect);

std::string_view range_kind_keyword(RangeKind kind);

}  // namespace aosheet
