#include "aosheet/cell_addr.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace aosheet {

namespace {

// Keeps column/row arithmetic well inside int range.
constexpr int kMaxColumnLetters = 6;
constexpr long long kMaxRow = std::numeric_limits<int>::max() / 2;

}  // namespace

Rect Rect::normalized(CellPos a, CellPos b) {
    return {{std::min(a.col, b.col), std::min(a.row, b.row)},
            {std::max(a.col, b.col), std::max(a.row, b.row)}};
}

bool try_parse_a1(std::string_view text, CellPos& out) {
    std::size_t i = 0;
    long long col = 0;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
        if (i >= kMaxColumnLetters) return false;
        col = col * 26 + (std::toupper(static_cast<unsigned char>(text[i])) - 'A' + 1);
        ++i;
    }
    if (i == 0 || i == text.size()) return false;
    if (text[i] < '1' || text[i] > '9') return false;
    long long row = 0;
    for (; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
        row = row * 10 + (text[i] - '0');
        if (row > kMaxRow) return false;
    }
    out = {static_cast<int>(col - 1), static_cast<int>(row - 1)};
    return true;
}

CellPos parse_a1(std::string_view text) {
    CellPos pos;
    if (!try_parse_a1(text, pos)) {
        throw AddressError("malformed cell address '" + std::string(text) + "'");
    }
    return pos;
}

std::string column_letters(int col) {
    std::string letters;
    for (int c = col; c >= 0; c = c / 26 - 1) {
        letters.insert(letters.begin(), static_cast<char>('A' + c % 26));
    }
    return letters;
}

std::string format_a1(CellPos pos) {
    return column_letters(pos.col) + std::to_string(pos.row + 1);
}

bool try_parse_rect(std::string_view text, Rect& out) {
    auto colon = text.find(':');
    CellPos a;
    if (colon == std::string_view::npos) {
        if (!try_parse_a1(text, a)) return false;
        out = Rect::single(a);
        return true;
    }
    CellPos b;
    if (!try_parse_a1(text.substr(0, colon), a) || !try_parse_a1(text.substr(colon + 1), b)) {
        return false;
    }
    out = Rect::normalized(a, b);
    return true;
}

Rect parse_rect(std::string_view text) {
    Rect r;
    if (!try_parse_rect(text, r)) {
        throw AddressError("malformed range '" + std::string(text) + "'");
    }
    return r;
}

std::string format_rect(const Rect& rect) {
    if (rect.first == rect.last) return format_a1(rect.first);
    return format_a1(rect.first) + ":" + format_a1(rect.last);
}

std::string_view range_kind_keyword(RangeKind kind) {
    switch (kind) {
        case RangeKind::Range: return "range";
        case RangeKind::Column: return "column";
        case RangeKind::Row: return "row";
    }
    return "range";
}

}  // namespace aosheet
