#include "aosheet/value.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace aosheet {

std::string_view error_text(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Div0: return "#DIV/0!";
        case ErrorKind::Ref: return "#REF!";
        case ErrorKind::Name: return "#NAME?";
        case ErrorKind::Value: return "#VALUE!";
        case ErrorKind::Cycle: return "#CYCLE!";
    }
    return "#VALUE!";
}

bool parse_error_text(std::string_view text, ErrorKind& out) {
    for (auto kind : {ErrorKind::Div0, ErrorKind::Ref, ErrorKind::Name, ErrorKind::Value, ErrorKind::Cycle}) {
        if (text == error_text(kind)) {
            out = kind;
            return true;
        }
    }
    return false;
}

std::optional<int> order_values(const Value& a, const Value& b) {
    if (a.index() != b.index()) return std::nullopt;
    if (auto* x = std::get_if<double>(&a)) {
        double y = std::get<double>(b);
        return *x < y ? -1 : (*x > y ? 1 : 0);
    }
    if (auto* s = std::get_if<std::string>(&a)) {
        int c = s->compare(std::get<std::string>(b));
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    if (auto* p = std::get_if<bool>(&a)) {
        bool y = std::get<bool>(b);
        return *p == y ? 0 : (*p ? 1 : -1);
    }
    return std::nullopt;
}

std::string format_number(double value) {
    if (value == 0) return "0";  // folds -0
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return "0";
    return std::string(buf.data(), end);
}

std::string display_number(double value) {
    if (value == 0) return "0";
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.15g", value);
    return buf.data();
}

std::string display_value(const Value& v) {
    struct Visitor {
        std::string operator()(double d) const { return display_number(d); }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(bool b) const { return b ? "TRUE" : "FALSE"; }
        std::string operator()(ErrorValue e) const { return std::string(error_text(e.kind)); }
    };
    return std::visit(Visitor{}, v);
}

}  // namespace aosheet
