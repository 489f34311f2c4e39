#include "aosheet/wbk.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace aosheet {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

bool unquote(std::string_view text, std::string& out) {
    if (text.size() < 2 || text.front() != '"' || text.back() != '"') return false;
    out.clear();
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
        char c = text[i];
        if (c == '"') return false;
        if (c != '\\') {
            out.push_back(c);
            continue;
        }
        if (i + 2 >= text.size()) return false;
        char e = text[++i];
        switch (e) {
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            default: return false;
        }
    }
    return true;
}

std::string quote(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

bool needs_quotes(std::string_view text) {
    if (text.empty() || trim(text) != text) return true;
    if (text.front() == '=' || text.front() == '"' || text.front() == '#') return true;
    if (iequals(text, "true") || iequals(text, "false")) return true;
    double d;
    if (parse_decimal(text, d)) return true;
    for (char c : text) {
        if (c == '\n' || c == '\r' || c == '\t') return true;
    }
    return false;
}

}  // namespace

bool parse_decimal(std::string_view text, double& out) {
    std::size_t i = 0;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
    std::size_t int_start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    bool int_digits = i > int_start;
    bool frac_digits = false;
    if (i < text.size() && text[i] == '.') {
        ++i;
        std::size_t frac_start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        frac_digits = i > frac_start;
    }
    if (!int_digits && !frac_digits) return false;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
        std::size_t exp_start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (i == exp_start) return false;
    }
    if (i != text.size()) return false;
    std::string s(text);
    double v = std::strtod(s.c_str(), nullptr);
    if (!std::isfinite(v)) return false;
    out = v;
    return true;
}

CellContent parse_cell_content(std::string_view text) {
    if (!text.empty() && text.front() == '=') return CellContent::formula(text);
    if (text == "true") return CellContent::boolean(true);
    if (text == "false") return CellContent::boolean(false);
    double d;
    if (parse_decimal(text, d)) return CellContent::number(d);
    std::string unquoted;
    if (unquote(text, unquoted)) return CellContent::text(std::move(unquoted));
    if (text.empty()) return CellContent::empty();
    return CellContent::text(std::string(text));
}

std::string format_cell_content(const CellContent& content) {
    if (auto* s = std::get_if<std::string>(&content.data)) return needs_quotes(*s) ? quote(*s) : *s;
    return content_text(content);
}

Workbook load_workbook(std::string_view text) {
    Workbook wb;
    int current = -1;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') {
            if (end == text.size()) break;
            continue;
        }
        if (line.substr(0, 5) == "sheet" && line.size() > 5 && std::isspace(static_cast<unsigned char>(line[5]))) {
            std::string name(trim(line.substr(5)));
            if (wb.find_sheet(name)) throw WbkError(line_no, "duplicate sheet name '" + name + "'");
            wb.add_sheet(Worksheet(name));
            current = wb.sheet_count() - 1;
        } else {
            auto colon = line.find(':');
            if (colon == std::string_view::npos) throw WbkError(line_no, "expected '<address>: <content>' or 'sheet <name>'");
            if (current < 0) throw WbkError(line_no, "cell line before any 'sheet' line");
            std::string_view addr_text = trim(line.substr(0, colon));
            CellPos pos;
            if (!try_parse_a1(addr_text, pos)) {
                throw WbkError(line_no, "malformed cell address '" + std::string(addr_text) + "'");
            }
            const std::string& sheet_name = wb.sheet(current).name();
            if (wb.sheet(current).find(pos)) {
                throw WbkError(line_no, "duplicate cell " + format_a1(pos) + " in sheet '" + sheet_name + "'");
            }
            std::string_view content_src = trim(line.substr(colon + 1));
            CellContent content;
            try {
                content = parse_cell_content(content_src);
            } catch (const FormulaSyntaxError& e) {
                throw WbkError(line_no, "sheet '" + sheet_name + "' cell " + format_a1(pos) + ": formula syntax error at position " +
                                            std::to_string(e.offset()) + ": " + e.what());
            }
            if (content.is_empty()) throw WbkError(line_no, "missing content for cell " + format_a1(pos));
            wb.set_cell({current, pos}, std::move(content));
        }
        if (end == text.size()) break;
    }
    return wb;
}

std::string save_workbook(const Workbook& wb) {
    std::ostringstream out;
    bool first = true;
    for (const auto& sheet : wb.sheets()) {
        if (!first) out << '\n';
        first = false;
        out << "sheet " << sheet.name() << '\n';
        for (const auto& [pos, content] : sheet.cells()) {
            out << format_a1(pos) << ": " << format_cell_content(content) << '\n';
        }
    }
    return out.str();
}

}  // namespace aosheet
