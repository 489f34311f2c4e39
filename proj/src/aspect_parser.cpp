#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <regex>

#include "aosheet/aspect.hpp"
#include "aosheet/value.hpp"

namespace aosheet {

AspectSyntaxError::AspectSyntaxError(SourcePos pos, const std::string& message, std::string expected)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message +
                         (expected.empty() ? "" : " (expected " + expected + ")")),
      pos_(pos),
      expected_(std::move(expected)) {}

std::string_view comparator_text(Comparator c) {
    switch (c) {
        case Comparator::Eq: return "=";
        case Comparator::Ne: return "<>";
        case Comparator::Lt: return "<";
        case Comparator::Le: return "<=";
        case Comparator::Gt: return ">";
        case Comparator::Ge: return ">=";
    }
    return "=";
}

bool comparator_holds(Comparator c, int ordering) {
    switch (c) {
        case Comparator::Eq: return ordering == 0;
        case Comparator::Ne: return ordering != 0;
        case Comparator::Lt: return ordering < 0;
        case Comparator::Le: return ordering <= 0;
        case Comparator::Gt: return ordering > 0;
        case Comparator::Ge: return ordering >= 0;
    }
    return false;
}

std::string_view position_keyword(AdvicePosition p) {
    switch (p) {
        case AdvicePosition::Left: return "left";
        case AdvicePosition::Above: return "above";
        case AdvicePosition::Right: return "right";
        case AdvicePosition::Below: return "below";
        case AdvicePosition::Around: return "around";
        case AdvicePosition::Before: return "before";
        case AdvicePosition::After: return "after";
    }
    return "around";
}

const Pointcut* AspectDef::find_pointcut(std::string_view wanted) const {
    for (const auto& pc : pointcuts) {
        if (pc.name == wanted) return &pc;
    }
    return nullptr;
}

bool Template::has_interpolation() const {
    return std::any_of(segments.begin(), segments.end(),
                       [](const Segment& s) { return std::holds_alternative<Expr>(s.part); });
}

std::string Template::source() const {
    std::string out;
    for (const auto& s : segments) {
        if (auto* lit = std::get_if<std::string>(&s.part)) {
            out += *lit;
        } else {
            out += "#{" + print_expr(std::get<Expr>(s.part)) + "}";
        }
    }
    return out;
}

namespace {

class Source {
public:
    explicit Source(std::string_view text) : text_(text) {
        line_starts_.push_back(0);
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '\n') line_starts_.push_back(i + 1);
        }
    }

    std::string_view text() const { return text_; }

    SourcePos at(std::size_t offset) const {
        auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
        std::size_t line = static_cast<std::size_t>(it - line_starts_.begin());
        return {line, offset - line_starts_[line - 1] + 1};
    }

private:
    std::string_view text_;
    std::vector<std::size_t> line_starts_;
};

enum class T {
    Ident,
    String,
    Number,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Dot,
    Colon,
    Semi,
    Star,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Question,
    Minus,
    End,
};

struct Token {
    T kind = T::End;
    std::string text;
    double number = 0;
    std::size_t offset = 0;
    std::size_t end = 0;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case T::End: return "end of input";
        case T::String: return "string \"" + t.text + "\"";
        case T::Ident:
        case T::Number: return "'" + t.text + "'";
        default: return "'" + t.text + "'";
    }
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
public:
    Lexer(const Source& src, std::size_t begin, std::size_t end) : src_(src), pos_(begin), end_(end) {}

    [[noreturn]] void fail(std::size_t offset, const std::string& msg, const std::string& expected = {}) const {
        throw AspectSyntaxError(src_.at(offset), msg, expected);
    }

    Token next() {
        skip();
        Token t;
        t.offset = pos_;
        if (pos_ >= end_) {
            t.end = pos_;
            return t;
        }
        std::string_view s = src_.text();
        char c = s[pos_];
        if (ident_start(c)) {
            std::size_t start = pos_;
            while (pos_ < end_ && ident_char(s[pos_])) ++pos_;
            t.kind = T::Ident;
            t.text = std::string(s.substr(start, pos_ - start));
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < end_ && std::isdigit(static_cast<unsigned char>(s[pos_]))) ++pos_;
            if (pos_ + 1 < end_ && s[pos_] == '.' && std::isdigit(static_cast<unsigned char>(s[pos_ + 1]))) {
                ++pos_;
                while (pos_ < end_ && std::isdigit(static_cast<unsigned char>(s[pos_]))) ++pos_;
            }
            t.kind = T::Number;
            t.text = std::string(s.substr(start, pos_ - start));
            t.number = std::strtod(t.text.c_str(), nullptr);
        } else if (c == '"') {
            t.kind = T::String;
            t.text = read_string();
        } else {
            ++pos_;
            auto follow = [&](char n) {
                if (pos_ < end_ && s[pos_] == n) {
                    ++pos_;
                    return true;
                }
                return false;
            };
            switch (c) {
                case '{': t.kind = T::LBrace; break;
                case '}': t.kind = T::RBrace; break;
                case '[': t.kind = T::LBracket; break;
                case ']': t.kind = T::RBracket; break;
                case '(': t.kind = T::LParen; break;
                case ')': t.kind = T::RParen; break;
                case '.': t.kind = T::Dot; break;
                case ':': t.kind = T::Colon; break;
                case ';': t.kind = T::Semi; break;
                case '*': t.kind = T::Star; break;
                case '?': t.kind = T::Question; break;
                case '-': t.kind = T::Minus; break;
                case '!': t.kind = T::Bang; break;
                case '=':
                    follow('=');
                    t.kind = T::Eq;
                    break;
                case '<':
                    if (follow('>')) {
                        t.kind = T::Ne;
                    } else {
                        t.kind = follow('=') ? T::Le : T::Lt;
                    }
                    break;
                case '>': t.kind = follow('=') ? T::Ge : T::Gt; break;
                case '&':
                    if (!follow('&')) fail(t.offset, "unexpected '&'", "'&&'");
                    t.kind = T::AndAnd;
                    break;
                case '|':
                    if (!follow('|')) fail(t.offset, "unexpected '|'", "'||'");
                    t.kind = T::OrOr;
                    break;
                default: fail(t.offset, std::string("unexpected character '") + c + "'");
            }
            t.text = std::string(s.substr(t.offset, pos_ - t.offset));
        }
        t.end = pos_;
        return t;
    }

    std::size_t position() const { return pos_; }
    void reset(std::size_t pos) { pos_ = pos; }

private:
    void skip() {
        std::string_view s = src_.text();
        while (pos_ < end_) {
            if (std::isspace(static_cast<unsigned char>(s[pos_]))) {
                ++pos_;
            } else if (s[pos_] == '/' && pos_ + 1 < end_ && s[pos_ + 1] == '/') {
                while (pos_ < end_ && s[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string read_string() {
        std::string_view s = src_.text();
        std::size_t open = pos_++;
        std::string out;
        while (true) {
            if (pos_ >= end_) fail(open, "unterminated string", "'\"'");
            char c = s[pos_++];
            if (c == '"') return out;
            if (c == '\\' && pos_ < end_) {
                char e = s[pos_++];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default: out += e;
                }
                continue;
            }
            out += c;
        }
    }

    const Source& src_;
    std::size_t pos_;
    std::size_t end_;
};

bool is_variable(std::string_view name) {
    return name == "sheet" || name == "worksheet" || name == "range" || name == "column" || name == "row" ||
           name == "cell";
}

std::optional<AdvicePosition> position_from(std::string_view word) {
    for (auto p : {AdvicePosition::Left, AdvicePosition::Above, AdvicePosition::Right, AdvicePosition::Below,
                   AdvicePosition::Around, AdvicePosition::Before, AdvicePosition::After}) {
        if (word == position_keyword(p)) return p;
    }
    return std::nullopt;
}

std::optional<Comparator> comparator_from(T kind) {
    switch (kind) {
        case T::Eq: return Comparator::Eq;
        case T::Ne: return Comparator::Ne;
        case T::Lt: return Comparator::Lt;
        case T::Le: return Comparator::Le;
        case T::Gt: return Comparator::Gt;
        case T::Ge: return Comparator::Ge;
        default: return std::nullopt;
    }
}

// Scans a `#{ ... }` starting right after the `#{`; returns the offset of the closing brace.
std::size_t scan_interpolation(const Source& src, std::size_t pos, std::size_t end, std::size_t open) {
    std::string_view s = src.text();
    int depth = 1;
    while (pos < end) {
        char c = s[pos];
        if (c == '"') {
            ++pos;
            while (pos < end && s[pos] != '"') {
                if (s[pos] == '\\') ++pos;
                ++pos;
            }
            if (pos >= end) break;
            ++pos;
            continue;
        }
        if (c == '{') ++depth;
        if (c == '}' && --depth == 0) return pos;
        ++pos;
    }
    throw AspectSyntaxError(src.at(open), "unterminated interpolation", "'}'");
}

// Scans an advice body starting right after its `{`; returns the offset of the matching `}`.
std::size_t scan_body(const Source& src, std::size_t pos, std::size_t open) {
    std::string_view s = src.text();
    std::size_t end = s.size();
    int depth = 1;
    while (pos < end) {
        char c = s[pos];
        if (c == '#' && pos + 1 < end && s[pos + 1] == '{') {
            pos = scan_interpolation(src, pos + 2, end, pos) + 1;
            continue;
        }
        if (c == '"') {
            std::size_t q = pos++;
            while (pos < end && s[pos] != '"') {
                if (s[pos] == '#' && pos + 1 < end && s[pos + 1] == '{') {
                    pos = scan_interpolation(src, pos + 2, end, pos) + 1;
                    continue;
                }
                if (s[pos] == '\\') ++pos;
                ++pos;
            }
            if (pos >= end) throw AspectSyntaxError(src.at(q), "unterminated string in advice body", "'\"'");
            ++pos;
            continue;
        }
        if (c == '{') ++depth;
        if (c == '}' && --depth == 0) return pos;
        ++pos;
    }
    throw AspectSyntaxError(src.at(open), "unterminated advice body", "'}'");
}

class ExprParser {
public:
    ExprParser(const Source& src, std::size_t begin, std::size_t end, bool allow_ternary)
        : lex_(src, begin, end), allow_ternary_(allow_ternary) {
        advance();
    }

    Expr parse_all() {
        Expr e = ternary();
        if (cur_.kind != T::End) lex_.fail(cur_.offset, "unexpected " + describe(cur_), "operator or end of expression");
        return e;
    }

private:
    void advance() { cur_ = lex_.next(); }

    Expr ternary() {
        Expr cond = logic_or();
        if (cur_.kind != T::Question) return cond;
        if (!allow_ternary_) lex_.fail(cur_.offset, "conditional '?:' is only allowed inside #{...}");
        advance();
        Expr a = ternary();
        if (cur_.kind != T::Colon) lex_.fail(cur_.offset, "unexpected " + describe(cur_), "':'");
        advance();
        Expr b = ternary();
        return make_expr(ExprTernary{cond, a, b});
    }

    Expr logic_or() {
        Expr lhs = logic_and();
        while (cur_.kind == T::OrOr) {
            advance();
            lhs = make_expr(ExprLogic{false, lhs, logic_and()});
        }
        return lhs;
    }

    Expr logic_and() {
        Expr lhs = comparison();
        while (cur_.kind == T::AndAnd) {
            advance();
            lhs = make_expr(ExprLogic{true, lhs, comparison()});
        }
        return lhs;
    }

    Expr comparison() {
        Expr lhs = unary();
        while (auto cmp = comparator_from(cur_.kind)) {
            advance();
            lhs = make_expr(ExprCompare{*cmp, lhs, unary()});
        }
        return lhs;
    }

    Expr unary() {
        if (cur_.kind == T::Bang) {
            advance();
            return make_expr(ExprNot{unary()});
        }
        return primary();
    }

    int integer_index() {
        if (cur_.kind != T::Number || cur_.text.find('.') != std::string::npos) {
            lex_.fail(cur_.offset, "unexpected " + describe(cur_), "integer index");
        }
        int v = std::atoi(cur_.text.c_str());
        advance();
        return v;
    }

    Expr primary() {
        switch (cur_.kind) {
            case T::Number: {
                double v = cur_.number;
                advance();
                return make_expr(ExprNumber{v});
            }
            case T::Minus: {
                advance();
                if (cur_.kind != T::Number) lex_.fail(cur_.offset, "unexpected " + describe(cur_), "number after '-'");
                double v = -cur_.number;
                advance();
                return make_expr(ExprNumber{v});
            }
            case T::String: {
                std::string v = cur_.text;
                advance();
                return make_expr(ExprText{std::move(v)});
            }
            case T::LParen: {
                advance();
                Expr e = ternary();
                if (cur_.kind != T::RParen) lex_.fail(cur_.offset, "unexpected " + describe(cur_), "')'");
                advance();
                return e;
            }
            case T::Ident: return identifier();
            default: lex_.fail(cur_.offset, "unexpected " + describe(cur_), "attribute path, literal or '('");
        }
    }

    Expr identifier() {
        Token id = cur_;
        advance();
        if (id.text == "true" || id.text == "false") return make_expr(ExprBool{id.text == "true"});
        CellPos pos;
        if (!is_variable(id.text) && try_parse_a1(id.text, pos)) {
            // A range is written without spaces, so `c ? E4 : A2` stays a conditional.
            if (cur_.kind != T::Colon || cur_.offset != id.end) return make_expr(ExprCellRef{pos});
            advance();
            CellPos last;
            if (cur_.kind != T::Ident || !try_parse_a1(cur_.text, last)) {
                lex_.fail(cur_.offset, "unexpected " + describe(cur_), "cell address after ':'");
            }
            advance();
            return make_expr(ExprRangeRef{Rect::normalized(pos, last)});
        }
        ExprPath path;
        path.steps.push_back({id.text == "worksheet" ? "sheet" : id.text, std::nullopt});
        while (true) {
            if (cur_.kind == T::LBracket) {
                advance();
                path.steps.back().index = integer_index();
                if (cur_.kind != T::RBracket) lex_.fail(cur_.offset, "unexpected " + describe(cur_), "']'");
                advance();
                continue;
            }
            if (cur_.kind == T::Dot) {
                advance();
                if (cur_.kind != T::Ident) lex_.fail(cur_.offset, "unexpected " + describe(cur_), "attribute name");
                path.steps.push_back({cur_.text, std::nullopt});
                advance();
                continue;
            }
            break;
        }
        return make_expr(std::move(path));
    }

    Lexer lex_;
    Token cur_;
    bool allow_ternary_;
};

// Template from raw text in [begin, end). `escaped` decodes \" and \\ in literal parts
// (cell-list strings); top-level bodies keep literal text verbatim.
Template build_template(const Source& src, std::size_t begin, std::size_t end, bool escaped) {
    std::string_view s = src.text();
    Template t;
    std::string literal;
    auto flush = [&] {
        if (!literal.empty()) t.segments.push_back({std::move(literal)});
        literal.clear();
    };
    std::size_t pos = begin;
    while (pos < end) {
        char c = s[pos];
        if (c == '#' && pos + 1 < end && s[pos + 1] == '{') {
            std::size_t close = scan_interpolation(src, pos + 2, end, pos);
            flush();
            ExprParser p(src, pos + 2, close, true);
            t.segments.push_back({p.parse_all()});
            pos = close + 1;
            continue;
        }
        if (escaped && c == '\\' && pos + 1 < end) {
            char e = s[pos + 1];
            literal += e == 'n' ? '\n' : (e == 't' ? '\t' : e);
            pos += 2;
            continue;
        }
        literal += c;
        ++pos;
    }
    flush();
    return t;
}

class AspectParser {
public:
    explicit AspectParser(std::string_view text) : src_(text), lex_(src_, 0, text.size()) { advance(); }

    AspectDef parse() {
        AspectDef def;
        expect_keyword("aspect");
        if (cur_.kind == T::Ident || cur_.kind == T::String) {
            def.name = cur_.text;
            advance();
        } else {
            fail_here("aspect name");
        }
        while (true) {
            if (cur_.kind == T::End) lex_.fail(cur_.offset, "missing 'end' of aspect", "'end'");
            if (cur_.kind != T::Ident) fail_here("pointcut, advice or 'end'");
            if (cur_.text == "end") {
                std::size_t end_offset = cur_.offset;
                advance();
                if (cur_.kind != T::End) fail_here("end of input after 'end'");
                if (def.pointcuts.empty()) {
                    lex_.fail(end_offset, "an aspect needs at least one pointcut", "'<name> : select ...'");
                }
                if (def.advice.empty()) lex_.fail(end_offset, "an aspect needs at least one advice", "advice declaration");
                return def;
            }
            Token first = cur_;
            advance();
            if (cur_.kind == T::Colon) {
                advance();
                if (cur_.kind == T::Ident && cur_.text == "select") {
                    if (!def.advice.empty()) {
                        lex_.fail(first.offset, "pointcut declarations must precede advice");
                    }
                    advance();
                    def.pointcuts.push_back(pointcut(first));
                    continue;
                }
                if (cur_.kind == T::Ident && position_from(cur_.text)) {
                    Token pos_tok = cur_;
                    advance();
                    def.advice.push_back(advice(first.text, pos_tok, first.offset));
                    continue;
                }
                fail_here("'select' or an advice position");
            }
            if (position_from(first.text)) {
                def.advice.push_back(advice(std::nullopt, first, first.offset));
                continue;
            }
            lex_.fail(first.offset, "unexpected " + describe(first), "pointcut, advice or 'end'");
        }
    }

private:
    void advance() { cur_ = lex_.next(); }

    [[noreturn]] void fail_here(const std::string& expected) const {
        lex_.fail(cur_.offset, "unexpected " + describe(cur_), expected);
    }

    void expect(T kind, const char* what) {
        if (cur_.kind != kind) fail_here(what);
        advance();
    }

    void expect_keyword(const char* word) {
        if (cur_.kind != T::Ident || cur_.text != word) fail_here(std::string("'") + word + "'");
        advance();
    }

    Comparator comparator() {
        auto c = comparator_from(cur_.kind);
        if (!c) fail_here("comparison operator (=, ==, <>, <, <=, >, >=)");
        advance();
        return *c;
    }

    long integer() {
        if (cur_.kind != T::Number || cur_.text.find('.') != std::string::npos) fail_here("integer");
        long v = std::atol(cur_.text.c_str());
        advance();
        return v;
    }

    std::string string_literal() {
        if (cur_.kind != T::String) fail_here("string");
        std::string v = cur_.text;
        advance();
        return v;
    }

    Pointcut pointcut(const Token& name) {
        Pointcut pc;
        pc.name = name.text;
        pc.pos = src_.at(name.offset);
        if (cur_.kind != T::Ident || (cur_.text != "sheet" && cur_.text != "worksheet")) fail_here("'sheet{...}'");
        advance();
        pc.sheet = sheet_pattern();
        while (cur_.kind == T::Dot) {
            advance();
            if (cur_.kind != T::Ident) fail_here("'range', 'column', 'row' or 'cell'");
            std::string word = cur_.text;
            std::size_t at = cur_.offset;
            advance();
            if (word == "cell") {
                if (pc.cell) lex_.fail(at, "duplicate cell pattern");
                pc.cell = cell_pattern();
            } else if (word == "range" || word == "column" || word == "row") {
                if (pc.range || pc.cell) lex_.fail(at, "range pattern must come right after the sheet pattern");
                RangeKind kind = word == "range" ? RangeKind::Range : (word == "column" ? RangeKind::Column : RangeKind::Row);
                pc.range = range_pattern(kind);
            } else {
                lex_.fail(at, "unknown pattern '" + word + "'", "'range', 'column', 'row' or 'cell'");
            }
        }
        return pc;
    }

    SheetPat sheet_pattern() {
        SheetPat p;
        expect(T::LBrace, "'{'");
        if (cur_.kind == T::Star) {
            advance();
        } else if (cur_.kind == T::Ident && cur_.text == "name") {
            advance();
            p.kind = SheetPat::Kind::Name;
            p.cmp = comparator();
            p.name = string_literal();
        } else if (cur_.kind == T::Ident && cur_.text == "number") {
            advance();
            p.kind = SheetPat::Kind::Number;
            p.cmp = comparator();
            p.number = integer();
        } else {
            fail_here("'*', 'name' or 'number'");
        }
        expect(T::RBrace, "'}'");
        return p;
    }

    RangePat range_pattern(RangeKind kind) {
        RangePat p;
        p.range_kind = kind;
        expect(T::LBrace, "'{'");
        if (cur_.kind == T::Star) {
            advance();
        } else if (cur_.kind == T::Ident && cur_.text == "name") {
            advance();
            p.kind = RangePat::Kind::Name;
            p.cmp = comparator();
            std::size_t at = cur_.offset;
            std::string text = string_literal();
            Rect r;
            if (!try_parse_rect(text, r)) lex_.fail(at, "range name must be a rectangle such as \"A2:C3\"");
            p.name = format_rect(r);
        } else if (cur_.kind == T::Ident && kind == RangeKind::Range && (cur_.text == "row" || cur_.text == "column")) {
            p.range_kind = cur_.text == "row" ? RangeKind::Row : RangeKind::Column;
            advance();
            p.kind = RangePat::Kind::Index;
            p.cmp = comparator();
            p.index = integer();
        } else if (cur_.kind == T::Number && kind != RangeKind::Range) {
            p.kind = RangePat::Kind::Index;
            p.index = integer();
        } else {
            fail_here(kind == RangeKind::Range ? "'*', 'name', 'row' or 'column'" : "'*', 'name' or an index");
        }
        expect(T::RBrace, "'}'");
        return p;
    }

    CellPat cell_pattern() {
        CellPat p;
        expect(T::LBrace, "'{'");
        if (cur_.kind == T::Star) {
            advance();
        } else if (cur_.kind == T::Ident && cur_.text == "name") {
            advance();
            p.kind = CellPat::Kind::Name;
            p.cmp = comparator();
            std::size_t at = cur_.offset;
            std::string text = string_literal();
            CellPos pos;
            if (!try_parse_a1(text, pos)) lex_.fail(at, "cell name must be an address such as \"E4\"");
            p.text = format_a1(pos);
        } else if (cur_.kind == T::Ident && cur_.text == "match") {
            advance();
            p.kind = CellPat::Kind::Match;
            p.cmp = comparator();
            std::size_t at = cur_.offset;
            p.text = string_literal();
            try {
                std::regex check(p.text);
            } catch (const std::regex_error& e) {
                lex_.fail(at, std::string("invalid regular expression: ") + e.what());
            }
        } else {
            fail_here("'*', 'name' or 'match'");
        }
        expect(T::RBrace, "'}'");
        return p;
    }

    Advice advice(std::optional<std::string> name, const Token& position, std::size_t start) {
        Advice a;
        a.name = std::move(name);
        a.position = *position_from(position.text);
        a.pos = src_.at(start);
        if (cur_.kind != T::Ident) fail_here("pointcut name");
        a.pointcut = cur_.text;
        advance();
        if (cur_.kind != T::LBrace) fail_here("'{' starting the advice body");
        std::size_t open = cur_.offset;
        std::size_t close = scan_body(src_, open + 1, open);
        a.body = body(open + 1, close);
        lex_.reset(close + 1);
        advance();
        if (cur_.kind == T::Ident && cur_.text == "when") {
            advance();
            if (cur_.kind != T::LBrace) fail_here("'{' after 'when'");
            std::size_t gopen = cur_.offset;
            std::size_t gclose = scan_body(src_, gopen + 1, gopen);
            ExprParser p(src_, gopen + 1, gclose, false);
            a.guard = p.parse_all();
            lex_.reset(gclose + 1);
            advance();
        }
        return a;
    }

    AdviceBody body(std::size_t begin, std::size_t end) {
        std::string_view s = src_.text();
        while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
        while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
        std::string_view text = s.substr(begin, end - begin);

        if (text.size() > 4 && text.substr(0, 4) == "copy" && std::isspace(static_cast<unsigned char>(text[4]))) {
            std::size_t p = begin + 4;
            while (p < end && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
            if (s[p] == '"') {
                Lexer l(src_, p, end);
                Token t = l.next();
                if (l.next().kind != T::End) lex_.fail(t.end, "unexpected text after copied sheet name");
                return {CopySheet{t.text}};
            }
            return {CopySheet{std::string(s.substr(p, end - p))}};
        }
        if (looks_like_cell_list(text)) return {cell_list(begin, end)};
        return {build_template(src_, begin, end, false)};
    }

    static bool looks_like_cell_list(std::string_view text) {
        std::size_t i = 0;
        while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
        if (i == 0) return false;
        std::size_t digits = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (i == digits) return false;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size() || text[i] != '=') return false;
        ++i;
        if (i < text.size() && text[i] == '=') ++i;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        return i < text.size() && text[i] == '"';
    }

    std::vector<CellListEntry> cell_list(std::size_t begin, std::size_t end) {
        std::string_view s = src_.text();
        std::vector<CellListEntry> entries;
        std::size_t p = begin;
        auto skip_ws = [&] {
            while (p < end && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
        };
        while (true) {
            skip_ws();
            std::size_t ref_start = p;
            while (p < end && std::isalnum(static_cast<unsigned char>(s[p]))) ++p;
            CellPos pos;
            if (!try_parse_a1(s.substr(ref_start, p - ref_start), pos)) {
                lex_.fail(ref_start, "expected a cell reference in cell list", "cell address such as A1");
            }
            skip_ws();
            if (p >= end || s[p] != '=') lex_.fail(p, "expected '=' in cell list", "'='");
            ++p;
            if (p < end && s[p] == '=') ++p;
            skip_ws();
            if (p >= end || s[p] != '"') lex_.fail(p, "expected quoted content in cell list", "'\"'");
            std::size_t q = p++;
            std::size_t content_start = p;
            while (true) {
                if (p >= end) lex_.fail(q, "unterminated string in cell list", "'\"'");
                if (s[p] == '\\') {
                    p += 2;
                    continue;
                }
                if (s[p] == '#' && p + 1 < end && s[p + 1] == '{') {
                    p = scan_interpolation(src_, p + 2, end, p) + 1;
                    continue;
                }
                if (s[p] == '"') break;
                ++p;
            }
            entries.push_back({pos, build_template(src_, content_start, p, true)});
            ++p;
            skip_ws();
            if (p >= end) break;
            if (s[p] != ';') lex_.fail(p, "expected ';' between cell list entries", "';'");
            ++p;
            skip_ws();
            if (p >= end) break;
        }
        return entries;
    }

    Source src_;
    Lexer lex_;
    Token cur_;
};

}  // namespace

AspectDef parse_aspect(std::string_view text) {
    AspectParser p(text);
    return p.parse();
}

Expr parse_expr(std::string_view text, bool allow_ternary) {
    Source src(text);
    ExprParser p(src, 0, text.size(), allow_ternary);
    return p.parse_all();
}

Template parse_template(std::string_view text) {
    Source src(text);
    return build_template(src, 0, text.size(), false);
}

}  // namespace aosheet
