#include <cctype>
#include <charconv>
#include <cstdlib>

#include "aosheet/formula.hpp"

namespace aosheet {

FormulaSyntaxError::FormulaSyntaxError(std::size_t offset, std::string message, std::string expected)
    : std::runtime_error("formula syntax error at offset " + std::to_string(offset) + ": " + message +
                         (expected.empty() ? "" : " (expected " + expected + ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

namespace {

enum class Tok {
    Number,
    String,
    Ident,
    QuotedSheet,
    Error,
    LParen,
    RParen,
    Comma,
    Colon,
    Bang,
    Plus,
    Minus,
    Star,
    Slash,
    Amp,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0;
    std::size_t offset = 0;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        Token t;
        t.offset = pos_;
        if (pos_ >= src_.size()) return t;
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            return lex_number(t);
        }
        if (is_ident_start(c)) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
            t.kind = Tok::Ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        if (c == '"') return lex_quoted(t, '"', Tok::String);
        if (c == '\'') return lex_quoted(t, '\'', Tok::QuotedSheet);
        if (c == '#') return lex_error_literal(t);
        ++pos_;
        auto two = [&](char second, Tok yes, Tok no) {
            if (pos_ < src_.size() && src_[pos_] == second) {
                ++pos_;
                t.kind = yes;
            } else {
                t.kind = no;
            }
            return t;
        };
        switch (c) {
            case '(': t.kind = Tok::LParen; return t;
            case ')': t.kind = Tok::RParen; return t;
            case ',': t.kind = Tok::Comma; return t;
            case ':': t.kind = Tok::Colon; return t;
            case '+': t.kind = Tok::Plus; return t;
            case '-': t.kind = Tok::Minus; return t;
            case '*': t.kind = Tok::Star; return t;
            case '/': t.kind = Tok::Slash; return t;
            case '!': t.kind = Tok::Bang; return t;
            case '=': return two('=', Tok::Eq, Tok::Eq);
            case '<':
                if (pos_ < src_.size() && src_[pos_] == '>') {
                    ++pos_;
                    t.kind = Tok::Ne;
                    return t;
                }
                return two('=', Tok::Le, Tok::Lt);
            case '>': return two('=', Tok::Ge, Tok::Gt);
            case '&': return two('&', Tok::AndAnd, Tok::Amp);
            case '|':
                if (pos_ < src_.size() && src_[pos_] == '|') {
                    ++pos_;
                    t.kind = Tok::OrOr;
                    return t;
                }
                throw FormulaSyntaxError(t.offset, "unexpected '|'", "'||'");
            default:
                throw FormulaSyntaxError(t.offset, std::string("unexpected character '") + c + "'", "");
        }
    }

    std::size_t position() const { return pos_; }

private:
    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    Token lex_number(Token& t) {
        std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                digits();
            } else {
                pos_ = save;
            }
        }
        std::string text(src_.substr(start, pos_ - start));
        t.kind = Tok::Number;
        t.number = std::strtod(text.c_str(), nullptr);
        t.text = std::move(text);
        return t;
    }

    Token lex_quoted(Token& t, char quote, Tok kind) {
        ++pos_;
        std::string out;
        while (true) {
            if (pos_ >= src_.size()) {
                throw FormulaSyntaxError(t.offset, "unterminated quoted text", std::string(1, quote));
            }
            char c = src_[pos_++];
            if (c == quote) {
                if (pos_ < src_.size() && src_[pos_] == quote) {
                    out.push_back(quote);
                    ++pos_;
                    continue;
                }
                break;
            }
            out.push_back(c);
        }
        t.kind = kind;
        t.text = std::move(out);
        return t;
    }

    Token lex_error_literal(Token& t) {
        for (auto kind : {ErrorKind::Div0, ErrorKind::Ref, ErrorKind::Name, ErrorKind::Value, ErrorKind::Cycle}) {
            auto text = error_text(kind);
            if (src_.substr(pos_, text.size()) == text) {
                pos_ += text.size();
                t.kind = Tok::Error;
                t.text = std::string(text);
                return t;
            }
        }
        throw FormulaSyntaxError(t.offset, "unknown error literal", "#REF!, #VALUE!, ...");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::optional<BinaryOp> binary_for(Tok t) {
    switch (t) {
        case Tok::Plus: return BinaryOp::Add;
        case Tok::Minus: return BinaryOp::Sub;
        case Tok::Star: return BinaryOp::Mul;
        case Tok::Slash: return BinaryOp::Div;
        case Tok::Amp: return BinaryOp::Concat;
        case Tok::Eq: return BinaryOp::Eq;
        case Tok::Ne: return BinaryOp::Ne;
        case Tok::Lt: return BinaryOp::Lt;
        case Tok::Le: return BinaryOp::Le;
        case Tok::Gt: return BinaryOp::Gt;
        case Tok::Ge: return BinaryOp::Ge;
        case Tok::AndAnd: return BinaryOp::And;
        case Tok::OrOr: return BinaryOp::Or;
        default: return std::nullopt;
    }
}

class Parser {
public:
    explicit Parser(std::string_view body, std::size_t base) : lex_(body), base_(base) { advance(); }

    FormulaAst parse() {
        auto e = expression(0);
        if (cur_.kind != Tok::End) fail("unexpected token after expression", "operator or end of formula");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg, const std::string& expected) const {
        throw FormulaSyntaxError(base_ + cur_.offset, msg, expected);
    }

    void advance() {
        try {
            cur_ = lex_.next();
        } catch (const FormulaSyntaxError& e) {
            throw FormulaSyntaxError(base_ + e.offset(), "invalid token", e.expected());
        }
    }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind) fail("unexpected token", what);
        advance();
    }

    FormulaAst expression(int min_prec) {
        auto lhs = unary();
        while (true) {
            auto op = binary_for(cur_.kind);
            if (!op) break;
            int prec = binary_precedence(*op);
            if (prec < min_prec) break;
            advance();
            auto rhs = expression(prec + 1);
            lhs = make_formula(Binary{*op, lhs, rhs});
        }
        return lhs;
    }

    FormulaAst unary() {
        if (cur_.kind == Tok::Minus) {
            advance();
            auto arg = unary();
            if (auto* n = std::get_if<NumberLit>(&arg->node)) return make_formula(NumberLit{-n->value});
            return make_formula(Unary{UnaryOp::Neg, arg});
        }
        if (cur_.kind == Tok::Bang) {
            advance();
            return make_formula(Unary{UnaryOp::Not, unary()});
        }
        if (cur_.kind == Tok::Plus) {
            advance();
            return unary();
        }
        return primary();
    }

    FormulaAst primary() {
        switch (cur_.kind) {
            case Tok::Number: {
                double v = cur_.number;
                advance();
                return make_formula(NumberLit{v});
            }
            case Tok::String: {
                std::string v = cur_.text;
                advance();
                return make_formula(TextLit{std::move(v)});
            }
            case Tok::Error: {
                ErrorKind kind{};
                parse_error_text(cur_.text, kind);
                advance();
                return make_formula(ErrorLit{kind});
            }
            case Tok::LParen: {
                advance();
                auto e = expression(0);
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::QuotedSheet: {
                std::string sheet = cur_.text;
                advance();
                expect(Tok::Bang, "'!' after sheet name");
                return reference(sheet);
            }
            case Tok::Ident: return identifier();
            case Tok::End: fail("unexpected end of formula", "value, reference or '('");
            default: fail("unexpected token", "value, reference or '('");
        }
    }

    FormulaAst identifier() {
        Token id = cur_;
        advance();
        if (cur_.kind == Tok::LParen) {
            advance();
            std::vector<FormulaAst> args;
            if (cur_.kind != Tok::RParen) {
                args.push_back(expression(0));
                while (cur_.kind == Tok::Comma) {
                    advance();
                    args.push_back(expression(0));
                }
            }
            expect(Tok::RParen, "',' or ')'");
            return make_formula(Call{upper(id.text), std::move(args)});
        }
        if (cur_.kind == Tok::Bang && cur_.offset == id.offset + id.text.size()) {
            advance();
            return reference(id.text);
        }
        std::string up = upper(id.text);
        if (up == "TRUE") return make_formula(BoolLit{true});
        if (up == "FALSE") return make_formula(BoolLit{false});
        return reference_from(std::nullopt, id);
    }

    FormulaAst reference(const std::string& sheet) {
        if (cur_.kind != Tok::Ident) fail("expected cell reference after sheet name", "cell address");
        Token id = cur_;
        advance();
        return reference_from(sheet, id);
    }

    FormulaAst reference_from(std::optional<std::string> sheet, const Token& id) {
        CellPos first;
        if (!try_parse_a1(id.text, first)) {
            throw FormulaSyntaxError(base_ + id.offset, "unknown name '" + id.text + "'",
                                     "cell reference, function call or TRUE/FALSE");
        }
        if (cur_.kind != Tok::Colon) return make_formula(CellRef{std::move(sheet), first});
        advance();
        CellPos last;
        if (cur_.kind != Tok::Ident || !try_parse_a1(cur_.text, last)) fail("malformed range", "cell address after ':'");
        advance();
        return make_formula(RangeRef{std::move(sheet), Rect::normalized(first, last)});
    }

    Lexer lex_;
    Token cur_;
    std::size_t base_;
};

// Printing ------------------------------------------------------------------

constexpr int kAtomPrecedence = 100;
constexpr int kUnaryPrecedence = 50;

int node_precedence(const FormulaNode& n) {
    if (auto* b = std::get_if<Binary>(&n.node)) return binary_precedence(b->op);
    if (std::holds_alternative<Unary>(n.node)) return kUnaryPrecedence;
    if (auto* num = std::get_if<NumberLit>(&n.node); num && num->value < 0) return kUnaryPrecedence;
    return kAtomPrecedence;
}

bool plain_sheet_name(std::string_view s) {
    if (s.empty() || !is_ident_start(s.front())) return false;
    for (char c : s) {
        if (!is_ident_char(c)) return false;
    }
    std::string up = upper(std::string(s));
    return up != "TRUE" && up != "FALSE";
}

void print_node(const FormulaNode& n, std::string& out);

void print_child(const FormulaAst& child, bool parens, std::string& out) {
    if (parens) out += '(';
    print_node(*child, out);
    if (parens) out += ')';
}

void print_node(const FormulaNode& n, std::string& out) {
    struct Visitor {
        std::string& out;
        void operator()(const NumberLit& v) { out += format_number(v.value); }
        void operator()(const TextLit& v) {
            out += '"';
            for (char c : v.value) {
                if (c == '"') out += '"';
                out += c;
            }
            out += '"';
        }
        void operator()(const BoolLit& v) { out += v.value ? "TRUE" : "FALSE"; }
        void operator()(const ErrorLit& v) { out += error_text(v.kind); }
        void operator()(const CellRef& v) {
            if (v.sheet) out += format_sheet_prefix(*v.sheet);
            out += format_a1(v.pos);
        }
        void operator()(const RangeRef& v) {
            if (v.sheet) out += format_sheet_prefix(*v.sheet);
            out += format_a1(v.rect.first) + ":" + format_a1(v.rect.last);
        }
        void operator()(const Call& v) {
            out += v.name;
            out += '(';
            for (std::size_t i = 0; i < v.args.size(); ++i) {
                if (i) out += ',';
                print_node(*v.args[i], out);
            }
            out += ')';
        }
        void operator()(const Binary& v) {
            int prec = binary_precedence(v.op);
            print_child(v.lhs, node_precedence(*v.lhs) < prec, out);
            out += binary_op_text(v.op);
            print_child(v.rhs, node_precedence(*v.rhs) <= prec, out);
        }
        void operator()(const Unary& v) {
            out += v.op == UnaryOp::Neg ? "-" : "!";
            print_child(v.arg, node_precedence(*v.arg) < kUnaryPrecedence, out);
        }
    };
    std::visit(Visitor{out}, n.node);
}

}  // namespace

int binary_precedence(BinaryOp op) {
    switch (op) {
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Eq:
        case BinaryOp::Ne:
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge: return 3;
        case BinaryOp::Concat: return 4;
        case BinaryOp::Add:
        case BinaryOp::Sub: return 5;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 6;
    }
    return 0;
}

std::string_view binary_op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Concat: return "&";
        case BinaryOp::Eq: return "=";
        case BinaryOp::Ne: return "<>";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::And: return "&&";
        case BinaryOp::Or: return "||";
    }
    return "?";
}

std::string format_sheet_prefix(std::string_view sheet) {
    if (plain_sheet_name(sheet)) return std::string(sheet) + "!";
    std::string out = "'";
    for (char c : sheet) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'!";
}

FormulaAst parse_formula(std::string_view text) {
    std::size_t lead = 0;
    while (lead < text.size() && std::isspace(static_cast<unsigned char>(text[lead]))) ++lead;
    if (lead >= text.size() || text[lead] != '=') {
        throw FormulaSyntaxError(lead, "formula must begin with '='", "'='");
    }
    Parser p(text.substr(lead + 1), lead + 1);
    return p.parse();
}

std::string print_formula(const FormulaAst& ast) {
    std::string out = "=";
    print_node(*ast, out);
    return out;
}

}  // namespace aosheet
