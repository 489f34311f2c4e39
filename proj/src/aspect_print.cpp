#include <cctype>

#include "aosheet/aspect.hpp"
#include "aosheet/value.hpp"

namespace aosheet {

namespace {

constexpr int kTernary = 0;
constexpr int kOr = 1;
constexpr int kAnd = 2;
constexpr int kCompare = 3;
constexpr int kNot = 4;
constexpr int kAtom = 5;

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
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

int precedence(const ExprNode& n) {
    if (std::holds_alternative<ExprTernary>(n.node)) return kTernary;
    if (auto* l = std::get_if<ExprLogic>(&n.node)) return l->is_and ? kAnd : kOr;
    if (std::holds_alternative<ExprCompare>(n.node)) return kCompare;
    if (std::holds_alternative<ExprNot>(n.node)) return kNot;
    return kAtom;
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool parens, std::string& out) {
    if (parens) out += '(';
    print(e, out);
    if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
    struct Visitor {
        std::string& out;
        void operator()(const ExprPath& p) {
            for (std::size_t i = 0; i < p.steps.size(); ++i) {
                if (i) out += '.';
                out += p.steps[i].name;
                if (p.steps[i].index) out += "[" + std::to_string(*p.steps[i].index) + "]";
            }
        }
        void operator()(const ExprNumber& n) { out += format_number(n.value); }
        void operator()(const ExprText& t) { out += quote(t.value); }
        void operator()(const ExprBool& b) { out += b.value ? "true" : "false"; }
        void operator()(const ExprCellRef& c) { out += format_a1(c.pos); }
        void operator()(const ExprRangeRef& r) { out += format_a1(r.rect.first) + ":" + format_a1(r.rect.last); }
        void operator()(const ExprCompare& c) {
            print_wrapped(c.lhs, precedence(*c.lhs) < kCompare, out);
            out += ' ';
            out += comparator_text(c.cmp);
            out += ' ';
            print_wrapped(c.rhs, precedence(*c.rhs) <= kCompare, out);
        }
        void operator()(const ExprLogic& l) {
            int own = l.is_and ? kAnd : kOr;
            print_wrapped(l.lhs, precedence(*l.lhs) < own, out);
            out += l.is_and ? " && " : " || ";
            print_wrapped(l.rhs, precedence(*l.rhs) <= own, out);
        }
        void operator()(const ExprNot& n) {
            out += '!';
            print_wrapped(n.arg, precedence(*n.arg) < kNot, out);
        }
        void operator()(const ExprTernary& t) {
            print_wrapped(t.cond, precedence(*t.cond) <= kTernary, out);
            out += " ? ";
            print(t.then_branch, out);
            out += " : ";
            print(t.else_branch, out);
        }
    };
    std::visit(Visitor{out}, e->node);
}

std::string cell_list_string(const Template& t) {
    std::string out = "\"";
    for (const auto& s : t.segments) {
        if (auto* lit = std::get_if<std::string>(&s.part)) {
            std::string q = quote(*lit);
            out += q.substr(1, q.size() - 2);
        } else {
            out += "#{" + print_expr(std::get<Expr>(s.part)) + "}";
        }
    }
    return out + "\"";
}

bool plain_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    }
    return true;
}

std::string pointcut_text(const Pointcut& pc) {
    std::string out = "sheet{";
    switch (pc.sheet.kind) {
        case SheetPat::Kind::Any: out += "*"; break;
        case SheetPat::Kind::Name:
            out += "name " + std::string(comparator_text(pc.sheet.cmp)) + " " + quote(pc.sheet.name);
            break;
        case SheetPat::Kind::Number:
            out += "number " + std::string(comparator_text(pc.sheet.cmp)) + " " + std::to_string(pc.sheet.number);
            break;
    }
    out += "}";
    if (pc.range) {
        const RangePat& r = *pc.range;
        out += ".";
        if (r.kind == RangePat::Kind::Index) {
            out += "range{" + std::string(range_kind_keyword(r.range_kind)) + " " +
                   std::string(comparator_text(r.cmp)) + " " + std::to_string(r.index) + "}";
        } else {
            out += std::string(range_kind_keyword(r.range_kind)) + "{";
            out += r.kind == RangePat::Kind::Any ? "*"
                                                 : "name " + std::string(comparator_text(r.cmp)) + " " + quote(r.name);
            out += "}";
        }
    }
    if (pc.cell) {
        out += ".cell{";
        switch (pc.cell->kind) {
            case CellPat::Kind::Any: out += "*"; break;
            case CellPat::Kind::Name:
                out += "name " + std::string(comparator_text(pc.cell->cmp)) + " " + quote(pc.cell->text);
                break;
            case CellPat::Kind::Match:
                out += "match " + std::string(comparator_text(pc.cell->cmp)) + " " + quote(pc.cell->text);
                break;
        }
        out += "}";
    }
    return out;
}

}  // namespace

std::string print_expr(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

std::string print_aspect(const AspectDef& aspect) {
    std::string out = "aspect " + (plain_identifier(aspect.name) ? aspect.name : quote(aspect.name)) + "\n";
    for (const auto& pc : aspect.pointcuts) {
        out += pc.name + " : select " + pointcut_text(pc) + "\n";
    }
    for (const auto& a : aspect.advice) {
        out += "\n";
        if (a.name) out += *a.name + " : ";
        out += std::string(position_keyword(a.position)) + " " + a.pointcut + " {\n    ";
        if (auto* t = std::get_if<Template>(&a.body.body)) {
            out += t->source();
        } else if (auto* list = std::get_if<std::vector<CellListEntry>>(&a.body.body)) {
            for (std::size_t i = 0; i < list->size(); ++i) {
                if (i) out += ";\n    ";
                out += format_a1((*list)[i].pos) + " = " + cell_list_string((*list)[i].content);
            }
        } else {
            out += "copy " + quote(std::get<CopySheet>(a.body.body).sheet);
        }
        out += "\n}";
        if (a.guard) out += " when {\n    " + print_expr(*a.guard) + "\n}";
        out += "\n";
    }
    out += "end\n";
    return out;
}

}  // namespace aosheet
