#include <algorithm>
#include <set>

#include "aosheet/aspect.hpp"

namespace aosheet {

std::vector<std::string> bound_variables(const Pointcut& pc) {
    std::vector<std::string> vars{"sheet"};
    if (pc.range) {
        vars.emplace_back(range_kind_keyword(pc.range->range_kind));
        if (pc.range->range_kind != RangeKind::Range) vars.emplace_back("range");
    }
    if (pc.cell) vars.emplace_back("cell");
    return vars;
}

namespace {

// What a partial path currently denotes while walking it.
enum class Node { Sheet, Rect, Cell, Scalar };

bool is_cell_scalar_attr(std::string_view a) {
    return a == "name" || a == "value" || a == "result" || a == "row" || a == "column";
}

}  // namespace

std::optional<std::string> check_path(const ExprPath& path, const std::vector<std::string>& bound) {
    if (path.steps.empty()) return "empty attribute path";
    const PathStep& root = path.steps.front();
    if (std::find(bound.begin(), bound.end(), root.name) == bound.end()) {
        if (root.name == "sheet" || root.name == "range" || root.name == "column" || root.name == "row" ||
            root.name == "cell") {
            return "variable '" + root.name + "' is not bound by this pointcut";
        }
        return "unknown variable '" + root.name + "'";
    }
    Node node;
    if (root.name == "sheet") {
        node = Node::Sheet;
    } else if (root.name == "cell") {
        node = Node::Cell;
    } else {
        node = Node::Rect;
    }
    if (root.index) {
        if (node != Node::Rect) return "'" + root.name + "' cannot be indexed";
        node = Node::Cell;
    }
    for (std::size_t i = 1; i < path.steps.size(); ++i) {
        const PathStep& step = path.steps[i];
        switch (node) {
            case Node::Sheet:
                if (step.name != "name" && step.name != "number") {
                    return "unknown worksheet attribute '" + step.name + "'";
                }
                if (step.index) return "worksheet attribute '" + step.name + "' cannot be indexed";
                node = Node::Scalar;
                break;
            case Node::Rect:
                if (step.name != "name") return "unknown range attribute '" + step.name + "'";
                if (step.index) return "range attribute 'name' cannot be indexed";
                node = Node::Scalar;
                break;
            case Node::Cell:
                if (!is_cell_scalar_attr(step.name)) return "unknown cell attribute '" + step.name + "'";
                if (step.index) {
                    if (step.name != "row" && step.name != "column") {
                        return "cell attribute '" + step.name + "' cannot be indexed";
                    }
                    node = Node::Cell;
                } else {
                    node = Node::Scalar;
                }
                break;
            case Node::Scalar: return "attribute '" + step.name + "' applied to a plain value";
        }
    }
    if (node != Node::Scalar) return "attribute path '" + root.name + "...' must end in an attribute such as .name or .value";
    return std::nullopt;
}

namespace {

void check_expr(const Expr& e, const std::vector<std::string>& bound, const SourcePos& pos, const std::string& where,
                std::vector<Diagnostic>& out) {
    const ExprNode& n = *e;
    if (auto* p = std::get_if<ExprPath>(&n.node)) {
        if (auto err = check_path(*p, bound)) out.push_back({where + ": " + *err, pos});
    } else if (auto* c = std::get_if<ExprCompare>(&n.node)) {
        check_expr(c->lhs, bound, pos, where, out);
        check_expr(c->rhs, bound, pos, where, out);
    } else if (auto* l = std::get_if<ExprLogic>(&n.node)) {
        check_expr(l->lhs, bound, pos, where, out);
        check_expr(l->rhs, bound, pos, where, out);
    } else if (auto* no = std::get_if<ExprNot>(&n.node)) {
        check_expr(no->arg, bound, pos, where, out);
    } else if (auto* t = std::get_if<ExprTernary>(&n.node)) {
        check_expr(t->cond, bound, pos, where, out);
        check_expr(t->then_branch, bound, pos, where, out);
        check_expr(t->else_branch, bound, pos, where, out);
    }
}

bool boolean_typed(const Expr& e) {
    const auto& n = e->node;
    return std::holds_alternative<ExprCompare>(n) || std::holds_alternative<ExprLogic>(n) ||
           std::holds_alternative<ExprNot>(n) || std::holds_alternative<ExprBool>(n);
}

void check_template(const Template& t, const std::vector<std::string>& bound, const SourcePos& pos,
                    std::vector<Diagnostic>& out) {
    for (const auto& s : t.segments) {
        if (auto* e = std::get_if<Expr>(&s.part)) check_expr(*e, bound, pos, "interpolation", out);
    }
}

std::string describe_advice(const Advice& a, std::size_t ordinal) {
    std::string d = "advice #" + std::to_string(ordinal + 1);
    if (a.name) d += " '" + *a.name + "'";
    return d + " (" + std::string(position_keyword(a.position)) + " " + a.pointcut + ")";
}

}  // namespace

std::vector<Diagnostic> validate(const AspectDef& aspect) {
    std::vector<Diagnostic> out;
    std::set<std::string> seen;
    for (const auto& pc : aspect.pointcuts) {
        if (!seen.insert(pc.name).second) out.push_back({"duplicate pointcut name '" + pc.name + "'", pc.pos});
        if (pc.range && pc.range->kind == RangePat::Kind::Name && pc.range->cmp == Comparator::Eq) {
            Rect r = parse_rect(pc.range->name);
            if (pc.range->range_kind == RangeKind::Column && r.width() != 1) {
                out.push_back({"pointcut '" + pc.name + "': a column range must be one cell wide", pc.pos});
            }
            if (pc.range->range_kind == RangeKind::Row && r.height() != 1) {
                out.push_back({"pointcut '" + pc.name + "': a row range must be one cell high", pc.pos});
            }
        }
        if (pc.range && pc.range->kind == RangePat::Kind::Index && pc.range->index < 1 &&
            pc.range->cmp == Comparator::Eq) {
            out.push_back({"pointcut '" + pc.name + "': row/column indexes start at 1", pc.pos});
        }
        if (pc.cell && pc.cell->kind == CellPat::Kind::Match && pc.cell->cmp != Comparator::Eq &&
            pc.cell->cmp != Comparator::Ne) {
            out.push_back({"pointcut '" + pc.name + "': match supports only = and <>", pc.pos});
        }
    }

    for (std::size_t i = 0; i < aspect.advice.size(); ++i) {
        const Advice& a = aspect.advice[i];
        std::string who = describe_advice(a, i);
        const Pointcut* pc = aspect.find_pointcut(a.pointcut);
        if (!pc) {
            out.push_back({who + ": unknown pointcut '" + a.pointcut + "'", a.pos});
            continue;
        }
        TargetKind target = pc->target();
        bool sheet_only = a.position == AdvicePosition::Before || a.position == AdvicePosition::After;
        bool planar = a.position == AdvicePosition::Left || a.position == AdvicePosition::Above ||
                      a.position == AdvicePosition::Right || a.position == AdvicePosition::Below;
        if (sheet_only && target != TargetKind::Sheet) {
            out.push_back({who + ": before/after apply only to worksheets", a.pos});
        }
        if (planar && target == TargetKind::Sheet) {
            out.push_back({who + ": left/above/right/below apply only to ranges and cells", a.pos});
        }

        auto bound = bound_variables(*pc);
        const auto& body = a.body.body;
        if (std::holds_alternative<CopySheet>(body) && target != TargetKind::Sheet) {
            out.push_back({who + ": copy applies only to worksheet advice", a.pos});
        }
        if (std::holds_alternative<std::vector<CellListEntry>>(body) && target == TargetKind::Cell) {
            out.push_back({who + ": cell advice takes a single content, not a cell list", a.pos});
        }
        if (std::holds_alternative<Template>(body) && target == TargetKind::Sheet) {
            out.push_back({who + ": worksheet advice needs a cell list or a copy directive", a.pos});
        }
        if (auto* t = std::get_if<Template>(&body)) check_template(*t, bound, a.pos, out);
        if (auto* list = std::get_if<std::vector<CellListEntry>>(&body)) {
            std::set<CellPos> cells;
            for (const auto& entry : *list) {
                if (!cells.insert(entry.pos).second) {
                    out.push_back({who + ": cell " + format_a1(entry.pos) + " listed twice", a.pos});
                }
                check_template(entry.content, bound, a.pos, out);
            }
        }
        if (a.guard) {
            if (!boolean_typed(*a.guard)) out.push_back({who + ": when clause must be a boolean expression", a.pos});
            check_expr(*a.guard, bound, a.pos, "when clause", out);
        }
    }
    return out;
}

}  // namespace aosheet
