#include "aosheet/matcher.hpp"

#include <algorithm>
#include <regex>

#include "aosheet/wbk.hpp"

namespace aosheet {

int JoinPoint::sheet() const {
    return std::visit(
        [](const auto& jp) {
            using T = std::decay_t<decltype(jp)>;
            if constexpr (std::is_same_v<T, SheetJP>) {
                return jp.sheet;
            } else if constexpr (std::is_same_v<T, RangeJP>) {
                return jp.rect.sheet;
            } else {
                return jp.addr.sheet;
            }
        },
        point);
}

std::string JoinPoint::describe(const Workbook& wb) const {
    std::string sheet = wb.sheet(this->sheet()).name();
    if (std::holds_alternative<SheetJP>(point)) return sheet;
    if (auto* r = std::get_if<RangeJP>(&point)) {
        return sheet + "!" + format_a1(r->rect.rect.first) + ":" + format_a1(r->rect.rect.last);
    }
    return sheet + "!" + format_a1(std::get<CellJP>(point).addr.pos);
}

const CellContent* BindingEnv::content_at(const CellAddr& addr) const {
    if (overrides_) {
        auto it = overrides_->find(addr);
        if (it != overrides_->end()) return &it->second;
    }
    return wb_->find(addr);
}

std::vector<std::string> BindingEnv::bound_names() const {
    std::vector<std::string> names{"sheet"};
    if (range_) {
        names.emplace_back(range_kind_keyword(range_->kind));
        if (range_->kind != RangeKind::Range) names.emplace_back("range");
    }
    if (cell_) names.emplace_back("cell");
    return names;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

namespace {

int compare_text(const std::string& a, const std::string& b) {
    int c = a.compare(b);
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

int compare_long(long a, long b) { return a < b ? -1 : (a > b ? 1 : 0); }

bool sheet_selected(const SheetPat& pat, const Worksheet& sheet, int index) {
    switch (pat.kind) {
        case SheetPat::Kind::Any: return true;
        case SheetPat::Kind::Name: return comparator_holds(pat.cmp, compare_text(sheet.name(), pat.name));
        case SheetPat::Kind::Number: return comparator_holds(pat.cmp, compare_long(index + 1, pat.number));
    }
    return false;
}

std::vector<Rect> range_candidates(const RangePat& pat, const Worksheet& sheet) {
    auto used = sheet.used_region();
    if (pat.kind == RangePat::Kind::Name && pat.cmp == Comparator::Eq) return {parse_rect(pat.name)};
    if (!used) return {};

    std::vector<Rect> lines;
    if (pat.range_kind == RangeKind::Column) {
        for (int c = used->first.col; c <= used->last.col; ++c) {
            lines.push_back({{c, used->first.row}, {c, used->last.row}});
        }
    } else if (pat.range_kind == RangeKind::Row) {
        for (int r = used->first.row; r <= used->last.row; ++r) {
            lines.push_back({{used->first.col, r}, {used->last.col, r}});
        }
    } else {
        lines.push_back(*used);
    }

    std::vector<Rect> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        bool keep = false;
        switch (pat.kind) {
            case RangePat::Kind::Any: keep = true; break;
            case RangePat::Kind::Name: keep = comparator_holds(pat.cmp, compare_text(format_rect(lines[i]), pat.name)); break;
            case RangePat::Kind::Index:
                keep = comparator_holds(pat.cmp, compare_long(static_cast<long>(i) + 1, pat.index));
                break;
        }
        if (keep) out.push_back(lines[i]);
    }
    return out;
}

std::vector<CellPos> cell_candidates(const CellPat& pat, const Worksheet& sheet, const std::optional<Rect>& within,
                                     const std::regex* re) {
    std::vector<CellPos> out;
    auto inside = [&](CellPos p) { return !within || within->contains(p); };
    if (pat.kind == CellPat::Kind::Name && pat.cmp == Comparator::Eq) {
        CellPos p = parse_a1(pat.text);
        if (inside(p)) out.push_back(p);
        return out;
    }
    for (const auto& [pos, content] : sheet.cells()) {
        if (!inside(pos)) continue;
        bool keep = false;
        switch (pat.kind) {
            case CellPat::Kind::Any: keep = true; break;
            case CellPat::Kind::Name: keep = comparator_holds(pat.cmp, compare_text(format_a1(pos), pat.text)); break;
            case CellPat::Kind::Match: {
                bool found = std::regex_search(content_text(content), *re);
                keep = pat.cmp == Comparator::Ne ? !found : found;
                break;
            }
        }
        if (keep) out.push_back(pos);
    }
    return out;
}

}  // namespace

std::vector<Match> enumerate_join_points(const Workbook& wb, const ValueGrid& grid, const Pointcut& pc) {
    std::vector<Match> out;
    std::optional<std::regex> re;
    if (pc.cell && pc.cell->kind == CellPat::Kind::Match) re.emplace(pc.cell->text);

    for (int s = 0; s < wb.sheet_count(); ++s) {
        const Worksheet& sheet = wb.sheet(s);
        if (!sheet_selected(pc.sheet, sheet, s)) continue;
        if (!pc.range && !pc.cell) {
            out.push_back({JoinPoint{SheetJP{s}}, BindingEnv(wb, grid, s)});
            continue;
        }

        std::vector<std::optional<RangeRect>> scopes;
        if (pc.range) {
            auto rects = range_candidates(*pc.range, sheet);
            std::stable_sort(rects.begin(), rects.end(),
                             [](const Rect& a, const Rect& b) { return a.first < b.first; });
            for (const auto& r : rects) scopes.push_back(RangeRect{s, r, pc.range->range_kind});
        } else {
            scopes.push_back(std::nullopt);
        }

        for (const auto& scope : scopes) {
            if (!pc.cell) {
                BindingEnv env(wb, grid, s);
                env.bind_range(*scope);
                out.push_back({JoinPoint{RangeJP{*scope}}, env});
                continue;
            }
            std::optional<Rect> within;
            if (scope) within = scope->rect;
            for (CellPos pos : cell_candidates(*pc.cell, sheet, within, re ? &*re : nullptr)) {
                BindingEnv env(wb, grid, s);
                if (scope) env.bind_range(*scope);
                env.bind_cell({s, pos});
                out.push_back({JoinPoint{CellJP{{s, pos}, scope}}, env});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Attribute resolution
// ---------------------------------------------------------------------------

namespace {

struct SheetHandle {
    int sheet;
};
struct RectHandle {
    RangeRect rect;
};
struct CellHandle {
    CellAddr addr;
};
using Handle = std::variant<SheetHandle, RectHandle, CellHandle, Value>;

std::string path_text(const ExprPath& p) {
    std::string out;
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
        if (i) out += '.';
        out += p.steps[i].name;
        if (p.steps[i].index) out += "[" + std::to_string(*p.steps[i].index) + "]";
    }
    return out;
}

CellHandle index_rect(const RangeRect& r, int i, const std::string& where) {
    long area = static_cast<long>(r.rect.width()) * r.rect.height();
    if (i < 0 || i >= area) {
        throw EvalError(where + ": index " + std::to_string(i) + " outside " + format_rect(r.rect));
    }
    int w = r.rect.width();
    return {{r.sheet, {r.rect.first.col + i % w, r.rect.first.row + i / w}}};
}

Value typed_content(const CellContent* c) {
    if (!c) return std::string();
    struct Visitor {
        Value operator()(std::monostate) const { return std::string(); }
        Value operator()(double d) const { return d; }
        Value operator()(const std::string& s) const { return s; }
        Value operator()(bool b) const { return b; }
        Value operator()(const Formula& f) const { return f.text(); }
    };
    return std::visit(Visitor{}, c->data);
}

Value cell_result(const BindingEnv& env, const CellAddr& addr) {
    if (const Value* v = env.grid().find(addr)) return *v;
    if (const CellContent* c = env.workbook().find(addr)) return literal_value(*c);
    return 0.0;
}

// The row or column line through `cell`: the bound range when it is that kind and holds
// the cell, else the line across the sheet's used region.
RangeRect line_through(const BindingEnv& env, const CellAddr& cell, RangeKind kind, const std::string& where) {
    if (env.range() && env.range()->kind == kind && env.range()->sheet == cell.sheet &&
        env.range()->rect.contains(cell.pos)) {
        return *env.range();
    }
    auto used = env.workbook().sheet(cell.sheet).used_region();
    if (!used) throw EvalError(where + ": sheet has no used region");
    if (kind == RangeKind::Column) {
        return {cell.sheet, {{cell.pos.col, used->first.row}, {cell.pos.col, used->last.row}}, kind};
    }
    return {cell.sheet, {{used->first.col, cell.pos.row}, {used->last.col, cell.pos.row}}, kind};
}

}  // namespace

Value resolve_attribute(const BindingEnv& env, const ExprPath& path) {
    std::string where = path_text(path);
    if (path.steps.empty()) throw EvalError("empty attribute path");
    const PathStep& root = path.steps.front();

    Handle h;
    if (root.name == "sheet") {
        h = SheetHandle{env.sheet()};
    } else if (root.name == "cell") {
        if (!env.cell()) throw EvalError(where + ": variable 'cell' is not bound");
        h = CellHandle{*env.cell()};
    } else if (root.name == "range" || root.name == "column" || root.name == "row") {
        const auto& r = env.range();
        bool ok = r && (root.name == "range" || root.name == range_kind_keyword(r->kind));
        if (!ok) throw EvalError(where + ": variable '" + root.name + "' is not bound");
        h = RectHandle{*r};
    } else {
        throw EvalError(where + ": unknown variable '" + root.name + "'");
    }
    if (root.index) {
        auto* rect = std::get_if<RectHandle>(&h);
        if (!rect) throw EvalError(where + ": '" + root.name + "' cannot be indexed");
        h = index_rect(rect->rect, *root.index, where);
    }

    for (std::size_t i = 1; i < path.steps.size(); ++i) {
        const PathStep& step = path.steps[i];
        if (auto* s = std::get_if<SheetHandle>(&h)) {
            if (step.name == "name") {
                h = Value(env.workbook().sheet(s->sheet).name());
            } else if (step.name == "number") {
                h = Value(static_cast<double>(s->sheet + 1));
            } else {
                throw EvalError(where + ": unknown worksheet attribute '" + step.name + "'");
            }
            if (step.index) throw EvalError(where + ": worksheet attributes cannot be indexed");
        } else if (auto* r = std::get_if<RectHandle>(&h)) {
            if (step.name != "name" || step.index) throw EvalError(where + ": unknown range attribute '" + step.name + "'");
            h = Value(format_rect(r->rect.rect));
        } else if (auto* c = std::get_if<CellHandle>(&h)) {
            CellAddr addr = c->addr;
            if (step.name == "name") {
                h = Value(format_a1(addr.pos));
            } else if (step.name == "value") {
                h = typed_content(env.content_at(addr));
            } else if (step.name == "result") {
                h = cell_result(env, addr);
            } else if (step.name == "row" || step.name == "column") {
                if (step.index) {
                    RangeKind kind = step.name == "row" ? RangeKind::Row : RangeKind::Column;
                    h = index_rect(line_through(env, addr, kind, where), *step.index, where);
                } else {
                    h = Value(static_cast<double>(step.name == "row" ? addr.pos.row : addr.pos.col));
                }
                continue;
            } else {
                throw EvalError(where + ": unknown cell attribute '" + step.name + "'");
            }
            if (step.index) throw EvalError(where + ": cell attribute '" + step.name + "' cannot be indexed");
        } else {
            throw EvalError(where + ": attribute '" + step.name + "' applied to a plain value");
        }
    }
    if (auto* v = std::get_if<Value>(&h)) return *v;
    throw EvalError(where + ": path must end in an attribute such as .name or .value");
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

namespace {

std::optional<ErrorValue> truth_of(const Value& v, bool& out) {
    if (auto* b = std::get_if<bool>(&v)) {
        out = *b;
        return std::nullopt;
    }
    if (auto* d = std::get_if<double>(&v)) {
        out = *d != 0;
        return std::nullopt;
    }
    if (auto* e = std::get_if<ErrorValue>(&v)) return *e;
    return ErrorValue{ErrorKind::Value};
}

}  // namespace

Value eval_expr(const BindingEnv& env, const Expr& e) {
    const ExprNode& n = *e;
    if (auto* p = std::get_if<ExprPath>(&n.node)) return resolve_attribute(env, *p);
    if (auto* num = std::get_if<ExprNumber>(&n.node)) return num->value;
    if (auto* t = std::get_if<ExprText>(&n.node)) return t->value;
    if (auto* b = std::get_if<ExprBool>(&n.node)) return b->value;
    if (auto* c = std::get_if<ExprCellRef>(&n.node)) return cell_result(env, {env.sheet(), c->pos});
    if (auto* r = std::get_if<ExprRangeRef>(&n.node)) return format_rect(r->rect);
    if (auto* c = std::get_if<ExprCompare>(&n.node)) {
        Value a = eval_expr(env, c->lhs);
        Value b = eval_expr(env, c->rhs);
        if (is_error(a)) return a;
        if (is_error(b)) return b;
        auto order = order_values(a, b);
        if (c->cmp == Comparator::Eq) return order && *order == 0;
        if (c->cmp == Comparator::Ne) return !(order && *order == 0);
        if (!order) return ErrorValue{ErrorKind::Value};
        return comparator_holds(c->cmp, *order);
    }
    if (auto* l = std::get_if<ExprLogic>(&n.node)) {
        Value a = eval_expr(env, l->lhs);
        Value b = eval_expr(env, l->rhs);
        bool x = false;
        bool y = false;
        if (auto err = truth_of(a, x)) return *err;
        if (auto err = truth_of(b, y)) return *err;
        return l->is_and ? (x && y) : (x || y);
    }
    if (auto* no = std::get_if<ExprNot>(&n.node)) {
        bool x = false;
        if (auto err = truth_of(eval_expr(env, no->arg), x)) return *err;
        return !x;
    }
    const auto& t = std::get<ExprTernary>(n.node);
    // A condition that fails to evaluate selects the else branch, as a failing guard would.
    bool cond = false;
    if (truth_of(eval_expr(env, t.cond), cond)) cond = false;
    return eval_expr(env, cond ? t.then_branch : t.else_branch);
}

GuardResult eval_guard(const BindingEnv& env, const std::optional<Expr>& guard) {
    if (!guard) return {true, std::nullopt};
    try {
        Value v = eval_expr(env, *guard);
        if (auto* b = std::get_if<bool>(&v)) return {*b, std::nullopt};
        if (auto* e = std::get_if<ErrorValue>(&v)) return {false, std::string("guard evaluated to ") + std::string(error_text(e->kind))};
        if (auto* d = std::get_if<double>(&v)) return {*d != 0, std::nullopt};
        return {false, "guard evaluated to text"};
    } catch (const EvalError& err) {
        return {false, err.what()};
    }
}

std::string interpolation_text(const Value& v) {
    if (auto* d = std::get_if<double>(&v)) return format_number(*d);
    if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    return std::string(error_text(std::get<ErrorValue>(v).kind));
}

CellContent eval_template(const BindingEnv& env, const Template& body) {
    std::vector<Value> values;
    for (const auto& seg : body.segments) {
        if (auto* e = std::get_if<Expr>(&seg.part)) {
            Value v = eval_expr(env, *e);
            if (auto* err = std::get_if<ErrorValue>(&v)) {
                throw EvalError("interpolation #{" + print_expr(*e) + "} evaluated to " +
                                std::string(error_text(err->kind)));
            }
            values.push_back(std::move(v));
        }
    }
    // A body that is exactly one interpolation keeps the value's type.
    if (body.segments.size() == 1 && values.size() == 1) {
        const Value& v = values.front();
        if (auto* d = std::get_if<double>(&v)) return CellContent::number(*d);
        if (auto* b = std::get_if<bool>(&v)) return CellContent::boolean(*b);
        const auto& s = std::get<std::string>(v);
        if (s.empty()) return CellContent::empty();
        if (s.front() != '=') return CellContent::text(s);
    }
    std::string text;
    std::size_t next = 0;
    for (const auto& seg : body.segments) {
        if (auto* lit = std::get_if<std::string>(&seg.part)) {
            text += *lit;
        } else {
            text += interpolation_text(values[next++]);
        }
    }
    try {
        return parse_cell_content(text);
    } catch (const FormulaSyntaxError& e) {
        throw EvalError("advice produced an invalid formula '" + text + "': " + e.what());
    }
}

}  // namespace aosheet
