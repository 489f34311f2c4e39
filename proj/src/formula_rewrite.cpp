#include "aosheet/formula.hpp"

namespace aosheet {

namespace {

// The range survives only if every row keeps its left/right edge on the new
// left/right columns and every column keeps its top/bottom edge on the new rows.
std::optional<Rect> map_range(const Rect& r, std::string_view sheet, const AddressMap& map) {
    CellPos tl = map(sheet, r.first);
    CellPos br = map(sheet, r.last);
    if (tl.col > br.col || tl.row > br.row) return std::nullopt;
    for (int row = r.first.row; row <= r.last.row; ++row) {
        CellPos left = map(sheet, {r.first.col, row});
        CellPos right = map(sheet, {r.last.col, row});
        if (left.col != tl.col || right.col != br.col || left.row != right.row) return std::nullopt;
    }
    for (int col = r.first.col; col <= r.last.col; ++col) {
        CellPos top = map(sheet, {col, r.first.row});
        CellPos bottom = map(sheet, {col, r.last.row});
        if (top.row != tl.row || bottom.row != br.row || top.col != bottom.col) return std::nullopt;
    }
    return Rect{tl, br};
}

FormulaAst rewrite(const FormulaAst& ast, std::string_view owner, const AddressMap& map) {
    const FormulaNode& n = *ast;
    if (auto* c = std::get_if<CellRef>(&n.node)) {
        std::string_view sheet = c->sheet ? std::string_view(*c->sheet) : owner;
        CellPos moved = map(sheet, c->pos);
        if (moved == c->pos) return ast;
        return make_formula(CellRef{c->sheet, moved});
    }
    if (auto* r = std::get_if<RangeRef>(&n.node)) {
        std::string_view sheet = r->sheet ? std::string_view(*r->sheet) : owner;
        auto moved = map_range(r->rect, sheet, map);
        if (!moved) return make_formula(ErrorLit{ErrorKind::Ref});
        if (*moved == r->rect) return ast;
        return make_formula(RangeRef{r->sheet, *moved});
    }
    if (auto* call = std::get_if<Call>(&n.node)) {
        Call out{call->name, {}};
        out.args.reserve(call->args.size());
        for (const auto& a : call->args) out.args.push_back(rewrite(a, owner, map));
        return make_formula(std::move(out));
    }
    if (auto* b = std::get_if<Binary>(&n.node)) {
        return make_formula(Binary{b->op, rewrite(b->lhs, owner, map), rewrite(b->rhs, owner, map)});
    }
    if (auto* u = std::get_if<Unary>(&n.node)) {
        return make_formula(Unary{u->op, rewrite(u->arg, owner, map)});
    }
    return ast;
}

}  // namespace

FormulaAst rewrite_references(const FormulaAst& ast, std::string_view owner_sheet, const AddressMap& map) {
    return rewrite(ast, owner_sheet, map);
}

void for_each_reference(const FormulaAst& ast, const std::function<void(const CellRef&)>& on_cell,
                        const std::function<void(const RangeRef&)>& on_range) {
    const FormulaNode& n = *ast;
    if (auto* c = std::get_if<CellRef>(&n.node)) {
        if (on_cell) on_cell(*c);
    } else if (auto* r = std::get_if<RangeRef>(&n.node)) {
        if (on_range) on_range(*r);
    } else if (auto* call = std::get_if<Call>(&n.node)) {
        for (const auto& a : call->args) for_each_reference(a, on_cell, on_range);
    } else if (auto* b = std::get_if<Binary>(&n.node)) {
        for_each_reference(b->lhs, on_cell, on_range);
        for_each_reference(b->rhs, on_cell, on_range);
    } else if (auto* u = std::get_if<Unary>(&n.node)) {
        for_each_reference(u->arg, on_cell, on_range);
    }
}

}  // namespace aosheet
