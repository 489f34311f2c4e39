#include "aosheet/weaver.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace aosheet {

std::string_view side_keyword(Side s) {
    switch (s) {
        case Side::Left: return "left";
        case Side::Above: return "above";
        case Side::Right: return "right";
        case Side::Below: return "below";
    }
    return "right";
}

namespace {

std::optional<Side> side_of(AdvicePosition p) {
    switch (p) {
        case AdvicePosition::Left: return Side::Left;
        case AdvicePosition::Above: return Side::Above;
        case AdvicePosition::Right: return Side::Right;
        case AdvicePosition::Below: return Side::Below;
        default: return std::nullopt;
    }
}

std::string advice_label(const AspectDef& aspect, std::size_t i) {
    const Advice& a = aspect.advice[i];
    std::string s = "aspect " + aspect.name + ", advice #" + std::to_string(i + 1);
    if (a.name) s += " '" + *a.name + "'";
    return s + " (" + std::string(position_keyword(a.position)) + " " + a.pointcut + ")";
}

// Planning state for one aspect: the snapshot plus the contents earlier around advice produced.
class Planner {
public:
    Planner(const Workbook& wb, const ValueGrid& grid, const AspectDef& aspect)
        : wb_(wb), grid_(grid), aspect_(aspect) {}

    WeavePlan run() {
        plan_.report.name = aspect_.name;
        for (std::size_t i = 0; i < aspect_.advice.size(); ++i) plan_advice(i);
        return std::move(plan_);
    }

private:
    const CellContent& current(const CellAddr& addr) const {
        static const CellContent none;
        auto it = overrides_.find(addr);
        if (it != overrides_.end()) return it->second;
        const CellContent* c = wb_.find(addr);
        return c ? *c : none;
    }

    void plan_advice(std::size_t i) {
        const Advice& advice = aspect_.advice[i];
        const Pointcut* pc = aspect_.find_pointcut(advice.pointcut);
        AdviceReport rep;
        rep.ordinal = i;
        rep.name = advice.name;
        rep.position = advice.position;
        rep.pointcut = advice.pointcut;

        auto matches = enumerate_join_points(wb_, grid_, *pc);
        rep.matches = matches.size();
        for (auto& m : matches) {
            m.env.set_overrides(&overrides_);
            std::string where = m.join_point.describe(wb_);
            GuardResult g = eval_guard(m.env, advice.guard);
            if (g.error) {
                ++rep.guard_errors;
                rep.errors.push_back(where + ": " + *g.error);
                continue;
            }
            if (!g.passed) {
                ++rep.skipped;
                continue;
            }
            ++rep.passed;
            ActionOrigin origin{aspect_.name, i, m.join_point, where};
            std::size_t before = plan_.actions.size();
            try {
                if (auto* cell = std::get_if<CellJP>(&m.join_point.point)) {
                    plan_cell(advice, m.env, cell->addr, origin, rep);
                } else if (auto* range = std::get_if<RangeJP>(&m.join_point.point)) {
                    plan_range(advice, m.env, range->rect, origin, rep);
                } else {
                    plan_sheet(advice, m.env, std::get<SheetJP>(m.join_point.point).sheet, origin);
                }
            } catch (const EvalError& e) {
                throw WeaveError(advice_label(aspect_, i) + " at " + where + ": " + e.what());
            } catch (const std::runtime_error& e) {
                throw WeaveError(advice_label(aspect_, i) + " at " + where + ": " + e.what());
            }
            rep.applied += plan_.actions.size() - before;
        }
        plan_.report.advice.push_back(std::move(rep));
    }

    void emit(WeaveAction::Variant a, const ActionOrigin& origin) { plan_.actions.push_back({std::move(a), origin}); }

    // Replaces one cell unless the content is unchanged. Returns whether an action was emitted.
    bool replace(const CellAddr& addr, CellContent content, const ActionOrigin& origin) {
        if (current(addr) == content) return false;
        overrides_.insert_or_assign(addr, content);
        emit(ReplaceCell{addr, std::move(content)}, origin);
        return true;
    }

    void plan_cell(const Advice& advice, const BindingEnv& env, const CellAddr& addr, const ActionOrigin& origin,
                   AdviceReport& rep) {
        CellContent content = eval_template(env, std::get<Template>(advice.body.body));
        if (auto side = side_of(advice.position)) {
            emit(InsertCell{addr, *side, std::move(content)}, origin);
        } else if (!replace(addr, std::move(content), origin)) {
            ++rep.identity_elided;
        }
    }

    std::vector<std::pair<CellPos, CellContent>> render_entries(const Advice& advice, const BindingEnv& env) {
        std::vector<std::pair<CellPos, CellContent>> out;
        if (auto* t = std::get_if<Template>(&advice.body.body)) {
            out.emplace_back(CellPos{0, 0}, eval_template(env, *t));
        } else {
            for (const auto& entry : std::get<std::vector<CellListEntry>>(advice.body.body)) {
                out.emplace_back(entry.pos, eval_template(env, entry.content));
            }
        }
        return out;
    }

    void plan_range(const Advice& advice, const BindingEnv& env, const RangeRect& rr, const ActionOrigin& origin,
                    AdviceReport& rep) {
        auto entries = render_entries(advice, env);
        int w = rr.rect.width();
        int h = rr.rect.height();
        auto side = side_of(advice.position);

        if (!side) {
            std::map<CellPos, CellContent> body;
            for (auto& [pos, content] : entries) {
                if (pos.col >= w || pos.row >= h) {
                    throw WeaveError("around advice on " + format_rect(rr.rect) + " must keep its " +
                                     std::to_string(w) + "x" + std::to_string(h) + " size; " + format_a1(pos) +
                                     " is outside it");
                }
                body[pos] = std::move(content);
            }
            bool changed = false;
            for (int r = 0; r < h; ++r) {
                for (int c = 0; c < w; ++c) {
                    auto it = body.find({c, r});
                    CellContent content = it == body.end() ? CellContent::empty() : it->second;
                    CellAddr addr{rr.sheet, {rr.rect.first.col + c, rr.rect.first.row + r}};
                    changed = replace(addr, std::move(content), origin) || changed;
                }
            }
            if (!changed) ++rep.identity_elided;
            return;
        }

        bool horizontal = *side == Side::Left || *side == Side::Right;
        int rows = horizontal ? h : 1;
        int cols = horizontal ? 1 : w;
        for (const auto& [pos, content] : entries) {
            if (horizontal && pos.row >= h) {
                throw WeaveError("row " + std::to_string(pos.row + 1) + " of the inserted block exceeds the height " +
                                 std::to_string(h) + " of " + format_rect(rr.rect));
            }
            if (!horizontal && pos.col >= w) {
                throw WeaveError("column " + column_letters(pos.col) + " of the inserted block exceeds the width " +
                                 std::to_string(w) + " of " + format_rect(rr.rect));
            }
            rows = std::max(rows, pos.row + 1);
            cols = std::max(cols, pos.col + 1);
        }
        CellGrid grid(static_cast<std::size_t>(rows), std::vector<CellContent>(static_cast<std::size_t>(cols)));
        for (auto& [pos, content] : entries) {
            grid[static_cast<std::size_t>(pos.row)][static_cast<std::size_t>(pos.col)] = std::move(content);
        }
        emit(InsertRangeBlock{rr, *side, std::move(grid)}, origin);
    }

    void plan_sheet(const Advice& advice, const BindingEnv& env, int sheet, const ActionOrigin& origin) {
        const std::string& jp_name = wb_.sheet(sheet).name();
        Worksheet ws;
        if (auto* copy = std::get_if<CopySheet>(&advice.body.body)) {
            auto src = wb_.find_sheet(copy->sheet);
            if (!src) throw WeaveError("copy: no worksheet named '" + copy->sheet + "'");
            bool self = advice.position == AdvicePosition::Around && *src == sheet;
            ws = Worksheet(self ? jp_name : copy->sheet + "-woven", wb_.sheet(*src).cells());
        } else {
            std::string name;
            if (advice.position == AdvicePosition::Around) {
                name = jp_name;
            } else {
                name = advice.name ? *advice.name : jp_name + "-woven";
            }
            ws = Worksheet(name);
            for (auto& [pos, content] : render_entries(advice, env)) ws.set(pos, std::move(content));
        }
        switch (advice.position) {
            case AdvicePosition::Around: emit(ReplaceSheet{sheet, std::move(ws)}, origin); break;
            case AdvicePosition::Before: emit(InsertSheet{sheet, false, std::move(ws)}, origin); break;
            default: emit(InsertSheet{sheet, true, std::move(ws)}, origin); break;
        }
    }

    const Workbook& wb_;
    const ValueGrid& grid_;
    const AspectDef& aspect_;
    WeavePlan plan_;
    std::map<CellAddr, CellContent> overrides_;
};

// Applies actions whose coordinates refer to the snapshot, tracking how each snapshot
// sheet has been displaced so far.
class Applier {
public:
    explicit Applier(const Workbook& wb) : snapshot_(wb), wb_(wb), shifts_(static_cast<std::size_t>(wb.sheet_count())) {
        for (int i = 0; i < wb.sheet_count(); ++i) tokens_.push_back(i);
    }

    Workbook run(const WeavePlan& plan) {
        for (const auto& a : plan.actions) {
            try {
                std::visit([this](const auto& act) { apply(act); }, a.action);
            } catch (const WeaveError&) {
                throw;
            } catch (const std::runtime_error& e) {
                throw WeaveError("aspect " + a.origin.aspect + ", advice #" + std::to_string(a.origin.advice + 1) +
                                 " at " + a.origin.where + ": " + e.what());
            }
        }
        return std::move(wb_);
    }

private:
    int current_index(int token) const {
        auto it = std::find(tokens_.begin(), tokens_.end(), token);
        if (it == tokens_.end()) {
            throw WeaveError("plan refers to worksheet #" + std::to_string(token + 1) + " which no longer exists");
        }
        return static_cast<int>(it - tokens_.begin());
    }

    CellPos forward(int token, CellPos p) const {
        for (const Shift& s : shifts_[static_cast<std::size_t>(token)]) p = s.apply(p);
        return p;
    }

    // Moves references in new content from snapshot coordinates to current ones.
    CellContent localize(const CellContent& content, const std::string& owner, const std::string& skip = {}) const {
        const Formula* f = content.as_formula();
        if (!f) return content;
        AddressMap map = [&](std::string_view sheet, CellPos p) {
            if (!skip.empty() && sheet == skip) return p;
            auto token = snapshot_.find_sheet(sheet);
            return token ? forward(*token, p) : p;
        };
        return CellContent::formula(rewrite_references(f->ast(), owner, map));
    }

    std::string unique_name(const std::string& base, int ignore = -1) const {
        auto taken = [&](const std::string& n) {
            auto i = wb_.find_sheet(n);
            return i && *i != ignore;
        };
        if (!taken(base)) return base;
        for (int k = 2;; ++k) {
            std::string n = base + "-" + std::to_string(k);
            if (!taken(n)) return n;
        }
    }

    const std::string& snapshot_name(int token) const { return snapshot_.sheet(token).name(); }

    void insert(int token, CellPos at, ShiftDirection dir, const CellGrid& block) {
        int idx = current_index(token);
        int height = static_cast<int>(block.size());
        int width = 0;
        for (const auto& row : block) width = std::max(width, static_cast<int>(row.size()));
        if (height == 0 || width == 0) return;
        wb_ = insert_block_shift(wb_, {idx, at}, dir, block);
        shifts_[static_cast<std::size_t>(token)].push_back(block_shift({idx, at}, dir, height, width));
    }

    void apply(const ReplaceCell& a) {
        int idx = current_index(a.addr.sheet);
        CellPos p = forward(a.addr.sheet, a.addr.pos);
        wb_ = with_cell(wb_, {idx, p}, localize(a.content, snapshot_name(a.addr.sheet)));
    }

    void apply(const InsertCell& a) {
        int token = a.addr.sheet;
        CellPos p = forward(token, a.addr.pos);
        CellGrid block{{localize(a.content, snapshot_name(token))}};
        switch (a.side) {
            case Side::Left: insert(token, p, ShiftDirection::Right, block); break;
            case Side::Above: insert(token, p, ShiftDirection::Down, block); break;
            case Side::Right: insert(token, {p.col + 1, p.row}, ShiftDirection::Right, block); break;
            case Side::Below: insert(token, {p.col, p.row + 1}, ShiftDirection::Down, block); break;
        }
    }

    void apply(const InsertRangeBlock& a) {
        int token = a.anchor.sheet;
        const Rect& r = a.anchor.rect;
        if (a.grid.empty()) throw WeaveError("empty block for " + format_rect(r));
        std::size_t width = a.grid.front().size();
        for (const auto& row : a.grid) {
            if (row.size() != width) throw WeaveError("inserted block for " + format_rect(r) + " is not rectangular");
        }
        bool horizontal = a.side == Side::Left || a.side == Side::Right;
        if (horizontal && static_cast<int>(a.grid.size()) != r.height()) {
            throw WeaveError("inserted block height does not match " + format_rect(r));
        }
        if (!horizontal && static_cast<int>(width) != r.width()) {
            throw WeaveError("inserted block width does not match " + format_rect(r));
        }
        CellGrid block;
        for (const auto& row : a.grid) {
            auto& out = block.emplace_back();
            for (const auto& c : row) out.push_back(localize(c, snapshot_name(token)));
        }
        CellPos first = forward(token, r.first);
        switch (a.side) {
            case Side::Left: insert(token, first, ShiftDirection::Right, block); break;
            case Side::Above: insert(token, first, ShiftDirection::Down, block); break;
            case Side::Right: {
                CellPos top_right = forward(token, {r.last.col, r.first.row});
                insert(token, {top_right.col + 1, first.row}, ShiftDirection::Right, block);
                break;
            }
            case Side::Below: {
                CellPos bottom_left = forward(token, {r.first.col, r.last.row});
                insert(token, {first.col, bottom_left.row + 1}, ShiftDirection::Down, block);
                break;
            }
        }
    }

    Worksheet localize_sheet(const Worksheet& ws, const std::string& name) const {
        Worksheet out(name);
        for (const auto& [pos, content] : ws.cells()) out.set(pos, localize(content, name, name));
        return out;
    }

    void apply(const InsertSheet& a) {
        int idx = current_index(a.anchor);
        int at = a.after ? idx + 1 : idx;
        wb_ = insert_sheet_at(wb_, at, localize_sheet(a.sheet, unique_name(a.sheet.name())));
        tokens_.insert(tokens_.begin() + at, -1);
    }

    void apply(const ReplaceSheet& a) {
        int idx = current_index(a.index);
        wb_ = replace_sheet(wb_, idx, localize_sheet(a.sheet, unique_name(a.sheet.name(), idx)));
        shifts_[static_cast<std::size_t>(a.index)].clear();
    }

    const Workbook& snapshot_;
    Workbook wb_;
    std::vector<int> tokens_;  // current sheet index -> snapshot index, -1 for inserted sheets
    std::vector<std::vector<Shift>> shifts_;
};

}  // namespace

WeavePlan plan_aspect(const Workbook& wb, const ValueGrid& grid, const AspectDef& aspect) {
    auto diags = validate(aspect);
    if (!diags.empty()) {
        throw WeaveError("aspect " + aspect.name + " is invalid: line " + std::to_string(diags.front().pos.line) +
                         ": " + diags.front().message);
    }
    return Planner(wb, grid, aspect).run();
}

Workbook apply_plan(const Workbook& wb, const WeavePlan& plan) { return Applier(wb).run(plan); }

WeaveResult weave(const Workbook& wb, const std::vector<AspectDef>& aspects) {
    Workbook current = wb;
    WeaveReport report;
    for (const auto& aspect : aspects) {
        ValueGrid grid = evaluate_workbook(current);
        WeavePlan plan = plan_aspect(current, grid, aspect);
        current = apply_plan(current, plan);
        report.aspects.push_back(std::move(plan.report));
    }
    ValueGrid values = evaluate_workbook(current);
    return {std::move(current), std::move(values), std::move(report)};
}

std::string WeaveReport::to_text() const {
    std::ostringstream out;
    for (const auto& a : aspects) {
        out << "aspect " << a.name << "\n";
        for (const auto& r : a.advice) {
            out << "  advice #" << r.ordinal + 1;
            if (r.name) out << " " << *r.name;
            out << " (" << position_keyword(r.position) << " " << r.pointcut << "): " << r.matches << " matched, "
                << r.passed << " passed, " << r.skipped << " skipped, " << r.guard_errors << " guard errors, "
                << r.applied << " actions";
            if (r.identity_elided) out << ", " << r.identity_elided << " unchanged";
            out << "\n";
            for (const auto& e : r.errors) out << "    guard error at " << e << "\n";
        }
    }
    return out.str();
}

nlohmann::json WeaveReport::to_json() const {
    nlohmann::json out = nlohmann::json::object();
    nlohmann::json list = nlohmann::json::array();
    for (const auto& a : aspects) {
        nlohmann::json advice = nlohmann::json::array();
        for (const auto& r : a.advice) {
            advice.push_back({
                {"ordinal", r.ordinal + 1},
                {"name", r.name ? nlohmann::json(*r.name) : nlohmann::json(nullptr)},
                {"position", std::string(position_keyword(r.position))},
                {"pointcut", r.pointcut},
                {"matches", r.matches},
                {"passed", r.passed},
                {"skipped", r.skipped},
                {"guard_errors", r.guard_errors},
                {"applied", r.applied},
                {"identity_elided", r.identity_elided},
                {"errors", r.errors},
            });
        }
        list.push_back({{"aspect", a.name}, {"advice", advice}});
    }
    out["aspects"] = list;
    return out;
}

}  // namespace aosheet
