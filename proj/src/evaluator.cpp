#include "aosheet/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

namespace aosheet {

namespace {

void for_each_stored_in(const Worksheet& sheet, const Rect& rect,
                        const std::function<void(CellPos, const CellContent&)>& fn) {
    const auto& cells = sheet.cells();
    if (static_cast<std::size_t>(rect.height()) > cells.size()) {
        for (const auto& [pos, content] : cells) {
            if (rect.contains(pos)) fn(pos, content);
        }
        return;
    }
    for (int row = rect.first.row; row <= rect.last.row; ++row) {
        for (auto it = cells.lower_bound({rect.first.col, row}); it != cells.end(); ++it) {
            if (it->first.row != row || it->first.col > rect.last.col) break;
            fn(it->first, it->second);
        }
    }
}

struct RangeArg {
    int sheet;
    Rect rect;
};

using Operand = std::variant<Value, RangeArg>;

Value error(ErrorKind k) { return ErrorValue{k}; }

class Evaluator {
public:
    Evaluator(const Workbook& wb, const ValueGrid& grid, int sheet) : wb_(wb), grid_(grid), sheet_(sheet) {}

    Value eval(const FormulaAst& ast) {
        const FormulaNode& n = *ast;
        return std::visit([&](const auto& node) { return eval_node(node); }, n.node);
    }

private:
    Value eval_node(const NumberLit& n) { return n.value; }
    Value eval_node(const TextLit& n) { return n.value; }
    Value eval_node(const BoolLit& n) { return n.value; }
    Value eval_node(const ErrorLit& n) { return error(n.kind); }

    std::optional<int> resolve_sheet(const std::optional<std::string>& name) const {
        if (!name) return sheet_;
        return wb_.find_sheet(*name);
    }

    Value cell_value(int sheet, CellPos pos) const {
        CellAddr addr{sheet, pos};
        if (const Value* v = grid_.find(addr)) return *v;
        if (const CellContent* c = wb_.find(addr)) return literal_value(*c);
        return 0.0;
    }

    Value eval_node(const CellRef& ref) {
        auto sheet = resolve_sheet(ref.sheet);
        if (!sheet) return error(ErrorKind::Ref);
        return cell_value(*sheet, ref.pos);
    }

    Value eval_node(const RangeRef& ref) {
        if (!resolve_sheet(ref.sheet)) return error(ErrorKind::Ref);
        return error(ErrorKind::Value);
    }

    static std::optional<ErrorValue> number_of(const Value& v, double& out) {
        if (auto* d = std::get_if<double>(&v)) {
            out = *d;
            return std::nullopt;
        }
        if (auto* b = std::get_if<bool>(&v)) {
            out = *b ? 1 : 0;
            return std::nullopt;
        }
        if (auto* e = std::get_if<ErrorValue>(&v)) return *e;
        return ErrorValue{ErrorKind::Value};
    }

    static std::optional<ErrorValue> truth_of(const Value& v, bool& out) {
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

    static std::string concat_text(const Value& v) {
        if (auto* d = std::get_if<double>(&v)) return format_number(*d);
        if (auto* b = std::get_if<bool>(&v)) return *b ? "TRUE" : "FALSE";
        return std::get<std::string>(v);
    }

    static Value finite(double d) {
        if (!std::isfinite(d)) return error(ErrorKind::Value);
        return d;
    }

    static Value compare(BinaryOp op, const Value& a, const Value& b) {
        auto order = order_values(a, b);
        switch (op) {
            case BinaryOp::Eq: return order && *order == 0;
            case BinaryOp::Ne: return !(order && *order == 0);
            default: break;
        }
        if (!order) return error(ErrorKind::Value);
        switch (op) {
            case BinaryOp::Lt: return *order < 0;
            case BinaryOp::Le: return *order <= 0;
            case BinaryOp::Gt: return *order > 0;
            case BinaryOp::Ge: return *order >= 0;
            default: return error(ErrorKind::Value);
        }
    }

    Value eval_node(const Binary& b) {
        Value lhs = eval(b.lhs);
        Value rhs = eval(b.rhs);
        if (is_error(lhs)) return lhs;
        if (is_error(rhs)) return rhs;
        switch (b.op) {
            case BinaryOp::Add:
            case BinaryOp::Sub:
            case BinaryOp::Mul:
            case BinaryOp::Div: {
                double x = 0;
                double y = 0;
                if (auto e = number_of(lhs, x)) return *e;
                if (auto e = number_of(rhs, y)) return *e;
                if (b.op == BinaryOp::Add) return finite(x + y);
                if (b.op == BinaryOp::Sub) return finite(x - y);
                if (b.op == BinaryOp::Mul) return finite(x * y);
                if (y == 0) return error(ErrorKind::Div0);
                return finite(x / y);
            }
            case BinaryOp::Concat: return concat_text(lhs) + concat_text(rhs);
            case BinaryOp::And:
            case BinaryOp::Or: {
                bool x = false;
                bool y = false;
                if (auto e = truth_of(lhs, x)) return *e;
                if (auto e = truth_of(rhs, y)) return *e;
                return b.op == BinaryOp::And ? (x && y) : (x || y);
            }
            default: return compare(b.op, lhs, rhs);
        }
    }

    Value eval_node(const Unary& u) {
        Value v = eval(u.arg);
        if (is_error(v)) return v;
        if (u.op == UnaryOp::Neg) {
            double x = 0;
            if (auto e = number_of(v, x)) return *e;
            return -x;
        }
        bool t = false;
        if (auto e = truth_of(v, t)) return *e;
        return !t;
    }

    Operand eval_arg(const FormulaAst& ast) {
        const FormulaNode& n = *ast;
        if (auto* r = std::get_if<RangeRef>(&n.node)) {
            auto sheet = resolve_sheet(r->sheet);
            if (!sheet) return error(ErrorKind::Ref);
            return RangeArg{*sheet, r->rect};
        }
        if (auto* c = std::get_if<CellRef>(&n.node)) {
            auto sheet = resolve_sheet(c->sheet);
            if (!sheet) return error(ErrorKind::Ref);
            return RangeArg{*sheet, Rect::single(c->pos)};
        }
        return eval(ast);
    }

    // Flattens arguments to the values a function sees; ranges contribute only stored cells.
    std::vector<Value> flatten(const std::vector<Operand>& args) const {
        std::vector<Value> out;
        for (const auto& a : args) {
            if (auto* v = std::get_if<Value>(&a)) {
                out.push_back(*v);
                continue;
            }
            const auto& r = std::get<RangeArg>(a);
            for_each_stored_in(wb_.sheet(r.sheet), r.rect,
                               [&](CellPos pos, const CellContent&) { out.push_back(cell_value(r.sheet, pos)); });
        }
        return out;
    }

    static std::optional<Value> first_error(const std::vector<Value>& values) {
        for (const auto& v : values) {
            if (is_error(v)) return v;
        }
        return std::nullopt;
    }

    Value eval_node(const Call& call) {
        static const std::vector<std::string> known = {"SUM", "AVERAGE", "IF", "AND", "OR", "NOT"};
        if (std::find(known.begin(), known.end(), call.name) == known.end()) return error(ErrorKind::Name);

        std::vector<Operand> args;
        args.reserve(call.args.size());
        for (const auto& a : call.args) args.push_back(eval_arg(a));
        std::vector<Value> values = flatten(args);
        if (auto e = first_error(values)) return *e;

        if (call.name == "SUM" || call.name == "AVERAGE") {
            double total = 0;
            std::size_t count = 0;
            for (const auto& v : values) {
                double x = 0;
                if (auto e = number_of(v, x)) return *e;
                total += x;
                ++count;
            }
            if (call.name == "SUM") return finite(total);
            if (count == 0) return error(ErrorKind::Div0);
            return finite(total / static_cast<double>(count));
        }
        if (call.name == "IF" || call.name == "NOT") {
            std::size_t lo = call.name == "IF" ? 2 : 1;
            std::size_t hi = call.name == "IF" ? 3 : 1;
            if (call.args.size() < lo || call.args.size() > hi) return error(ErrorKind::Value);
            std::vector<Value> scalars;
            for (const auto& a : args) {
                if (auto* v = std::get_if<Value>(&a)) {
                    scalars.push_back(*v);
                } else {
                    const auto& r = std::get<RangeArg>(a);
                    if (r.rect.first != r.rect.last) return error(ErrorKind::Value);
                    scalars.push_back(cell_value(r.sheet, r.rect.first));
                }
            }
            bool cond = false;
            if (auto e = truth_of(scalars[0], cond)) return *e;
            if (call.name == "NOT") return !cond;
            if (cond) return scalars[1];
            return scalars.size() == 3 ? scalars[2] : Value(false);
        }
        // AND / OR
        if (call.args.empty() || values.empty()) return error(ErrorKind::Value);
        bool acc = call.name == "AND";
        for (const auto& v : values) {
            bool t = false;
            if (auto e = truth_of(v, t)) return *e;
            acc = call.name == "AND" ? (acc && t) : (acc || t);
        }
        return acc;
    }

    const Workbook& wb_;
    const ValueGrid& grid_;
    int sheet_;
};

}  // namespace

Value literal_value(const CellContent& content) {
    struct Visitor {
        Value operator()(std::monostate) const { return 0.0; }
        Value operator()(double d) const { return d; }
        Value operator()(const std::string& s) const { return s; }
        Value operator()(bool b) const { return b; }
        Value operator()(const Formula&) const { return ErrorValue{ErrorKind::Value}; }
    };
    return std::visit(Visitor{}, content.data);
}

ValueGrid evaluate_workbook(const Workbook& wb) {
    ValueGrid grid;
    std::vector<CellAddr> formulas;
    std::map<CellAddr, std::size_t> index;
    for (int s = 0; s < wb.sheet_count(); ++s) {
        for (const auto& [pos, content] : wb.sheet(s).cells()) {
            CellAddr addr{s, pos};
            if (content.as_formula()) {
                index.emplace(addr, formulas.size());
                formulas.push_back(addr);
            } else {
                grid.set(addr, literal_value(content));
            }
        }
    }

    // Edges run from a referenced formula cell to the formula reading it.
    std::vector<std::vector<std::size_t>> dependents(formulas.size());
    std::vector<std::size_t> pending(formulas.size(), 0);
    for (std::size_t i = 0; i < formulas.size(); ++i) {
        const CellAddr& addr = formulas[i];
        std::vector<std::size_t> deps;
        auto add = [&](int sheet, CellPos pos) {
            auto it = index.find({sheet, pos});
            if (it != index.end()) deps.push_back(it->second);
        };
        auto sheet_of = [&](const std::optional<std::string>& name) -> std::optional<int> {
            if (!name) return addr.sheet;
            return wb.find_sheet(*name);
        };
        for_each_reference(
            wb.find(addr)->as_formula()->ast(),
            [&](const CellRef& ref) {
                if (auto s = sheet_of(ref.sheet)) add(*s, ref.pos);
            },
            [&](const RangeRef& ref) {
                if (auto s = sheet_of(ref.sheet)) {
                    for_each_stored_in(wb.sheet(*s), ref.rect, [&](CellPos pos, const CellContent& c) {
                        if (c.as_formula()) add(*s, pos);
                    });
                }
            });
        std::sort(deps.begin(), deps.end());
        deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
        for (auto d : deps) dependents[d].push_back(i);
        pending[i] = deps.size();
    }

    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < formulas.size(); ++i) {
        if (pending[i] == 0) ready.push_back(i);
    }
    std::vector<bool> done(formulas.size(), false);
    while (!ready.empty()) {
        std::size_t i = ready.front();
        ready.pop_front();
        const CellAddr& addr = formulas[i];
        Evaluator ev(wb, grid, addr.sheet);
        grid.set(addr, ev.eval(wb.find(addr)->as_formula()->ast()));
        done[i] = true;
        for (auto d : dependents[i]) {
            if (--pending[d] == 0) ready.push_back(d);
        }
    }
    for (std::size_t i = 0; i < formulas.size(); ++i) {
        if (!done[i]) grid.set(formulas[i], ErrorValue{ErrorKind::Cycle});
    }
    return grid;
}

}  // namespace aosheet
