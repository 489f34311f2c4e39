#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <regex>

#include "aosheet/evaluator.hpp"
#include "aosheet/formula.hpp"
#include "aosheet/wbk.hpp"
#include "generators.hpp"
#include "oracle.hpp"

using namespace aosheet;

namespace {

std::string canon(const std::string& text) { return print_formula(parse_formula(text)); }

Value eval_one(const std::string& wbk, const std::string& cell, int sheet = 0) {
    Workbook wb = load_workbook(wbk);
    auto grid = evaluate_workbook(wb);
    const Value* v = grid.find({sheet, parse_a1(cell)});
    REQUIRE(v);
    return *v;
}

Value err(ErrorKind k) { return ErrorValue{k}; }

// Rewrites address tokens in formula source text; the comparison oracle for rewrite_references.
std::string token_substitute(const std::string& text, const std::function<CellPos(CellPos)>& map) {
    static const std::regex addr("[A-Z]+[0-9]+(?!!)");
    std::string out;
    auto begin = std::sregex_iterator(text.begin(), text.end(), addr);
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        out += text.substr(last, static_cast<std::size_t>(it->position()) - last);
        out += format_a1(map(parse_a1(it->str())));
        last = static_cast<std::size_t>(it->position() + it->length());
    }
    return out + text.substr(last);
}

}  // namespace

TEST_CASE("parse examples") {
    FormulaAst avg = parse_formula("=AVERAGE(B2:D2)");
    auto* call = std::get_if<Call>(&avg->node);
    REQUIRE(call);
    CHECK(call->name == "AVERAGE");
    REQUIRE(call->args.size() == 1);
    CHECK(*call->args[0] == FormulaNode{RangeRef{std::nullopt, parse_rect("B2:D2")}});

    CHECK(*parse_formula("=1") == FormulaNode{NumberLit{1}});

    FormulaAst f = parse_formula("=IF(E2<=10 && E2>=9.5, \"A\", \"B\")");
    FormulaAst expected = make_formula(Call{
        "IF",
        {make_formula(Binary{BinaryOp::And,
                             make_formula(Binary{BinaryOp::Le, make_formula(CellRef{std::nullopt, parse_a1("E2")}),
                                                 make_formula(NumberLit{10})}),
                             make_formula(Binary{BinaryOp::Ge, make_formula(CellRef{std::nullopt, parse_a1("E2")}),
                                                 make_formula(NumberLit{9.5})})}),
         make_formula(TextLit{"A"}), make_formula(TextLit{"B"})}});
    CHECK(f == expected);
    CHECK(parse_formula(print_formula(f)) == f);
}

TEST_CASE("canonical printing") {
    CHECK(print_formula(make_formula(NumberLit{1})) == "=1");
    CHECK(canon("=AVERAGE(B2:D2)") == "=AVERAGE(B2:D2)");
    CHECK(canon("=(1+2)*3") == "=(1+2)*3");
    CHECK(canon("=1+(2*3)") == "=1+2*3");
    CHECK(canon("=1-(2-3)") == "=1-(2-3)");
    CHECK(canon("=(1-2)-3") == "=1-2-3");
    CHECK(canon("= sum( a1 , b2:c3 )") == "=SUM(A1,B2:C3)");
    CHECK(canon("=A1==B1") == "=A1=B1");
    CHECK(canon("=A1<>B1") == "=A1<>B1");
    CHECK(canon("=\"say \"\"hi\"\"\"&1") == "=\"say \"\"hi\"\"\"&1");
    CHECK(canon("=true") == "=TRUE");
    CHECK(canon("=-(1)") == "=-1");
    CHECK(canon("=--A1") == "=--A1");
    CHECK(canon("=!(A1>1)") == "=!(A1>1)");
    CHECK(canon("=1&2=3") == "=1&2=3");
    CHECK(canon("=(1=2)&3") == "=(1=2)&3");
    CHECK(canon("=A1||B1&&C1") == "=A1||B1&&C1");
    CHECK(canon("=(A1||B1)&&C1") == "=(A1||B1)&&C1");
    CHECK(canon("='My Sheet'!A1+Other!B2:C3") == "='My Sheet'!A1+Other!B2:C3");
    CHECK(canon("=#REF!+1") == "=#REF!+1");
    CHECK(canon("=A1:A1") == "=A1:A1");
    CHECK(canon("=1.50") == "=1.5");
    CHECK(canon("=  \n 2 *\t3") == "=2*3");
}

TEST_CASE("syntax errors report offset and expectation") {
    for (const char* bad : {"1+2", "=", "=1+", "=SUM(A1", "=(1", "=\"abc", "=1 2", "=A1:", "=@", "=SUM(,)"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_formula(bad), FormulaSyntaxError);
    }
    try {
        parse_formula("=AVERAGE(");
        FAIL("expected an error");
    } catch (const FormulaSyntaxError& e) {
        CHECK(e.offset() == 9);
        CHECK_FALSE(e.expected().empty());
    }
}

TEST_CASE("formula round-trip on generated trees") {
    gen::Rng rng(11);
    gen::WorkbookShape shape;
    shape.acyclic = false;
    for (int i = 0; i < 1000; ++i) {
        FormulaAst ast = gen::formula(rng, shape, {0, {2, 5}}, 4);
        std::string text = print_formula(ast);
        FormulaAst again = parse_formula(text);
        REQUIRE(print_formula(again) == text);
        REQUIRE(parse_formula(print_formula(again)) == again);
    }
}

TEST_CASE("rewrite_references") {
    FormulaAst f = parse_formula("=AVERAGE(B2:D2)+E2*2");
    AddressMap identity = [](std::string_view, CellPos p) { return p; };
    CHECK(rewrite_references(f, "S", identity) == f);

    AddressMap e2_to_f2 = [](std::string_view, CellPos p) { return p == parse_a1("E2") ? parse_a1("F2") : p; };
    CHECK(print_formula(rewrite_references(parse_formula("=E2*2"), "S", e2_to_f2)) ==
          canon(token_substitute("=E2*2", [&](CellPos p) { return e2_to_f2("S", p); })));

    AddressMap right = [](std::string_view, CellPos p) { return CellPos{p.col + 1, p.row}; };
    CHECK(print_formula(rewrite_references(parse_formula("=AVERAGE(B2:D2)"), "S", right)) == "=AVERAGE(C2:E2)");

    // Only part of the range moves: the cells no longer form a rectangle.
    AddressMap split = [](std::string_view, CellPos p) { return p.row == 1 ? CellPos{p.col + 1, p.row} : p; };
    CHECK(print_formula(rewrite_references(parse_formula("=SUM(A1:B3)"), "S", split)) == "=SUM(#REF!)");

    // Qualified references resolve against their own sheet name.
    AddressMap only_t = [](std::string_view sheet, CellPos p) {
        return sheet == "T" ? CellPos{p.col, p.row + 1} : p;
    };
    CHECK(print_formula(rewrite_references(parse_formula("=A1+T!A1"), "S", only_t)) == "=A1+T!A2");
    CHECK(print_formula(rewrite_references(parse_formula("=A1+S!A1"), "T", only_t)) == "=A2+S!A1");
}

TEST_CASE("rewrite matches token substitution for uniform shifts") {
    gen::Rng rng(5);
    gen::WorkbookShape shape;
    shape.acyclic = false;
    shape.sheets = 1;
    for (int i = 0; i < 300; ++i) {
        FormulaAst ast = gen::formula(rng, shape, {0, {0, 0}}, 3);
        int dc = static_cast<int>(rng() % 3);
        int dr = static_cast<int>(rng() % 3);
        auto shift = [&](CellPos p) { return CellPos{p.col + dc, p.row + dr}; };
        AddressMap map = [&](std::string_view, CellPos p) { return shift(p); };
        std::string text = print_formula(ast);
        if (text.find('"') != std::string::npos) continue;  // text literals may hold address-like tokens
        REQUIRE(print_formula(rewrite_references(ast, "S1", map)) == canon(token_substitute(text, shift)));
    }
}

TEST_CASE("evaluation basics") {
    CHECK(eval_one("sheet S\nA1: 5.2\nB1: 4.5\nC1: 5\nD1: =AVERAGE(A1:C1)\n", "D1") == Value((5.2 + 4.5 + 5.0) / 3));
    CHECK(display_value(eval_one("sheet S\nA1: 5.2\nB1: 4.5\nC1: 5\nD1: =AVERAGE(A1:C1)\n", "D1")) == "4.9");
    CHECK(eval_one("sheet S\nA1: 1\nB1: x\n", "B1") == Value(std::string("x")));
    CHECK(eval_one("sheet S\nA1: =B1\nB1: =A1\n", "A1") == err(ErrorKind::Cycle));
    CHECK(eval_one("sheet S\nA1: =B1\nB1: =A1\n", "B1") == err(ErrorKind::Cycle));
    CHECK(eval_one("sheet S\nA1: =A1\nB1: =A1+1\nC1: 3\n", "B1") == err(ErrorKind::Cycle));
    CHECK(eval_one("sheet S\nA1: =1/0\n", "A1") == err(ErrorKind::Div0));
    CHECK(eval_one("sheet S\nA1: =FOO(1)\n", "A1") == err(ErrorKind::Name));
    CHECK(eval_one("sheet S\nA1: =Nope!B1\n", "A1") == err(ErrorKind::Ref));
    CHECK(eval_one("sheet S\nA1: =#REF!\n", "A1") == err(ErrorKind::Ref));
    CHECK(eval_one("sheet S\nA1: =B1+1\n", "A1") == Value(1.0));
    CHECK(eval_one("sheet S\nA1: =B1:C1\n", "A1") == err(ErrorKind::Value));
    CHECK(eval_one("sheet S\nA1: =\"a\"+1\n", "A1") == err(ErrorKind::Value));
    CHECK(eval_one("sheet S\nA1: =TRUE+1\n", "A1") == Value(2.0));
    CHECK(eval_one("sheet S\nA1: =\"n=\"&2.5&TRUE\n", "A1") == Value(std::string("n=2.5TRUE")));
}

TEST_CASE("functions") {
    std::string base = "sheet S\nA1: 1\nA2: 2\nA3: x\nA5: true\nB1: 4\n";
    CHECK(eval_one(base + "C1: =SUM(A1:A2,B1,10)\n", "C1") == Value(17.0));
    CHECK(eval_one(base + "C1: =SUM(A1:A3)\n", "C1") == err(ErrorKind::Value));
    CHECK(eval_one(base + "C1: =SUM(A4)\n", "C1") == Value(0.0));
    CHECK(eval_one(base + "C1: =SUM(A5,A1)\n", "C1") == Value(2.0));
    CHECK(eval_one(base + "C1: =AVERAGE(A1:A2,A4)\n", "C1") == Value(1.5));
    CHECK(eval_one(base + "C1: =AVERAGE(D1:D9)\n", "C1") == err(ErrorKind::Div0));
    CHECK(eval_one(base + "C1: =IF(A1>0,\"pos\",\"neg\")\n", "C1") == Value(std::string("pos")));
    CHECK(eval_one(base + "C1: =IF(0,1)\n", "C1") == Value(false));
    CHECK(eval_one(base + "C1: =IF(A3,1,2)\n", "C1") == err(ErrorKind::Value));
    CHECK(eval_one(base + "C1: =IF(TRUE,1,1/0)\n", "C1") == err(ErrorKind::Div0));
    CHECK(eval_one(base + "C1: =IF(1)\n", "C1") == err(ErrorKind::Value));
    CHECK(eval_one(base + "C1: =NOT(A4)\n", "C1") == Value(true));
    CHECK(eval_one(base + "C1: =AND(A1,A2,TRUE)\n", "C1") == Value(true));
    CHECK(eval_one(base + "C1: =OR(0,A4:A4)\n", "C1") == Value(false));
    CHECK(eval_one(base + "C1: =AND()\n", "C1") == err(ErrorKind::Value));
    CHECK(eval_one(base + "C1: =OR(A3)\n", "C1") == err(ErrorKind::Value));
    CHECK(eval_one(base + "C1: =average(A1:A2)\n", "C1") == Value(1.5));
}

TEST_CASE("comparisons and logic") {
    std::string s = "sheet S\nA1: 1\nB1: abc\n";
    CHECK(eval_one(s + "C1: =A1=1\n", "C1") == Value(true));
    CHECK(eval_one(s + "C1: =A1==\"1\"\n", "C1") == Value(false));
    CHECK(eval_one(s + "C1: =A1<>\"1\"\n", "C1") == Value(true));
    CHECK(eval_one(s + "C1: =A1<\"1\"\n", "C1") == err(ErrorKind::Value));
    CHECK(eval_one(s + "C1: =B1<\"abd\"\n", "C1") == Value(true));
    CHECK(eval_one(s + "C1: =FALSE<TRUE\n", "C1") == Value(true));
    CHECK(eval_one(s + "C1: =A1>=1&&B1=\"abc\"\n", "C1") == Value(true));
    CHECK(eval_one(s + "C1: =0||0\n", "C1") == Value(false));
    CHECK(eval_one(s + "C1: =!A1\n", "C1") == Value(false));
    CHECK(eval_one(s + "C1: =B1&&1\n", "C1") == err(ErrorKind::Value));
    CHECK(eval_one(s + "C1: =(1/0)=(0/0)\n", "C1") == err(ErrorKind::Div0));
}

TEST_CASE("errors propagate left to right") {
    CHECK(eval_one("sheet S\nA1: =FOO()+1/0\n", "A1") == err(ErrorKind::Name));
    CHECK(eval_one("sheet S\nA1: =1/0+FOO()\n", "A1") == err(ErrorKind::Div0));
    CHECK(eval_one("sheet S\nA1: =SUM(B1,C1)\nB1: =1/0\nC1: =FOO()\n", "A1") == err(ErrorKind::Div0));
}

TEST_CASE("evaluation matches the recursive oracle") {
    gen::Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        gen::WorkbookShape shape;
        shape.acyclic = i % 2 == 0;
        Workbook wb = gen::workbook(rng, shape);
        REQUIRE(evaluate_workbook(wb) == oracle::evaluate(wb));
    }
}

TEST_CASE("evaluation ignores storage order") {
    gen::Rng rng(19);
    for (int i = 0; i < 100; ++i) {
        gen::WorkbookShape shape;
        shape.acyclic = false;
        shape.sheets = 1;
        Workbook wb = gen::workbook(rng, shape);
        // Transposing the sheet changes the cell storage order; values must travel with their cells.
        Worksheet t("S1");
        std::function<CellPos(CellPos)> tr = [](CellPos p) { return CellPos{p.row, p.col}; };
        AddressMap map = [&](std::string_view, CellPos p) { return tr(p); };
        bool ok = true;
        for (const auto& [p, c] : wb.sheet(0).cells()) {
            if (const Formula* f = c.as_formula()) {
                FormulaAst moved = rewrite_references(f->ast(), "S1", map);
                ok = ok && print_formula(moved).find("#REF!") == std::string::npos;
                t.set(tr(p), CellContent::formula(moved));
            } else {
                t.set(tr(p), c);
            }
        }
        if (!ok) continue;
        Workbook twb(std::vector<Worksheet>{t});
        auto a = evaluate_workbook(wb);
        auto b = evaluate_workbook(twb);
        for (const auto& [addr, v] : a.values()) {
            const Value* w = b.find({0, tr(addr.pos)});
            REQUIRE(w);
            // Transposing changes range traversal order, so SUM/AVERAGE may round differently.
            if (is_number(v) && is_number(*w)) {
                REQUIRE(std::abs(std::get<double>(v) - std::get<double>(*w)) <= 1e-9 * (1 + std::abs(std::get<double>(v))));
            } else {
                REQUIRE(v == *w);
            }
        }
    }
}

TEST_CASE("poisoning an input reaches exactly its dependents") {
    gen::Rng rng(23);
    for (int i = 0; i < 150; ++i) {
        gen::WorkbookShape shape;
        Workbook wb = gen::workbook(rng, shape);
        std::vector<CellAddr> literals;
        for (int s = 0; s < wb.sheet_count(); ++s) {
            for (const auto& [p, c] : wb.sheet(s).cells()) {
                if (!c.as_formula()) literals.push_back({s, p});
            }
        }
        if (literals.empty()) continue;
        CellAddr victim = literals[rng() % literals.size()];
        Workbook poisoned = with_cell(wb, victim, CellContent::formula("=#VALUE!"));
        // Dependents found by a fixpoint over direct references.
        std::set<CellAddr> reach{victim};
        bool grew = true;
        while (grew) {
            grew = false;
            for (int s = 0; s < poisoned.sheet_count(); ++s) {
                for (const auto& [p, c] : poisoned.sheet(s).cells()) {
                    const Formula* f = c.as_formula();
                    if (!f || reach.count({s, p})) continue;
                    bool hits = false;
                    auto sheet_of = [&](const std::optional<std::string>& n) {
                        return n ? poisoned.find_sheet(*n) : std::optional<int>(s);
                    };
                    for_each_reference(
                        f->ast(), [&](const CellRef& r) { hits = hits || reach.count({sheet_of(r.sheet).value_or(-1), r.pos}); },
                        [&](const RangeRef& r) {
                            for (const auto& a : reach) hits = hits || (a.sheet == sheet_of(r.sheet).value_or(-1) && r.rect.contains(a.pos));
                        });
                    if (hits) {
                        reach.insert({s, p});
                        grew = true;
                    }
                }
            }
        }
        auto before = evaluate_workbook(wb);
        auto after = evaluate_workbook(poisoned);
        for (const auto& [addr, v] : after.values()) {
            if (reach.count(addr)) {
                // An earlier operand may fail first, so the kind can differ, but it is an error.
                REQUIRE(is_error(v));
            } else {
                REQUIRE(v == *before.find(addr));
            }
        }
        REQUIRE(*after.find(victim) == err(ErrorKind::Value));
    }
}
