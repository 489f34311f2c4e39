#include <doctest.h>

#include <fstream>
#include <sstream>

#include "aosheet/wbk.hpp"
#include "aosheet/weaver.hpp"
#include "generators.hpp"
#include "properties.hpp"

using namespace aosheet;

namespace {

std::string fixture(const std::string& name) {
    std::ifstream in(std::string(AOSHEET_FIXTURES) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

WeavePlan plan(const Workbook& wb, const AspectDef& a) { return plan_aspect(wb, evaluate_workbook(wb), a); }

Workbook woven(const std::string& wbk, const std::string& aspect) {
    return weave(load_workbook(wbk), {parse_aspect(aspect)}).workbook;
}

std::string text_at(const Workbook& wb, const std::string& a1, int sheet = 0) {
    const CellContent* c = wb.find({sheet, parse_a1(a1)});
    return c ? content_text(*c) : "";
}

Value value_at(const WeaveResult& r, const std::string& a1, int sheet = 0) {
    const Value* v = r.values.find({sheet, parse_a1(a1)});
    return v ? *v : Value(std::string("<none>"));
}

std::vector<std::string> sheet_names(const Workbook& wb) {
    std::vector<std::string> out;
    for (const auto& s : wb.sheets()) out.push_back(s.name());
    return out;
}

std::string row_text(const Workbook& wb, int row, int cols) {
    std::string out;
    for (int c = 0; c < cols; ++c) {
        if (c) out += "|";
        out += text_at(wb, format_a1({c, row}));
    }
    return out;
}

const std::string kBorderline = fixture("borderline_case.aspect");
const std::string kEcts = fixture("add_ects_mark.aspect");
const std::string kGrading = fixture("grading.wbk");

}  // namespace

TEST_CASE("borderline aspect plans one replacement") {
    Workbook wb = load_workbook(kGrading);
    WeavePlan p = plan(wb, parse_aspect(kBorderline));
    REQUIRE(p.actions.size() == 1);
    const auto* r = std::get_if<ReplaceCell>(&p.actions[0].action);
    REQUIRE(r);
    CHECK(r->addr == CellAddr{0, parse_a1("E3")});
    CHECK(r->content == CellContent::number(5));
    CHECK(p.actions[0].origin.where == "Grades!E3");
    CHECK(p.actions[0].origin.advice == 0);

    const AdviceReport& rep = p.report.advice.at(0);
    CHECK(rep.matches == 25);
    CHECK(rep.passed == 5);
    CHECK(rep.skipped == 20);
    CHECK(rep.guard_errors == 0);
    CHECK(rep.applied == 1);
    CHECK(rep.identity_elided == 4);
}

TEST_CASE("ects aspect plans cell insertions to the right") {
    Workbook wb = load_workbook(kGrading);
    WeavePlan p = plan(wb, parse_aspect(kEcts));
    REQUIRE(p.actions.size() == 5);
    for (int i = 0; i < 4; ++i) {
        const auto& ins = std::get<InsertCell>(p.actions[static_cast<std::size_t>(i)].action);
        std::string e = "E" + std::to_string(i + 2);
        CHECK(ins.addr.pos == parse_a1(e));
        CHECK(ins.side == Side::Right);
        REQUIRE(ins.content.as_formula());
        CHECK(content_text(ins.content).rfind("=IF(" + e + "<=10&&" + e + ">=9.5,\"A\",", 0) == 0);
    }
    const auto& header = std::get<InsertCell>(p.actions[4].action);
    CHECK(header.addr.pos == parse_a1("E1"));
    CHECK(header.content == CellContent::text("ECTS Mark"));
    CHECK(p.report.advice[0].applied == 4);
    CHECK(p.report.advice[1].applied == 1);

    Workbook out = apply_plan(wb, p);
    CHECK(text_at(out, "F1") == "ECTS Mark");
    for (const char* e : {"E2", "E3", "E4", "E5"}) CHECK(text_at(out, e) == text_at(wb, e));
}

TEST_CASE("both aspects in order reproduce the graded sheet") {
    Workbook wb = load_workbook(kGrading);
    WeaveResult r = weave(wb, {parse_aspect(kBorderline), parse_aspect(kEcts)});
    CHECK(value_at(r, "E3") == Value(5.0));
    CHECK(value_at(r, "F1") == Value(std::string("ECTS Mark")));
    CHECK(value_at(r, "F2") == Value(std::string("D")));
    CHECK(value_at(r, "F3") == Value(std::string("E")));
    CHECK(value_at(r, "F4") == Value(std::string("F")));
    CHECK(value_at(r, "F5") == Value(std::string("C")));
    CHECK(std::get<double>(value_at(r, "E2")) == doctest::Approx(6.2));
    CHECK(text_at(r.workbook, "F3").find("E3") != std::string::npos);
    REQUIRE(r.report.aspects.size() == 2);
    CHECK(r.report.aspects[0].name == "BorderlineCase");
    CHECK(r.report.aspects[1].name == "AddECTSMark");
}

TEST_CASE("reversed order keeps live formulas") {
    // The letter formulas reference E3 and recompute once the mark is adjusted, so the
    // borderline student's letter is E in either order. Only the matching differs.
    Workbook wb = load_workbook(kGrading);
    WeaveResult r = weave(wb, {parse_aspect(kEcts), parse_aspect(kBorderline)});
    CHECK(value_at(r, "E3") == Value(5.0));
    CHECK(value_at(r, "F3") == Value(std::string("E")));
    CHECK(r.report.aspects[1].advice[0].matches == 30);
    CHECK(r.report.aspects[1].advice[0].applied == 1);
}

TEST_CASE("guards that reject everything give an empty plan") {
    Workbook wb = load_workbook(kGrading);
    WeavePlan p = plan(wb, parse_aspect("aspect N p : select sheet{*}.cell{*} around p { 0 } when { cell.row > 99 } end"));
    CHECK(p.actions.empty());
    CHECK(p.report.advice[0].skipped == 25);
    CHECK(apply_plan(wb, p) == wb);
}

TEST_CASE("guard errors are counted, not fatal") {
    Workbook wb = load_workbook(kGrading);
    WeaveResult r = weave(wb, {parse_aspect("aspect G p : select sheet{*}.cell{*} right p { x } when { cell.result > 5 } end")});
    const auto& rep = r.report.aspects[0].advice[0];
    CHECK(rep.guard_errors == 9);
    CHECK(rep.errors.size() == 9);
    CHECK(rep.errors[0].rfind("Grades!A1: ", 0) == 0);
    CHECK(rep.matches == rep.passed + rep.skipped + rep.guard_errors);
    CHECK(rep.passed == 9);
    CHECK(rep.skipped == 7);
}

TEST_CASE("same-side advice: earlier declaration ends up outermost") {
    const std::string wbk = "sheet S\nA1: x\nB1: y\nA3: x\nA4: y\n";
    auto two = [](const std::string& side, const std::string& cell) {
        return "aspect P\np : select sheet{*}.cell{name = \"" + cell + "\"}\n" + side + " p { a }\n" + side +
               " p { b }\nend\n";
    };
    CHECK(row_text(woven(wbk, two("right", "A1")), 0, 4) == "x|b|a|y");
    CHECK(row_text(woven(wbk, two("left", "A1")), 0, 4) == "a|b|x|y");

    Workbook above = woven(wbk, two("above", "A3"));
    CHECK(text_at(above, "A3") == "a");
    CHECK(text_at(above, "A4") == "b");
    CHECK(text_at(above, "A5") == "x");
    CHECK(text_at(above, "A6") == "y");

    Workbook below = woven(wbk, two("below", "A3"));
    CHECK(text_at(below, "A3") == "x");
    CHECK(text_at(below, "A4") == "b");
    CHECK(text_at(below, "A5") == "a");
    CHECK(text_at(below, "A6") == "y");
}

TEST_CASE("insertions track join points displaced by earlier advice") {
    Workbook out = woven("sheet S\nA1: x\nB1: y\n",
                         "aspect T\n"
                         "a1 : select sheet{*}.cell{name = \"A1\"}\n"
                         "b1 : select sheet{*}.cell{name = \"B1\"}\n"
                         "right a1 { a }\n"
                         "right b1 { b }\n"
                         "left a1 { c }\n"
                         "end\n");
    CHECK(row_text(out, 0, 5) == "c|x|a|y|b");
}

TEST_CASE("new formulas are written against the snapshot and follow shifts") {
    WeaveResult r = weave(load_workbook("sheet S\nA1: 1\nB1: =A1\n"),
                          {parse_aspect("aspect L\n"
                                        "a1 : select sheet{*}.cell{name = \"A1\"}\n"
                                        "b1 : select sheet{*}.cell{name = \"B1\"}\n"
                                        "left a1 { 0 }\n"
                                        "around b1 { =A1+1 }\n"
                                        "end\n")});
    CHECK(text_at(r.workbook, "A1") == "0");
    CHECK(text_at(r.workbook, "B1") == "1");
    CHECK(text_at(r.workbook, "C1") == "=B1+1");
    CHECK(value_at(r, "C1") == Value(2.0));
}

TEST_CASE("around advice compose in declaration order") {
    const std::string wbk = "sheet S\nA1: 5\n";
    WeavePlan p = plan(load_workbook(wbk), parse_aspect("aspect C p : select sheet{*}.cell{*}\n"
                                                        "around p { #{cell.value}1 }\n"
                                                        "around p { #{cell.value}2 }\n"
                                                        "end\n"));
    REQUIRE(p.actions.size() == 2);
    CHECK(std::get<ReplaceCell>(p.actions[1].action).content == CellContent::number(512));
    CHECK(text_at(apply_plan(load_workbook(wbk), p), "A1") == "512");

    Workbook back = woven(wbk, "aspect C p : select sheet{*}.cell{*}\n"
                               "around p { 7 }\n"
                               "around p { #{cell.result} }\n"
                               "end\n");
    CHECK(text_at(back, "A1") == "5");

    WeavePlan same = plan(load_workbook(wbk), parse_aspect("aspect C p : select sheet{*}.cell{*}\n"
                                                           "around p { #{cell.value} }\n"
                                                           "around p { 5 }\n"
                                                           "end\n"));
    CHECK(same.actions.empty());
    CHECK(same.report.advice[0].identity_elided == 1);
    CHECK(same.report.advice[1].identity_elided == 1);
}

TEST_CASE("range advice") {
    const std::string wbk = "sheet S\nA1: 1\nB1: 10\nA2: 2\nB2: 20\nA3: 3\nB3: 30\nA4: 4\nB4: 40\n";
    auto with = [&](const std::string& advice) {
        return woven(wbk, "aspect R\nr : select sheet{*}.range{name = \"A1:A3\"}\n" + advice + "\nend\n");
    };

    SUBCASE("around replaces the whole rectangle") {
        Workbook out = woven(wbk, "aspect R r : select sheet{*}.range{name = \"A1:B2\"} around r { A1 = \"7\"; B2 = \"8\" } end");
        CHECK(row_text(out, 0, 2) == "7|");
        CHECK(row_text(out, 1, 2) == "|8");
        CHECK(row_text(out, 2, 2) == "3|30");
    }
    SUBCASE("around may not grow the rectangle") {
        CHECK_THROWS_AS(with("around r { A1 = \"1\"; B1 = \"2\" }"), WeaveError);
    }
    SUBCASE("right pads to the range height") {
        Workbook out = with("right r { A1 = \"p\" }");
        CHECK(row_text(out, 0, 3) == "1|p|10");
        CHECK(row_text(out, 1, 3) == "2||20");
        CHECK(row_text(out, 2, 3) == "3||30");
        CHECK(row_text(out, 3, 3) == "4|40|");
    }
    SUBCASE("below pads to the range width") {
        Workbook out = woven(wbk, "aspect R r : select sheet{*}.range{name = \"A1:B1\"} below r { B1 = \"q\" } end");
        CHECK(row_text(out, 1, 2) == "|q");
        CHECK(row_text(out, 2, 2) == "2|20");
        CHECK(row_text(out, 4, 2) == "4|40");
    }
    SUBCASE("left and above insert before the range") {
        CHECK(row_text(with("left r { A1 = \"l\"; A3 = \"m\" }"), 2, 3) == "m|3|30");
        Workbook above = woven(wbk, "aspect R r : select sheet{*}.range{name = \"A2:B2\"} above r { total } end");
        CHECK(row_text(above, 1, 2) == "total|");
        CHECK(row_text(above, 2, 2) == "2|20");
    }
    SUBCASE("entries outside the band are rejected") {
        CHECK_THROWS_AS(with("right r { A4 = \"z\" }"), WeaveError);
        Workbook two_wide = with("right r { B1 = \"z\" }");
        CHECK(row_text(two_wide, 0, 4) == "1||z|10");
    }
    SUBCASE("column totals") {
        WeaveResult r = weave(load_workbook(wbk), {parse_aspect("aspect T c : select sheet{*}.column{*} below c { =SUM(#{range.name}) } end")});
        CHECK(text_at(r.workbook, "A5") == "=SUM(A1:A4)");
        CHECK(text_at(r.workbook, "B5") == "=SUM(B1:B4)");
        CHECK(value_at(r, "B5") == Value(100.0));
    }
}

TEST_CASE("sheet advice") {
    const std::string wbk = "sheet One\nA1: 1\nsheet Two\nA1: =One!A1*2\n";
    auto names = [&](const std::string& aspect) { return sheet_names(woven(wbk, aspect)); };
    using Names = std::vector<std::string>;
    const std::string pc = "aspect S s : select sheet{name = \"One\"} ";

    CHECK(names(pc + "after s { A1 = \"x\" } end") == Names{"One", "One-woven", "Two"});
    CHECK(names(pc + "intro : before s { A1 = \"x\" } end") == Names{"intro", "One", "Two"});
    CHECK(names(pc + "after s { copy Two } end") == Names{"One", "Two-woven", "Two"});
    CHECK(names(pc + "before s { copy One } end") == Names{"One-woven", "One", "Two"});
    CHECK(names(pc + "around s { copy One } end") == Names{"One", "Two"});
    CHECK(names(pc + "around s { copy Two } end") == Names{"Two-woven", "Two"});
    CHECK(names(pc + "after s { A1 = \"a\" } after s { A1 = \"b\" } end") ==
          Names{"One", "One-woven-2", "One-woven", "Two"});
    CHECK(names(pc + "before s { A1 = \"a\" } before s { A1 = \"b\" } end") ==
          Names{"One-woven", "One-woven-2", "One", "Two"});

    WeaveResult r = weave(load_workbook(wbk), {parse_aspect(pc + "around s { B2 = \"#{sheet.number}\"; A1 = \"4\" } end")});
    CHECK(sheet_names(r.workbook) == Names{"One", "Two"});
    CHECK(text_at(r.workbook, "B2") == "1");
    CHECK(value_at(r, "A1", 1) == Value(8.0));

    CHECK_THROWS_AS(woven(wbk, pc + "after s { copy Missing } end"), WeaveError);
}

TEST_CASE("snapshot semantics: woven content is not matched again") {
    WeaveResult r = weave(load_workbook("sheet S\nA1: 1\nA2: 2\n"),
                          {parse_aspect("aspect Grow p : select sheet{*}.cell{*}\n"
                                        "right p { #{cell.value} }\n"
                                        "below p { n }\n"
                                        "end\n")});
    CHECK(r.report.aspects[0].advice[0].matches == 2);
    CHECK(r.report.aspects[0].advice[1].matches == 2);
    CHECK(r.workbook.sheet(0).cells().size() == 6);
    CHECK(row_text(r.workbook, 0, 2) == "1|1");
    CHECK(text_at(r.workbook, "A2") == "n");
    CHECK(text_at(r.workbook, "A3") == "2");
    CHECK(text_at(r.workbook, "A4") == "n");
}

TEST_CASE("planning errors carry provenance and abort the weave") {
    Workbook wb = load_workbook(kGrading);
    try {
        weave(wb, {parse_aspect("aspect Bad p : select sheet{*}.cell{name = \"E3\"} around p { =SUM(#{cell.name} } end")});
        FAIL("expected a weave error");
    } catch (const WeaveError& e) {
        std::string msg = e.what();
        CHECK(msg.find("aspect Bad, advice #1") != std::string::npos);
        CHECK(msg.find("Grades!E3") != std::string::npos);
    }
    CHECK_THROWS_AS(weave(wb, {parse_aspect("aspect V p : select sheet{*} left p { x } end")}), WeaveError);
}

TEST_CASE("report serialization reconciles") {
    WeaveResult r = weave(load_workbook(kGrading), {parse_aspect(kBorderline), parse_aspect(kEcts)});
    nlohmann::json j = r.report.to_json();
    REQUIRE(j["aspects"].size() == 2);
    CHECK(j["aspects"][0]["aspect"] == "BorderlineCase");
    for (const auto& a : j["aspects"]) {
        for (const auto& adv : a["advice"]) {
            CHECK(adv["matches"].get<int>() ==
                  adv["passed"].get<int>() + adv["skipped"].get<int>() + adv["guard_errors"].get<int>());
        }
    }
    CHECK(j["aspects"][1]["advice"][1]["ordinal"] == 2);
    CHECK(j["aspects"][1]["advice"][1]["applied"] == 1);
    CHECK(j["aspects"][0]["advice"][0]["name"].is_null());
    std::string text = r.report.to_text();
    CHECK(text.find("advice #1 (around finalmark): 25 matched, 5 passed, 20 skipped, 0 guard errors, 1 actions, 4 unchanged") !=
          std::string::npos);
}

TEST_CASE("weaving is pure and deterministic") {
    gen::Rng rng(99);
    for (int i = 0; i < 150; ++i) {
        Workbook wb = gen::workbook(rng, {});
        Workbook copy = wb;
        AspectDef a = prop::mixed_aspect(rng, wb);
        WeaveResult first = weave(wb, {a});
        CHECK(wb == copy);
        WeaveResult second = weave(wb, {a});
        CHECK(first.workbook == second.workbook);
        CHECK(first.values == second.values);
        CHECK(weave(wb, {}).workbook == wb);
    }
}

TEST_CASE("identity around is evaluation-equivalent") {
    gen::Rng rng(5);
    for (const char* pc : {"sheet{*}.cell{*}", "sheet{*}.column{*}.cell{*}", "sheet{*}.row{*}.cell{*}"}) {
        for (int i = 0; i < 40; ++i) {
            Workbook wb = gen::workbook(rng, {});
            WeaveResult r = weave(wb, {parse_aspect(std::string("aspect I p : select ") + pc + " around p { #{cell.value} } end")});
            CHECK(r.values == evaluate_workbook(wb));
            CHECK(r.workbook == wb);
        }
    }
}

TEST_CASE("insertions preserve existing formula values") {
    gen::Rng rng(11);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        Workbook wb = gen::workbook(rng, {});
        AspectDef a = prop::insertion_aspect(rng, wb);
        prop::Preservation p = prop::insertion_preserves(wb, a);
        CAPTURE(print_aspect(a));
        CAPTURE(save_workbook(wb));
        CHECK(p.failures.empty());
        if (!p.failures.empty()) MESSAGE(p.failures.front());
        checked += p.checked;
    }
    CHECK(checked > 500);
}
