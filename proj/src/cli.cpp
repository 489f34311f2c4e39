#include "aosheet/cli.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "aosheet/aspect.hpp"
#include "aosheet/evaluator.hpp"
#include "aosheet/matcher.hpp"
#include "aosheet/wbk.hpp"
#include "aosheet/weaver.hpp"

namespace aosheet {

namespace {

// Domain failure already formatted for the user.
struct CliFailure {
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliFailure{path + ": cannot open file"};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Splits CSV records (RFC 4180 quoting, CRLF or LF line ends).
std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw CliFailure{"unterminated quoted CSV field"};
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

struct Inputs {
    std::string workbook_path;
    std::vector<std::string> aspect_paths;
    std::string output;
    std::string report_format = "text";
    bool diff = false;
    bool show_values = false;
    bool import_csv = false;
};

Workbook load_input(const Inputs& in) {
    std::string text = read_file(in.workbook_path);
    if (in.import_csv) {
        std::string name = std::filesystem::path(in.workbook_path).stem().string();
        try {
            return import_csv(text, name);
        } catch (const std::exception& e) {
            throw CliFailure{in.workbook_path + ": " + e.what()};
        }
    }
    try {
        return load_workbook(text);
    } catch (const WbkError& e) {
        throw CliFailure{in.workbook_path + ":" + e.what()};
    }
}

std::string where(const std::string& path, SourcePos pos) {
    return path + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

std::optional<AspectDef> parse_aspect_file(const std::string& path, std::ostream& err) {
    std::string text = read_file(path);
    try {
        return parse_aspect(text);
    } catch (const AspectSyntaxError& e) {
        err << path << ":" << e.what() << "\n";
        return std::nullopt;
    }
}

std::vector<AspectDef> load_aspects(const Inputs& in, std::ostream& err) {
    std::vector<AspectDef> out;
    bool failed = false;
    for (const auto& path : in.aspect_paths) {
        auto aspect = parse_aspect_file(path, err);
        if (!aspect) {
            failed = true;
            continue;
        }
        for (const auto& d : validate(*aspect)) {
            err << where(path, d.pos) << ": " << d.message << "\n";
            failed = true;
        }
        out.push_back(std::move(*aspect));
    }
    if (failed) throw CliFailure{};
    return out;
}

int cmd_weave(const Inputs& in, std::ostream& out, std::ostream& err) {
    Workbook wb = load_input(in);
    auto aspects = load_aspects(in, err);
    WeaveResult result;
    try {
        result = weave(wb, aspects);
    } catch (const WeaveError& e) {
        throw CliFailure{std::string("weave failed: ") + e.what()};
    }
    std::string woven = save_workbook(result.workbook);
    std::ostream* info = &out;
    if (in.output.empty()) {
        out << woven;
        info = &err;
    } else {
        std::ofstream f(in.output, std::ios::binary);
        if (!f) throw CliFailure{in.output + ": cannot write file"};
        f << woven;
        if (!f) throw CliFailure{in.output + ": write failed"};
    }
    if (in.report_format == "json") {
        *info << result.report.to_json().dump(2) << "\n";
    } else {
        *info << result.report.to_text();
    }
    if (in.diff) *info << diff_workbooks(wb, result.workbook);
    if (in.show_values) *info << render_values(result.workbook);
    return kExitOk;
}

int cmd_eval(const Inputs& in, std::ostream& out) {
    out << render_values(load_input(in));
    return kExitOk;
}

std::string describe_bindings(const Workbook& wb, const Match& m) {
    std::string s = "sheet=" + wb.sheet(m.env.sheet()).name();
    if (const auto& r = m.env.range()) s += " " + std::string(range_kind_keyword(r->kind)) + "=" + format_rect(r->rect);
    if (const auto& c = m.env.cell()) s += " cell=" + format_a1(c->pos);
    return s;
}

int cmd_match(const Inputs& in, std::ostream& out, std::ostream& err) {
    Workbook wb = load_input(in);
    auto aspects = load_aspects(in, err);
    ValueGrid grid = evaluate_workbook(wb);
    for (const auto& aspect : aspects) {
        for (const auto& pc : aspect.pointcuts) {
            auto matches = enumerate_join_points(wb, grid, pc);
            out << aspect.name << "." << pc.name << ": " << matches.size()
                << (matches.size() == 1 ? " match" : " matches") << "\n";
            for (const auto& m : matches) {
                out << "  " << m.join_point.describe(wb) << "  " << describe_bindings(wb, m) << "\n";
            }
        }
    }
    return kExitOk;
}

int cmd_check(const Inputs& in, std::ostream& out, std::ostream& err) {
    bool ok = true;
    for (const auto& path : in.aspect_paths) {
        auto aspect = parse_aspect_file(path, err);
        if (!aspect) {
            ok = false;
            continue;
        }
        auto diags = validate(*aspect);
        for (const auto& d : diags) err << where(path, d.pos) << ": " << d.message << "\n";
        if (diags.empty()) out << path << ": ok\n";
        ok = ok && diags.empty();
    }
    return ok ? kExitOk : kExitFailure;
}

}  // namespace

Workbook import_csv(std::string_view text, const std::string& sheet_name) {
    Worksheet ws(sheet_name);
    auto rows = parse_csv(text);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (rows[r][c].empty()) continue;
            ws.set({static_cast<int>(c), static_cast<int>(r)}, parse_cell_content(rows[r][c]));
        }
    }
    Workbook wb;
    wb.add_sheet(std::move(ws));
    return wb;
}

std::string render_values(const Workbook& wb) {
    ValueGrid grid = evaluate_workbook(wb);
    std::ostringstream out;
    for (int s = 0; s < wb.sheet_count(); ++s) {
        const Worksheet& sheet = wb.sheet(s);
        if (s) out << "\n";
        out << sheet.name() << "\n";
        auto used = sheet.used_region();
        if (!used) continue;
        // Row labels, then one column per sheet column, each as wide as its widest entry.
        std::vector<std::vector<std::string>> table;
        table.push_back({""});
        for (int c = used->first.col; c <= used->last.col; ++c) table[0].push_back(column_letters(c));
        for (int r = used->first.row; r <= used->last.row; ++r) {
            std::vector<std::string> line{std::to_string(r + 1)};
            for (int c = used->first.col; c <= used->last.col; ++c) {
                const Value* v = grid.find({s, {c, r}});
                line.push_back(v ? display_value(*v) : "");
            }
            table.push_back(std::move(line));
        }
        std::vector<std::size_t> width(table[0].size(), 0);
        for (const auto& line : table) {
            for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
        }
        for (const auto& line : table) {
            std::string text;
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (i) text += "  ";
                text += line[i];
                text.append(width[i] - line[i].size(), ' ');
            }
            while (!text.empty() && text.back() == ' ') text.pop_back();
            out << text << "\n";
        }
    }
    return out.str();
}

std::string diff_workbooks(const Workbook& before, const Workbook& after) {
    std::ostringstream out;
    for (const auto& sheet : before.sheets()) {
        if (!after.find_sheet(sheet.name())) out << "- sheet " << sheet.name() << "\n";
    }
    for (const auto& sheet : after.sheets()) {
        auto old_index = before.find_sheet(sheet.name());
        if (!old_index) {
            out << "+ sheet " << sheet.name() << "\n";
            for (const auto& [pos, content] : sheet.cells()) {
                out << "+ " << sheet.name() << "!" << format_a1(pos) << ": " << format_cell_content(content) << "\n";
            }
            continue;
        }
        const Worksheet& old = before.sheet(*old_index);
        std::set<CellPos> positions;
        for (const auto& [pos, c] : old.cells()) positions.insert(pos);
        for (const auto& [pos, c] : sheet.cells()) positions.insert(pos);
        for (CellPos pos : positions) {
            const CellContent* a = old.find(pos);
            const CellContent* b = sheet.find(pos);
            std::string addr = sheet.name() + "!" + format_a1(pos);
            if (!a) {
                out << "+ " << addr << ": " << format_cell_content(*b) << "\n";
            } else if (!b) {
                out << "- " << addr << ": " << format_cell_content(*a) << "\n";
            } else if (!(*a == *b)) {
                out << addr << ": " << format_cell_content(*a) << " -> " << format_cell_content(*b) << "\n";
            }
        }
    }
    return out.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Aspect weaver for spreadsheets", "aosheet"};
    app.require_subcommand(1);
    Inputs in;

    auto* weave_cmd = app.add_subcommand("weave", "Weave aspects into a workbook");
    weave_cmd->add_option("workbook", in.workbook_path, "Input workbook (.wbk, or CSV with --import-csv)")->required();
    weave_cmd->add_option("-a,--aspect", in.aspect_paths, "Aspect file; repeat to weave several, in order")->required();
    weave_cmd->add_option("-o,--output", in.output, "Woven workbook path (default: standard output)");
    weave_cmd->add_option("--report-format", in.report_format, "Report format")
        ->check(CLI::IsMember({"text", "json"}));
    weave_cmd->add_flag("--diff", in.diff, "Print cell-level differences");
    weave_cmd->add_flag("--show-values", in.show_values, "Print evaluated values of the woven workbook");
    weave_cmd->add_flag("--import-csv", in.import_csv, "Read the input as CSV");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a workbook and print its values");
    eval_cmd->add_option("workbook", in.workbook_path, "Input workbook")->required();
    eval_cmd->add_flag("--import-csv", in.import_csv, "Read the input as CSV");

    auto* match_cmd = app.add_subcommand("match", "List join points selected by each pointcut");
    match_cmd->add_option("workbook", in.workbook_path, "Input workbook")->required();
    match_cmd->add_option("-a,--aspect", in.aspect_paths, "Aspect file")->required();
    match_cmd->add_flag("--import-csv", in.import_csv, "Read the input as CSV");

    auto* check_cmd = app.add_subcommand("check", "Parse and validate aspect files");
    check_cmd->add_option("-a,--aspect", in.aspect_paths, "Aspect file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (weave_cmd->parsed()) return cmd_weave(in, out, err);
        if (eval_cmd->parsed()) return cmd_eval(in, out);
        if (match_cmd->parsed()) return cmd_match(in, out, err);
        return cmd_check(in, out, err);
    } catch (const CliFailure& f) {
        if (!f.message.empty()) err << f.message << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace aosheet
