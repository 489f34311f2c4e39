#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "aosheet/workbook.hpp"

namespace aosheet {

/// Exit codes of the command-line tool.
enum ExitCode { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Runs `aosheet <command> ...`; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// CSV text as one sheet; every field goes through the WBK content rules.
Workbook import_csv(std::string_view text, const std::string& sheet_name);

/// Evaluated values of every sheet as aligned text grids.
std::string render_values(const Workbook& wb);

/// Cell-level differences between two workbooks, sheets matched by name.
///
///     Grades!E3: =AVERAGE(B3:D3) -> 5
///     + Grades!F1: ECTS Mark
std::string diff_workbooks(const Workbook& before, const Workbook& after);

}  // namespace aosheet
