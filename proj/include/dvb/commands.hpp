#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "dvb/pricer.hpp"

namespace dvb {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidationFailed = 1,  ///< closed form and Monte Carlo disagree
    kExitInputError = 2,
    kExitNumericalFailure = 3,
};

/// Column order of `price` and `sweep` CSV output (sweep prefixes axis, value).
const std::vector<std::string>& price_csv_columns();

/// One CSV row for a priced scenario, fields formatted with 15 significant digits.
std::string price_csv_row(const std::string& scenario, const PriceResult& result, double spread);

/// Runs `dvbond <args...>`; argv[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dvb
