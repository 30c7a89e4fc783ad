#pragma once

#include <iosfwd>

namespace verify {

/// Entry point of `verify <equivalence|depth|flow|convergence> [flags]`.
///
/// Writes report.json and per-run CSVs under --out, prints one summary line
/// per cell. Exit status: 0 when every cell passes, 1 when a cell fails or a
/// run diverges, 2 for unusable arguments or configs.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace verify
