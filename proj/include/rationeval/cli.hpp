#pragma once

namespace rationeval::cli {

// argv-style entry point. Maps library errors to the documented exit codes:
// 0 success, 2 config, 3 data, 4 judge endpoint, 5 internal invariant.
int run_cli(int argc, char** argv);

}  // namespace rationeval::cli
