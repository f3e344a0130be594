#pragma once

namespace gm {

// Entry point of the gmeta executable. Exit codes: 0 success, 1 validation
// or usage error, 2 I/O error.
int run_cli(int argc, const char* const* argv);

}  // namespace gm
