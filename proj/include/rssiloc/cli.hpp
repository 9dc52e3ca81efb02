#pragma once

#include <ostream>

namespace rssiloc::cli {

/// Entry point of the `rssiloc` tool. Returns the process exit code: 0 when
/// every requested cell completed, nonzero otherwise with a one-line JSON
/// error summary on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rssiloc::cli
