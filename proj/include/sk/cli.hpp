#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sk::cli {

// Exit codes: 0 success, 1 toolkit error (one "error kind=... message=..."
// line on err), 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace sk::cli
