#pragma once

#include <ostream>

namespace jackprobe::cli {

/// Runs one jackprobe command. Returns 0 on success, 1 on a domain error
/// (a JSON {error, detail} document goes to the report channel) and 2 on a
/// usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jackprobe::cli
