#pragma once

#include <ostream>

namespace sogt {

/// Command line front end. Exit codes: 0 ok, 1 failed check, 2 usage error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sogt
