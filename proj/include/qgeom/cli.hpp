#pragma once

namespace qgeom::cli {

// Exit codes: 0 success, 2 input error, 3 numerical error, 4 internal error.
int run(int argc, char** argv);

}  // namespace qgeom::cli
