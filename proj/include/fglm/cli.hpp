#pragma once

#include <filesystem>
#include <iosfwd>

#include "fglm/datagen.hpp"

namespace fglm {

/// Dataset CSV: header `y,lambda,x1,...,xK`, one observation per row.
void write_dataset_csv(const Dataset& ds, std::ostream& out);

/// Reads the `y` column and every `x<k>` column (in file order); other columns are
/// ignored. Throws ValidationError on malformed input.
Dataset read_dataset_csv(std::istream& in);

/// Entry point for the `fglm` tool. Exit codes: 0 success, 1 usage or validation
/// error, 2 runtime failure (including certification checks that find violations).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fglm
