#pragma once

#include <string>

#include "codim1/config.hpp"

namespace codim1 {

// exit status: 0 success, 2 flagged-indeterminate, throws on errors (mapped to 1)
int run(const std::string& subcommand, const RunConfig& cfg);

}  // namespace codim1
