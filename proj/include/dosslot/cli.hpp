#pragma once

#include <ostream>

namespace dosslot::cli {

enum ExitCode : int {
  kSuccess = 0,
  kIoError = 1,
  kDataQuality = 2,
  kConfigError = 3,
};

// Entry point of the dosctl tool. Never throws; failures map to ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dosslot::cli
