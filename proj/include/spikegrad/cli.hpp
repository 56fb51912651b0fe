#pragma once

#include <ostream>

namespace spikegrad {

/// Exit codes: 0 success, 1 runtime failure (missing file, bad data, checkpoint
/// mismatch, training abort), 2 usage or configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

/// Entry point of the `spikegrad` tool; commands train, eval, analyze and
/// gen-synthetic. Kept in the library so tests can drive it in-process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spikegrad
