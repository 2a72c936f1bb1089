#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "edis/error.hpp"
#include "edis/spikes.hpp"
#include "edis/trajectory.hpp"
#include "json.hpp"

namespace edis::cli {

/// Process exit codes. Listed in `edis --help`.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,  // unexpected failure
  kUsage = 2,     // unknown flag, conflicting options, bad option value
  kInput = 3,     // missing or unreadable input, unwritable output
  kData = 4,      // malformed record or invalid distribution in the input
  kAnalysis = 5,  // data valid but the requested analysis is undefined
};

ExitCode exit_code_for(ErrorCode code) noexcept;

/// Runs one CLI invocation. `args` excludes the program name. Reports go to
/// `out` unless --out names a file; error records and warnings go to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// Per-response score record as emitted by `edis score`.
nlohmann::json score_record(const ResponseRecord& record, const SpikeConfig& cfg);

}  // namespace edis::cli
