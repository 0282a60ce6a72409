#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ranklaw/fit.hpp"
#include "ranklaw/rank.hpp"

namespace ranklaw::cli {

enum class Command { ingest, describe, rank, corr, fit, regime, simulate, report };
enum class Format { text, machine };

Command parse_command(const std::string& s);
std::string to_string(Command c);

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  Command command = Command::report;
  std::string input;
  std::string population;
  std::string merges;
  std::string expected;  // JSON of expected correlation values (corr, report)
  std::string out_dir;   // empty: $RANKLAW_OUT_DIR, then "."
  Format format = Format::text;

  fit::ModelKind model = fit::ModelKind::lavalette3;
  std::optional<double> A;
  fit::Scale scale = fit::Scale::log;
  std::size_t drop_top = 0;
  rank::TieBreak ties = rank::TieBreak::lexical_name;
  int k_lines = 2;
  std::vector<std::string> exclude;

  std::uint64_t seed = 0;
  std::int64_t urns = 20;
  std::int64_t balls = 8092;
  double attach = 1.0;  // urn attachment offset a
  std::int64_t k0 = 1;
  std::optional<std::int64_t> capacity;
  int replicates = 1;
};

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> artifacts;  // paths written
  std::string error;                   // module-qualified message on failure
};

/// Executes one command. Artifacts go to the output directory; on failure
/// every file written by this run is removed and exit_code is non-zero.
RunResult run(const RunConfig& config);

/// Parses argv with CLI11 and runs; prints errors to stderr.
int main_entry(int argc, char** argv);

}  // namespace ranklaw::cli
