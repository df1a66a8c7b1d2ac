#pragma once

#include <iosfwd>
#include <string>

#include "ggl/config.hpp"

namespace ggl {

// Hex SHA-1 of "blob <size>\0<content>", the hash git assigns to a file.
std::string git_blob_hash(const std::string& content);

// Executes the configured mode, writing the manifest and CSV outputs into
// output.dir and a short report to `out`. Throws on any failure.
void execute(const Config& cfg, std::ostream& out);

// Exit codes of run().
enum ExitCode { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_unsupported = 3, exit_numerical = 4 };

// execute() with errors reported as a single `error: <kind>: <message>` line.
int run(const Config& cfg, std::ostream& out, std::ostream& err);
int run(const std::string& config_path, std::ostream& out, std::ostream& err);

}  // namespace ggl
