#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace pacs {

/// Runs one `pacs` subcommand. `args` excludes the program name. Returns the
/// process exit code; diagnostics go to `err`.
int cli_dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace pacs
