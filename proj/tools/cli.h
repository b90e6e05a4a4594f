#ifndef SCOPECOMPLETE_TOOLS_CLI_H_
#define SCOPECOMPLETE_TOOLS_CLI_H_

#include <iosfwd>
#include <vector>
#include <string>

namespace scopecomplete {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

// Subcommands: serve, replay, sim run, report, corpus. `args` excludes the
// program name. `in`/`out` are the protocol streams for serve and the default
// output for the others; diagnostics go to `err`.
int cli_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err);

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_TOOLS_CLI_H_
