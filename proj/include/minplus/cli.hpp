#ifndef MINPLUS_CLI_HPP
#define MINPLUS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace minplus {

/// Command-line front end. Exit codes: 0 success / positive verdict,
/// 1 negative verdict (inequivalent, rejected, nothing found), 2 input or
/// parse error, 3 budget or state-cap exhausted.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace minplus

#endif  // MINPLUS_CLI_HPP
