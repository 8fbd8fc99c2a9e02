#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "a2net/data.hpp"

namespace a2net {

// Entry point behind the `a2net` binary. `args` excludes the program name.
// Exit codes: 0 success, 1 validation/runtime failure, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Flat key=value file: one pair per line, '#' starts a comment.
std::map<std::string, std::string> read_key_value_file(const std::string& path);

std::map<std::string, std::string> synth_key_values(const SynthConfig& cfg);
std::vector<std::string> apply_synth_key_values(SynthConfig& cfg, const std::map<std::string, std::string>& kv);

}  // namespace a2net
