// Copyright 2026 The Shuttle Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// The `shuttle` command-line tool. One option table drives the config
// schema, the per-command flags and the --help text.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "shuttle/domain.hpp"

namespace shuttle::cli {

enum class ValueType { String, Path, Int, Float, Bool, IntList, StringList };

struct OptionSpec {
  std::string key;   // "<block>.<name>"
  ValueType type;
  std::string flag;  // long flag without dashes; empty = config/--set only
  std::vector<std::string> commands;
  std::string help;
};

const std::vector<OptionSpec>& option_table();
std::vector<std::string> command_names();

// Nested {"dataset": {...}, "models": {...}, ...} with every default.
Json default_config();
// {"version", "keys": [{key, type, default, flag, commands, help}]}
Json config_schema();

// Throws ValidationError on unknown blocks or keys and on wrongly typed
// values. Top-level "command" and "version" are allowed (lock files).
void validate_config(const Json& cfg);
// Deep-merges overlay into base (both validated).
Json merge_config(const Json& base, const Json& overlay);
// Parses a flag or --set value of the key's type.
Json parse_value(const OptionSpec& spec, const std::string& text);

// Output root: --run-dir if given, else $SHUTTLE_RUN_DIR/<command>-<hash>,
// else ./runs/<command>-<hash>.
std::filesystem::path run_directory(const std::string& command, const Json& lock, const std::string& explicit_dir);

// Runs the tool in-process; returns the exit code (0 ok, 1 user error,
// 2 internal error). Errors are printed to err as {"error": {...}}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shuttle::cli
