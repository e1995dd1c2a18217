#ifndef FOCUS_TOOLS_CLI_HPP_
#define FOCUS_TOOLS_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "focus/pipeline.hpp"
#include "focus/sim.hpp"

namespace focus::cli {

struct KeySpec {
  const char* key;  // "section.name"
  const char* default_value;
  const char* help;
  bool boolean;
};

// Every configuration key with its default, in documentation order.
const std::vector<KeySpec>& key_specs();

// Flat "section.name" -> raw string value.
using KeyValues = std::map<std::string, std::string>;

KeyValues default_values();

// INI-style file: [section] headers, key = value lines, ';' or '#' comments.
// Unknown sections or keys are validation errors.
KeyValues read_config_file(const std::filesystem::path& path);

// Overwrites `base` with `overrides`, rejecting unknown keys.
void merge_values(KeyValues& base, const KeyValues& overrides);

struct RunConfig {
  std::string command;

  std::filesystem::path panel;
  std::filesystem::path mask;
  std::string format = "wide";

  FocusOptions focus;

  std::vector<int> horizons{1};
  double alpha = 0.05;
  Eigen::Index dump_unit = 0;  // 1-based, 0: no variance dump

  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  int threads = 1;

  ExperimentGrid grid;
  int holdout = 1;
};

// Typed view of the values for one command; throws InvalidArgument on any
// malformed or out-of-range value and on missing input files.
RunConfig parse_config(const std::string& command, const KeyValues& values);

// Runs the command line (without the program name). Writes progress to `out`
// and typed error messages to `err`. Returns 0 on success, 1 for validation
// errors, 2 for numerical failures, 3 for I/O failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace focus::cli

#endif  // FOCUS_TOOLS_CLI_HPP_
