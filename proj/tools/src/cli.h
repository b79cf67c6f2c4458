#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace spatialkit::cli {

// Exit status contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitInternal = 2;

// Runs the command line `args` (args[0] is the program name). Never throws;
// every failure is reported on `err` and mapped to an exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Writes `content` to `path` through a sibling temporary and a rename, so a
// reader never observes a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Expands files and directories (non-recursive, *.json, sorted) into the
// list of scene files. Throws InputError for missing paths.
std::vector<std::filesystem::path> collect_scene_files(const std::vector<std::string>& inputs);

}  // namespace spatialkit::cli
