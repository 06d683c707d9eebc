#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rvvgen::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kIrFormatVersion = 1;

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Writes via a temporary file in the same directory and renames it into
// place. Throws std::filesystem::filesystem_error or std::runtime_error.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents,
                       bool executable = false);

}  // namespace rvvgen::cli
