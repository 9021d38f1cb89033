#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace testutil {

// Per-test scratch directory under the system temp root, wiped on entry.
inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "scenekit_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string cli_path() { return SCENEKIT_CLI_PATH; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Runs the CLI with the given argument string; returns the process exit code.
inline int run_cli(const std::string& args, const std::string& redirect = "> /dev/null 2>&1") {
    std::string cmd = cli_path() + " " + args + " " + redirect;
    int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -2;
}

}  // namespace testutil
