#pragma once

#include <curlog/util.hpp>

#include <filesystem>
#include <string>

namespace curlog::test {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(CURLOG_FIXTURE_DIR) / name;
}

inline std::string fixture_text(const std::string& name) { return read_file(fixture(name)); }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("curlog-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace curlog::test
