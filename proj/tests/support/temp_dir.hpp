#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

namespace hostcap::testing {

/// Unique scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<int> counter{0};
        const int n = counter.fetch_add(1);
        path = std::filesystem::temp_directory_path() /
               ("hostcap_test_" + std::to_string(::getpid()) + "_" + std::to_string(n));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }

    std::string write(const std::string& name, const std::string& content) const {
        const std::string p = file(name);
        std::ofstream out(p);
        out << content;
        return p;
    }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

}  // namespace hostcap::testing
