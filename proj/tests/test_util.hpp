#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <unistd.h>

// Scratch directory for test artifacts, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        dir_ = std::filesystem::temp_directory_path() /
               ("eegrt_" + tag + "_" + std::to_string(static_cast<unsigned long>(::getpid())));
        std::filesystem::remove_all(dir_);
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    std::filesystem::path path(const std::string& name) const { return dir_ / name; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};
