#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include <doctest.h>

#include "ratedml/error.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ratedml-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

template <typename F>
ratedml::ErrorCode error_code_of(F&& f) {
    try {
        f();
    } catch (const ratedml::Error& e) {
        return e.code();
    }
    FAIL("expected a ratedml::Error");
    return ratedml::ErrorCode::InvalidArgument;
}

}  // namespace testing

