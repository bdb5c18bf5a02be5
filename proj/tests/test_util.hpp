#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace mccnn::testing {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mccnn_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    const std::string path = file(name);
    std::ofstream out(path);
    out << content;
    return path;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace mccnn::testing
