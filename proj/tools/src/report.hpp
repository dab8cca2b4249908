#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace lingauss::cli {

class Logger {
 public:
  Logger(std::ostream& err, bool quiet, bool json) : err_(&err), quiet_(quiet), json_(json) {}

  void info(const std::string& msg) const;
  void error(const std::string& msg) const;

 private:
  void emit(const char* level, const std::string& msg) const;

  std::ostream* err_;
  bool quiet_;
  bool json_;
};

class Stopwatch {
 public:
  Stopwatch() : wall_(std::chrono::steady_clock::now()), cpu_(std::clock()) {}
  double wall_seconds() const;
  double cpu_seconds() const;

 private:
  std::chrono::steady_clock::time_point wall_;
  std::clock_t cpu_;
};

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Eigen::MatrixXd& m);

// Writes pretty-printed JSON followed by a newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace lingauss::cli
