#include "report.hpp"

#include <lingauss/errors.hpp>

#include <fstream>
#include <ostream>

namespace lingauss::cli {

void Logger::emit(const char* level, const std::string& msg) const {
  if (json_) {
    *err_ << nlohmann::json{{"level", level}, {"message", msg}}.dump() << '\n';
  } else {
    *err_ << "lingauss: " << (std::string(level) == "error" ? "error: " : "") << msg << '\n';
  }
}

void Logger::info(const std::string& msg) const {
  if (!quiet_) emit("info", msg);
}

void Logger::error(const std::string& msg) const { emit("error", msg); }

double Stopwatch::wall_seconds() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_).count();
}

double Stopwatch::cpu_seconds() const {
  return static_cast<double>(std::clock() - cpu_) / CLOCKS_PER_SEC;
}

nlohmann::json to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return out;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

}  // namespace lingauss::cli
