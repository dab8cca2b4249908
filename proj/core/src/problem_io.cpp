#include "lingauss/problem_io.hpp"

#include "lingauss/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace lingauss {

namespace {

using nlohmann::json;

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": malformed JSON at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  } catch (const json::out_of_range& e) {
    // Literals such as 1e999 overflow to infinity inside the parser.
    throw ParseError(std::string(what) + ": non-finite number literal: " + e.what());
  }
}

const json& require(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(ctx + ": missing field \"" + key + "\"");
  return *it;
}

double finite_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(path + ": value is not finite");
  return x;
}

Eigen::VectorXd vector_field(const json& v, const std::string& path, Eigen::Index expected = -1) {
  if (!v.is_array()) throw ParseError(path + ": expected an array");
  if (expected >= 0 && static_cast<Eigen::Index>(v.size()) != expected) {
    throw ParseError(path + ": expected " + std::to_string(expected) + " entries, got " +
                     std::to_string(v.size()));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = finite_number(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Eigen::MatrixXd matrix_field(const json& v, const std::string& path, Eigen::Index cols,
                             Eigen::Index rows = -1) {
  if (!v.is_array()) throw ParseError(path + ": expected an array of rows");
  if (rows >= 0 && static_cast<Eigen::Index>(v.size()) != rows) {
    throw ParseError(path + ": expected " + std::to_string(rows) + " rows, got " +
                     std::to_string(v.size()));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), cols);
  for (std::size_t r = 0; r < v.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) =
        vector_field(v[r], path + "[" + std::to_string(r) + "]", cols).transpose();
  }
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

std::vector<double> double_list(const json& v, const std::string& path) {
  const Eigen::VectorXd x = vector_field(v, path);
  return {x.data(), x.data() + x.size()};
}

}  // namespace

GaussianProblem parse_problem(std::string_view text) {
  const json doc = parse_json(text, "problem");
  if (!doc.is_object()) throw ParseError("problem: top level must be an object");
  const json& dim_field = require(doc, "dim", "problem");
  if (!dim_field.is_number_integer() || dim_field.get<long long>() < 1) {
    throw ParseError("problem: \"dim\" must be a positive integer");
  }
  const auto d = static_cast<Eigen::Index>(dim_field.get<long long>());
  Eigen::MatrixXd a = matrix_field(require(doc, "A", "problem"), "A", d);
  if (a.rows() < 1) throw ParseError("A: need at least one constraint row");
  Eigen::VectorXd b = vector_field(require(doc, "b", "problem"), "b", a.rows());

  std::optional<Eigen::VectorXd> mean;
  std::optional<Eigen::MatrixXd> cov;
  if (auto it = doc.find("mean"); it != doc.end() && !it->is_null()) mean = vector_field(*it, "mean", d);
  if (auto it = doc.find("cov"); it != doc.end() && !it->is_null()) cov = matrix_field(*it, "cov", d, d);
  try {
    return GaussianProblem(LinearConstraints(std::move(a), std::move(b)), std::move(mean), std::move(cov));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GaussianProblem read_problem_file(const std::filesystem::path& path) {
  return parse_problem(read_text_file(path));
}

std::string problem_to_json(const GaussianProblem& p) {
  json doc;
  doc["dim"] = p.dim();
  doc["A"] = matrix_json(p.constraints.a());
  doc["b"] = vector_json(p.constraints.b());
  if (p.mean) doc["mean"] = vector_json(*p.mean);
  if (p.covariance) doc["cov"] = matrix_json(*p.covariance);
  return doc.dump();
}

std::string shift_sequence_to_json(const ShiftSequence& seq) {
  json doc;
  doc["gammas"] = seq.gammas;
  doc["rho_hats"] = seq.rho_hats;
  doc["biased_log2_z"] = seq.biased_log2_z();
  doc["biased_log_z"] = seq.biased_log_z;
  json seeds = json::array();
  for (const auto& s : seq.seeds) seeds.push_back(vector_json(s));
  doc["seeds"] = std::move(seeds);
  return doc.dump();
}

ShiftSequence parse_shift_sequence(std::string_view text) {
  const json doc = parse_json(text, "nestings");
  if (!doc.is_object()) throw ParseError("nestings: top level must be an object");
  ShiftSequence seq;
  seq.gammas = double_list(require(doc, "gammas", "nestings"), "gammas");
  try {
    validate_gammas(seq.gammas);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("gammas: ") + e.what());
  }
  if (auto it = doc.find("rho_hats"); it != doc.end()) seq.rho_hats = double_list(*it, "rho_hats");
  if (auto it = doc.find("biased_log_z"); it != doc.end()) {
    seq.biased_log_z = finite_number(*it, "biased_log_z");
  } else if (auto it2 = doc.find("biased_log2_z"); it2 != doc.end()) {
    seq.biased_log_z = finite_number(*it2, "biased_log2_z") * std::numbers::ln2;
  }
  if (auto it = doc.find("seeds"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("seeds: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      seq.seeds.push_back(vector_field((*it)[i], "seeds[" + std::to_string(i) + "]"));
    }
  }
  return seq;
}

std::string log_z_estimate_to_json(const LogZEstimate& e) {
  json doc;
  doc["log_rho_hats"] = e.log_rho_hats;
  doc["log_z"] = e.log_z;
  doc["log2_z"] = e.log2_z;
  json counts = json::array();
  for (const auto& c : e.counts) counts.push_back({c.inside, c.total});
  doc["counts"] = std::move(counts);
  doc["samples_per_level"] = e.samples_per_level;
  doc["seed"] = e.seed;
  doc["thinning"] = e.thinning;
  doc["sequence_fingerprint"] = e.sequence_fingerprint;
  return doc.dump();
}

LogZEstimate parse_log_z_estimate(std::string_view text) {
  const json doc = parse_json(text, "estimate");
  LogZEstimate e;
  try {
    e.log_rho_hats = doc.at("log_rho_hats").get<std::vector<double>>();
    e.log_z = doc.at("log_z").get<double>();
    e.log2_z = doc.at("log2_z").get<double>();
    for (const auto& c : doc.at("counts")) e.counts.push_back({c.at(0).get<std::int64_t>(), c.at(1).get<std::int64_t>()});
    e.samples_per_level = doc.at("samples_per_level").get<std::int64_t>();
    e.seed = doc.at("seed").get<std::uint64_t>();
    e.thinning = doc.at("thinning").get<std::uint32_t>();
    e.sequence_fingerprint = doc.at("sequence_fingerprint").get<std::string>();
  } catch (const json::exception& ex) {
    throw ParseError(std::string("estimate: ") + ex.what());
  }
  return e;
}

std::string content_fingerprint(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lingauss
