#pragma once

#include "lingauss/constraints.hpp"
#include "lingauss/hdr.hpp"
#include "lingauss/nestings.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace lingauss {

// Problem file:
//   { "dim": D, "A": [[...D...], ...M rows], "b": [...M...],
//     "mean": optional [D], "cov": optional [[D x D]] }
// Rows of "A" are a_m^T. Errors name the offending field, e.g. "A[3][1]".
// Malformed JSON is reported with its byte offset.
GaussianProblem parse_problem(std::string_view json_text);
GaussianProblem read_problem_file(const std::filesystem::path& path);
std::string problem_to_json(const GaussianProblem& p);

// seq.json: { "gammas", "rho_hats", "biased_log2_z", "seeds" }
std::string shift_sequence_to_json(const ShiftSequence& seq);
ShiftSequence parse_shift_sequence(std::string_view json_text);

std::string log_z_estimate_to_json(const LogZEstimate& e);
LogZEstimate parse_log_z_estimate(std::string_view json_text);

std::string read_text_file(const std::filesystem::path& path);

// 64-bit FNV-1a of raw bytes, as 16 hex digits.
std::string content_fingerprint(std::string_view bytes);

}  // namespace lingauss
