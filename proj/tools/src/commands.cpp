#include "lingauss_cli/commands.hpp"

#include "report.hpp"

#include <lingauss/lingauss.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

namespace lingauss::cli {

namespace {

using nlohmann::json;

constexpr double kOrthant500Log2Z = -124.6;  // 3.07e-38

std::size_t default_threads() {
  if (const char* env = std::getenv("LINGAUSS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct PipelineSettings {
  std::int64_t samples_per_nesting = 512;
  std::int64_t nesting_samples = 16;
  double rho = 0.5;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

json pipeline_config(const PipelineSettings& s) {
  const auto nest = ChainConfig::for_nestings(0);
  const auto hdr = ChainConfig::for_hdr(0);
  return {{"samples_per_nesting", s.samples_per_nesting},
          {"nesting_samples", s.nesting_samples},
          {"rho", s.rho},
          {"repeats", s.repeats},
          {"seed", s.seed},
          {"threads", s.threads},
          {"thinning_nestings", nest.thinning},
          {"thinning_hdr", hdr.thinning},
          {"delta_theta", hdr.delta_theta},
          {"handoff", hdr.handoff == Handoff::deepest ? "deepest" : "uniform"},
          {"max_levels", SubsetSimulationOptions{}.max_levels}};
}

json report_header(const std::string& subcommand, const std::string& problem_bytes) {
  return {{"subcommand", subcommand},
          {"version", lingauss::version()},
          {"problem_fingerprint", content_fingerprint(problem_bytes)}};
}

void add_timing(json& doc, const Stopwatch& watch, bool enabled) {
  if (!enabled) return;
  doc["cpu_seconds"] = watch.cpu_seconds();
  doc["wall_seconds"] = watch.wall_seconds();
}

ShiftSequence build_nestings(const LinearConstraints& c, std::int64_t n, double rho, std::uint64_t seed) {
  SubsetSimulationOptions opts;
  opts.n_per_level = n;
  opts.rho = rho;
  return build_sequence(c, opts, ChainConfig::for_nestings(derive_seed(seed, "nestings")));
}

json sequence_json(const ShiftSequence& seq, const AffineMap& to_original) {
  json seeds = json::array();
  for (const auto& u : seq.seeds) seeds.push_back(to_json(to_original.forward(u)));
  return {{"gammas", seq.gammas},
          {"rho_hats", seq.rho_hats},
          {"biased_log2_z", seq.biased_log2_z()},
          {"biased_log_z", seq.biased_log_z},
          {"seeds", std::move(seeds)}};
}

json estimate_json(const LogZEstimate& e) {
  json doc = json::parse(log_z_estimate_to_json(e));
  std::vector<double> rho;
  for (double l : e.log_rho_hats) rho.push_back(std::exp(l));
  doc["rho_hats"] = rho;
  return doc;
}

// Nestings (built or given) followed by repeated HDR on the whitened problem.
json integrate_problem(const WhitenedProblem& w, const PipelineSettings& s,
                       std::optional<ShiftSequence> given, const Logger& log) {
  json doc;
  ShiftSequence seq;
  if (given) {
    seq = std::move(*given);
  } else {
    log.info("building nestings (" + std::to_string(s.nesting_samples) + " samples per level)");
    seq = build_nestings(w.constraints, s.nesting_samples, s.rho, s.seed);
    log.info("nestings: T = " + std::to_string(seq.size()) + ", biased log2 Z = " +
             std::to_string(seq.biased_log2_z()));
  }
  json nest = sequence_json(seq, w.transform);
  nest["source"] = given ? "file" : "built";
  if (given) nest.erase("seeds");

  log.info("running HDR with " + std::to_string(s.samples_per_nesting) + " samples per nesting, " +
           std::to_string(s.repeats) + " repeat(s)");
  const auto rep = estimate_log_z_repeated(w.constraints, seq.gammas, s.samples_per_nesting,
                                           ChainConfig::for_hdr(derive_seed(s.seed, "hdr")),
                                           s.repeats, s.threads);

  double log_z_sum = 0.0;
  std::size_t ok = 0;
  json runs = json::array();
  std::optional<LogZEstimate> first;
  for (const auto& run : rep.per_run) {
    if (!run) {
      runs.push_back(nullptr);
      continue;
    }
    if (!first) first = *run;
    log_z_sum += run->log_z;
    ++ok;
    runs.push_back(estimate_json(*run));
  }
  const double log_z = log_z_sum / static_cast<double>(ok);
  const double z = std::exp(log_z);

  doc["log_z"] = log_z;
  doc["log2_z"] = rep.mean_log2_z;
  doc["stddev_log2_z"] = rep.stddev_log2_z ? json(*rep.stddev_log2_z) : json(nullptr);
  doc["z"] = z;
  doc["z_underflow"] = (z == 0.0 || !std::isnormal(z));
  if (!std::isnormal(z)) doc["z"] = 0.0;
  doc["rho_hats"] = estimate_json(*first)["rho_hats"];
  doc["gammas"] = seq.gammas;
  doc["runs"] = std::move(runs);
  doc["excluded_runs"] = rep.excluded;
  doc["failures"] = rep.failures;
  doc["nestings"] = std::move(nest);
  return doc;
}

Eigen::VectorXd parse_csv_vector(const std::string& text, Eigen::Index dim) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || !std::isfinite(v)) {
      throw InvalidArgument("--x0: entry " + std::to_string(values.size()) + " is not a finite number");
    }
    values.push_back(v);
  }
  if (static_cast<Eigen::Index>(values.size()) != dim) {
    throw InvalidArgument("--x0: expected " + std::to_string(dim) + " values, got " +
                          std::to_string(values.size()));
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), dim);
}

void write_samples_csv(const std::filesystem::path& path, const Eigen::MatrixXd& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  char buf[32];
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", x(i, j));
      if (i) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

struct IntegrateArgs {
  std::string problem, nestings, output;
  PipelineSettings settings;
  bool no_timing = false;
};

int cmd_integrate(const IntegrateArgs& a, const Logger& log) {
  Stopwatch watch;
  const std::string bytes = read_text_file(a.problem);
  const auto w = whiten(parse_problem(bytes));
  std::optional<ShiftSequence> given;
  if (!a.nestings.empty()) given = parse_shift_sequence(read_text_file(a.nestings));

  json doc = report_header("integrate", bytes);
  doc["config"] = pipeline_config(a.settings);
  doc.update(integrate_problem(w, a.settings, std::move(given), log));
  add_timing(doc, watch, !a.no_timing);
  write_json_file(a.output, doc);
  log.info("log2 Z = " + std::to_string(doc["log2_z"].get<double>()) + "; wrote " + a.output);
  return kSuccess;
}

struct NestingsArgs {
  std::string problem, output;
  std::int64_t n = 16;
  double rho = 0.5;
  std::uint64_t seed = 0;
  bool no_timing = false;
};

int cmd_nestings(const NestingsArgs& a, const Logger& log) {
  Stopwatch watch;
  const std::string bytes = read_text_file(a.problem);
  const auto w = whiten(parse_problem(bytes));
  const auto seq = build_nestings(w.constraints, a.n, a.rho, a.seed);

  json doc = report_header("nestings", bytes);
  doc["config"] = {{"n_per_level", a.n},
                   {"rho", a.rho},
                   {"seed", a.seed},
                   {"thinning", ChainConfig::for_nestings(0).thinning},
                   {"delta_theta", ChainConfig::for_nestings(0).delta_theta}};
  doc.update(sequence_json(seq, w.transform));
  add_timing(doc, watch, !a.no_timing);
  write_json_file(a.output, doc);
  log.info("T = " + std::to_string(seq.size()) + ", biased log2 Z = " +
           std::to_string(seq.biased_log2_z()) + "; wrote " + a.output);
  return kSuccess;
}

struct SampleArgs {
  std::string problem, output, x0;
  std::int64_t n = 1000;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  std::uint32_t thinning = 2;
  std::int64_t nesting_samples = 16;
};

int cmd_sample(const SampleArgs& a, const Logger& log) {
  const auto problem = read_problem_file(a.problem);
  const auto w = whiten(problem);
  if (!(a.gamma >= 0.0)) throw InvalidArgument("--gamma must be non-negative");

  Eigen::VectorXd u0;
  if (!a.x0.empty()) {
    u0 = w.transform.inverse(parse_csv_vector(a.x0, problem.dim()));
    if (!evaluate_shifted(w.constraints, u0, a.gamma).inside) {
      throw ContractViolation("--x0 lies outside the (shifted) domain");
    }
  } else {
    log.info("no --x0 given; finding a feasible start via nestings");
    u0 = build_nestings(w.constraints, a.nesting_samples, 0.5, a.seed).seeds.back();
  }
  ChainConfig cfg{a.thinning, 1e-7, derive_seed(a.seed, "sample"), BracketMethod::sweep};
  const Eigen::MatrixXd u = sample_chain(w.constraints, a.gamma, a.n, u0, cfg);
  write_samples_csv(a.output, w.transform.forward_columns(u));
  log.info("wrote " + std::to_string(a.n) + " samples to " + a.output);
  return kSuccess;
}

struct GradientArgs {
  std::string problem, output;
  std::int64_t n = 100000;
  std::uint64_t seed = 0;
  std::uint32_t thinning = 2;
  std::int64_t samples_per_nesting = 512;
  std::int64_t nesting_samples = 16;
  bool no_timing = false;
};

int cmd_gradient(const GradientArgs& a, const Logger& log) {
  Stopwatch watch;
  const std::string bytes = read_text_file(a.problem);
  const auto problem = parse_problem(bytes);
  if (!problem.mean || !problem.covariance) {
    throw InvalidArgument("gradient: the problem file must provide \"mean\" and \"cov\"");
  }
  const auto w = whiten(problem);
  const auto seq = build_nestings(w.constraints, a.nesting_samples, 0.5, a.seed);
  const auto est = estimate_log_z(w.constraints, seq.gammas, a.samples_per_nesting,
                                  ChainConfig::for_hdr(derive_seed(a.seed, "hdr")));
  log.info("log p = " + std::to_string(est.log_z));

  ChainConfig cfg{a.thinning, 1e-7, derive_seed(a.seed, "moments"), BracketMethod::sweep};
  auto moments = estimate_moments(w.constraints, w.transform, a.n, cfg, seq.seeds.back());
  moments.log_p_hat = est.log_z;
  const auto g = grad_log_pmin(moments, *problem.mean, *problem.covariance);
  if (g.warning) log.info("warning: " + *g.warning);

  json doc = report_header("gradient", bytes);
  doc["config"] = {{"n", a.n},
                   {"seed", a.seed},
                   {"thinning", a.thinning},
                   {"samples_per_nesting", a.samples_per_nesting},
                   {"nesting_samples", a.nesting_samples},
                   {"delta_theta", cfg.delta_theta},
                   {"batches", moments.batch_first_moments.cols()}};
  doc["p_hat_log"] = est.log_z;
  doc["p_hat_log2"] = est.log2_z;
  doc["d_mu"] = to_json(g.d_mu);
  doc["d_sigma"] = to_json(g.d_sigma);
  doc["hessian_mu"] = to_json(g.hessian_mu);
  doc["stderr_d_mu"] = to_json(g.stderr_d_mu);
  doc["warning"] = g.warning ? json(*g.warning) : json(nullptr);
  add_timing(doc, watch, !a.no_timing);
  write_json_file(a.output, doc);
  log.info("wrote " + a.output);
  return kSuccess;
}

struct ReproArgs {
  std::string output;
  Eigen::Index dim = 500;
  PipelineSettings settings;
  int max_exponent = 9;
  bool no_timing = false;
};

GaussianProblem shifted_orthant(Eigen::Index dim) {
  return GaussianProblem(LinearConstraints(Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Ones(dim)));
}

int cmd_repro_orthant(const ReproArgs& a, std::ostream& out, const Logger& log) {
  Stopwatch watch;
  const auto problem = shifted_orthant(a.dim);
  json doc = report_header("repro orthant500", problem_to_json(problem));
  doc["config"] = pipeline_config(a.settings);
  doc["config"]["dim"] = a.dim;
  doc.update(integrate_problem(whiten(problem), a.settings, std::nullopt, log));
  add_timing(doc, watch, !a.no_timing);

  out << "shifted orthant, D = " << a.dim << "\n";
  out << "  nestings T          : " << doc["gammas"].size() << "\n";
  out << "  log2 Z (HDR)        : " << doc["log2_z"].get<double>() << "\n";
  if (a.dim == 500) out << "  log2 Z (reference)  : " << kOrthant500Log2Z << "\n";
  if (!a.output.empty()) write_json_file(a.output, doc);
  return kSuccess;
}

int cmd_repro_nesting_bias(const ReproArgs& a, std::ostream& out, const Logger& log) {
  Stopwatch watch;
  const auto problem = shifted_orthant(a.dim);
  const auto w = whiten(problem);
  json rows = json::array();
  out << "n_per_level,T,neg_log2_z_ss\n";
  for (int e = 1; e <= a.max_exponent; ++e) {
    const std::int64_t n = std::int64_t{1} << e;
    log.info("subset simulation with " + std::to_string(n) + " samples per level");
    const auto seq = build_nestings(w.constraints, n, a.settings.rho, derive_seed(a.settings.seed, "nesting-bias", n));
    out << n << ',' << seq.size() << ',' << -seq.biased_log2_z() << '\n';
    rows.push_back({{"n_per_level", n}, {"T", seq.size()}, {"neg_log2_z_ss", -seq.biased_log2_z()},
                    {"gammas", seq.gammas}});
  }
  if (a.dim == 500) out << "reference -log2 Z: " << -kOrthant500Log2Z << "\n";
  if (!a.output.empty()) {
    json doc = report_header("repro nesting-bias", problem_to_json(problem));
    doc["config"] = {{"dim", a.dim}, {"rho", a.settings.rho}, {"seed", a.settings.seed},
                     {"max_exponent", a.max_exponent},
                     {"thinning", ChainConfig::for_nestings(0).thinning}};
    doc["rows"] = std::move(rows);
    add_timing(doc, watch, !a.no_timing);
    write_json_file(a.output, doc);
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilities, samples and derivatives of linearly constrained Gaussians", "lingauss"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  bool json_logs = false;
  app.add_flag("--quiet", quiet, "Suppress progress messages");
  app.add_flag("--json-logs", json_logs, "Emit log lines as JSON objects");
  app.set_version_flag("--version", std::string(lingauss::version()));

  IntegrateArgs ia;
  ia.settings.threads = default_threads();
  auto* integrate = app.add_subcommand("integrate", "Estimate log P(x in L) with HDR");
  integrate->add_option("--problem", ia.problem, "Problem JSON file")->required();
  integrate->add_option("--nestings", ia.nestings, "Shift sequence JSON (built if absent)");
  integrate->add_option("--samples-per-nesting", ia.settings.samples_per_nesting, "HDR samples per level")
      ->capture_default_str()->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
  integrate->add_option("--nesting-samples", ia.settings.nesting_samples, "Subset simulation samples per level")
      ->capture_default_str()->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
  integrate->add_option("--rho", ia.settings.rho, "Subset simulation fraction")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  integrate->add_option("--repeats", ia.settings.repeats, "Independent HDR runs")
      ->capture_default_str()->check(CLI::PositiveNumber);
  integrate->add_option("--threads", ia.settings.threads, "Worker threads for repeats (env LINGAUSS_THREADS)")
      ->capture_default_str()->check(CLI::PositiveNumber);
  integrate->add_option("--seed", ia.settings.seed, "Master seed")->capture_default_str();
  integrate->add_option("--output", ia.output, "Result JSON file")->required();
  integrate->add_flag("--no-timing", ia.no_timing, "Omit timing fields from the result");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw samples from the truncated Gaussian");
  sample->add_option("--problem", sa.problem, "Problem JSON file")->required();
  sample->add_option("--n", sa.n, "Number of samples")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", sa.seed, "Seed")->capture_default_str();
  sample->add_option("--gamma", sa.gamma, "Shift of the domain")->capture_default_str();
  sample->add_option("--x0", sa.x0, "Feasible start, comma-separated (found via nestings if absent)");
  sample->add_option("--thinning", sa.thinning, "Keep every k-th chain state")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sample->add_option("--nesting-samples", sa.nesting_samples, "Samples per level when finding a start")
      ->capture_default_str();
  sample->add_option("--output", sa.output, "CSV file, one sample per row")->required();

  NestingsArgs na;
  auto* nestings = app.add_subcommand("nestings", "Build the shift sequence by subset simulation");
  nestings->add_option("--problem", na.problem, "Problem JSON file")->required();
  nestings->add_option("--n", na.n, "Samples per level")->capture_default_str();
  nestings->add_option("--rho", na.rho, "Fraction per level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  nestings->add_option("--seed", na.seed, "Seed")->capture_default_str();
  nestings->add_option("--output", na.output, "Sequence JSON file")->required();
  nestings->add_flag("--no-timing", na.no_timing, "Omit timing fields");

  GradientArgs ga;
  auto* gradient = app.add_subcommand("gradient", "Derivatives of log P w.r.t. mean and covariance");
  gradient->add_option("--problem", ga.problem, "Problem JSON file with mean and cov")->required();
  gradient->add_option("--n", ga.n, "Moment samples")->capture_default_str()->check(CLI::PositiveNumber);
  gradient->add_option("--seed", ga.seed, "Seed")->capture_default_str();
  gradient->add_option("--thinning", ga.thinning, "Thinning of the moment chain")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gradient->add_option("--samples-per-nesting", ga.samples_per_nesting, "HDR samples per level")
      ->capture_default_str();
  gradient->add_option("--nesting-samples", ga.nesting_samples, "Subset simulation samples per level")
      ->capture_default_str();
  gradient->add_option("--output", ga.output, "Result JSON file")->required();
  gradient->add_flag("--no-timing", ga.no_timing, "Omit timing fields");

  ReproArgs ra;
  ra.settings.threads = default_threads();
  auto* repro = app.add_subcommand("repro", "Desk-scale experiment presets");
  repro->require_subcommand(1);
  auto* orthant = repro->add_subcommand("orthant500", "Shifted orthant x_d > -1 in 500 dimensions");
  auto* bias = repro->add_subcommand("nesting-bias", "Nesting count versus samples per level");
  for (auto* sub : {orthant, bias}) {
    sub->add_option("--seed", ra.settings.seed, "Master seed")->capture_default_str();
    sub->add_option("--dim", ra.dim, "Override the dimension")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--output", ra.output, "Optional JSON report");
    sub->add_flag("--no-timing", ra.no_timing, "Omit timing fields");
  }
  orthant->add_option("--samples-per-nesting", ra.settings.samples_per_nesting, "HDR samples per level")
      ->capture_default_str();
  orthant->add_option("--nesting-samples", ra.settings.nesting_samples, "Subset simulation samples per level")
      ->capture_default_str();
  orthant->add_option("--repeats", ra.settings.repeats, "Independent HDR runs")->capture_default_str();
  bias->add_option("--max-exponent", ra.max_exponent, "Sweep n_per_level = 2^1 .. 2^k")
      ->capture_default_str()->check(CLI::Range(1, 16));

  std::vector<std::string> owned = args;
  if (owned.empty()) owned.push_back("lingauss");
  std::vector<char*> argv;
  for (auto& s : owned) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  const Logger log(err, quiet, json_logs);
  try {
    if (*integrate) return cmd_integrate(ia, log);
    if (*sample) return cmd_sample(sa, log);
    if (*nestings) return cmd_nestings(na, log);
    if (*gradient) return cmd_gradient(ga, log);
    if (*orthant) return cmd_repro_orthant(ra, out, log);
    if (*bias) return cmd_repro_nesting_bias(ra, out, log);
  } catch (const NumericalError& e) {
    log.error(e.what());
    return kNumericalFailure;
  } catch (const Error& e) {
    log.error(e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    log.error(std::string("unexpected failure: ") + e.what());
    return kUsageError;
  }
  return kUsageError;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr); }

}  // namespace lingauss::cli
