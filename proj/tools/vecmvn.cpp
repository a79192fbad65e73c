// Command-line front end: MVN probability estimation, truncated-MVN
// sampling, censored-field fitting and prediction, and benchmark
// sweeps. Results print as JSON on stdout; samples and tables go to
// CSV files. Exit codes: 0 success, 2 bad configuration, 3 numerical
// failure.

#include "vecmvn/censored.hpp"
#include "vecmvn/reference.hpp"
#include "vecmvn/sampler.hpp"
#include "vecmvn/scenarios.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

using nlohmann::json;
using namespace vecmvn;

namespace {

double parse_limit(const std::string& s, const char* what) {
  double v;
  if (!detail::parse_double(s, v))
    throw parameter_error(std::string("cannot parse ") + what + ": " + s);
  return v;
}

int default_threads() {
  if (const char* env = std::getenv("VECMVN_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

struct ProblemFlags {
  std::string scenario;  // 1|2|3|const-corr
  bool identity = false;
  std::string locations_file;
  std::string matrix_file;
  std::string limits_file;
  long long n = 0;
  double rho = 0.5;
  std::string kernel = "matern15";
  double variance = 1.0;
  std::vector<double> ranges{0.1};
  double nugget = 0.01;
  bool chordal = false;
  std::string lower = "-inf";
  std::string upper = "0";
  std::uint64_t seed = 1;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--scenario", scenario,
                    "builtin scenario: 1 (grid), 2 (latin hypercube), 3 (centered grid), "
                    "const-corr");
    cmd->add_flag("--identity", identity, "independent standard coordinates");
    cmd->add_option("--locations", locations_file, "locations CSV (one row per point)");
    cmd->add_option("--matrix", matrix_file, "dense covariance CSV");
    cmd->add_option("--limits", limits_file, "CSV with lower,upper columns");
    cmd->add_option("--n", n, "problem dimension for builtin scenarios");
    cmd->add_option("--rho", rho, "constant correlation");
    cmd->add_option("--kernel", kernel, "matern05 | matern15 | matern25")
        ->check(CLI::IsMember({"matern05", "matern15", "matern25"}));
    cmd->add_option("--variance", variance, "kernel variance");
    cmd->add_option("--range", ranges, "kernel range(s), one per coordinate group");
    cmd->add_option("--nugget", nugget, "nugget variance");
    cmd->add_flag("--chordal", chordal, "chordal distance on lon/lat degrees");
    cmd->add_option("--lower", lower, "scalar lower limit (-inf allowed)");
    cmd->add_option("--upper", upper, "scalar upper limit (inf allowed)");
    cmd->add_option("--seed", seed, "random seed");
  }

  CovarianceModel kernel_model(Matrix locs) const {
    KernelFamily fam = kernel == "matern05" ? KernelFamily::kMatern05
                       : kernel == "matern25" ? KernelFamily::kMatern25
                                              : KernelFamily::kMatern15;
    Vector r(static_cast<Eigen::Index>(ranges.size()));
    for (std::size_t g = 0; g < ranges.size(); ++g)
      r[static_cast<Eigen::Index>(g)] = ranges[g];
    return CovarianceModel::matern(fam, variance, r, nugget, std::move(locs),
                                   chordal ? DistanceMetric::kChordal
                                           : DistanceMetric::kEuclidean);
  }

  ProblemSpec build() const {
    ProblemSpec spec;
    bool scenario_limits = false;
    if (!scenario.empty()) {
      if (n <= 0) throw parameter_error("builtin scenarios need --n");
      if (scenario == "1") {
        spec = scenario1(n, nugget);
      } else if (scenario == "2") {
        spec = scenario2(n, seed, nugget);
        scenario_limits = true;  // random limits are part of the scenario
      } else if (scenario == "3") {
        spec = scenario3(n, nugget);
        scenario_limits = true;
      } else if (scenario == "const-corr") {
        spec = scenario_const_corr(n, rho);
      } else {
        throw parameter_error("unknown scenario: " + scenario);
      }
    } else if (identity) {
      if (n <= 0) throw parameter_error("--identity needs --n");
      spec = scenario_identity(n);
    } else if (!matrix_file.empty()) {
      auto model = CovarianceModel::dense_matrix(read_matrix_csv(matrix_file), nugget);
      const Eigen::Index nn = model.n;
      spec = ProblemSpec::make(std::move(model), Vector::Constant(nn, -kInf),
                               Vector::Constant(nn, 0.0));
    } else if (!locations_file.empty()) {
      auto model = kernel_model(read_locations_csv(locations_file));
      const Eigen::Index nn = model.n;
      spec = ProblemSpec::make(std::move(model), Vector::Constant(nn, -kInf),
                               Vector::Constant(nn, 0.0));
    } else {
      throw parameter_error("give --scenario, --identity, --locations, or --matrix");
    }

    const Eigen::Index nn = spec.size();
    if (!limits_file.empty()) {
      const Matrix lims = read_csv(limits_file).values;
      if (lims.rows() != nn || lims.cols() != 2)
        throw data_error("limits CSV must be n rows x 2 columns");
      Vector lo(nn), hi(nn);
      for (Eigen::Index i = 0; i < nn; ++i) {
        lo[i] = std::isnan(lims(i, 0)) ? -kInf : lims(i, 0);
        hi[i] = std::isnan(lims(i, 1)) ? kInf : lims(i, 1);
      }
      return ProblemSpec::make(spec.covariance, lo, hi);
    }
    if (scenario_limits) return spec;
    const double lo = parse_limit(lower, "--lower");
    const double hi = parse_limit(upper, "--upper");
    return ProblemSpec::make(spec.covariance, Vector::Constant(nn, lo),
                             Vector::Constant(nn, hi));
  }
};

ReorderMethod parse_reorder(const std::string& s) {
  if (s == "none") return ReorderMethod::kNone;
  if (s == "univariate") return ReorderMethod::kUnivariate;
  if (s == "vecchia") return ReorderMethod::kVecchia;
  if (s == "fic") return ReorderMethod::kFic;
  throw parameter_error("unknown reorder method: " + s);
}

int run_mvnprob(const ProblemFlags& flags, int m, long long N, const std::string& reorder,
                bool qmc, int qmc_shifts, int threads, long long ml_m2, long long ml_N2,
                const std::string& oracle) {
  ProblemSpec spec = flags.build();
  SamplerOptions opt;
  opt.reorder = parse_reorder(reorder);
  opt.qmc = qmc;
  opt.qmc_shifts = qmc_shifts;
  opt.seed = flags.seed;
  opt.threads = threads;

  ProbabilityEstimate est;
  if (oracle == "sov") {
    est = dense_sov_estimate(materialize_sigma(spec.covariance), spec.shifted_lower(),
                             spec.shifted_upper(), N, flags.seed, threads);
  } else if (ml_m2 > 0) {
    if (ml_N2 <= 0) throw parameter_error("--ml-m2 needs --ml-N2");
    est = estimate_multilevel(spec, m, static_cast<int>(ml_m2), N, ml_N2, opt);
  } else {
    est = estimate_mvn_prob(spec, m, N, opt);
  }
  json out{{"log_estimate", est.log_mean},
           {"estimate", est.estimate},
           {"std_error", est.std_error},
           {"n", static_cast<long long>(spec.size())},
           {"m", est.m},
           {"N", est.N},
           {"reorder", oracle == "sov" ? "oracle" : reorder},
           {"seed", flags.seed},
           {"elapsed_sec", est.elapsed_sec}};
  if (std::isfinite(est.bias_correction)) out["bias_correction"] = est.bias_correction;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_tmvn(const ProblemFlags& flags, int m, long long samples, long long max_attempts,
             const std::string& reorder, int threads, const std::string& out_file,
             const std::string& oracle) {
  ProblemSpec spec = flags.build();
  SampleBatch batch;
  TmvnDiagnostics diag;
  if (oracle == "rejection") {
    batch = dense_rejection_sample(materialize_sigma(spec.covariance),
                                   spec.shifted_lower(), spec.shifted_upper(), samples,
                                   max_attempts, flags.seed);
  } else {
    SamplerOptions opt;
    opt.reorder = parse_reorder(reorder);
    opt.seed = flags.seed;
    opt.threads = threads;
    batch = sample_tmvn(spec, m, samples, max_attempts, opt, &diag);
  }
  if (!out_file.empty()) write_matrix_csv(out_file, batch.samples);
  json out{{"samples", batch.samples.rows()},
           {"attempts", batch.attempts},
           {"acceptance_rate", batch.acceptance_rate},
           {"n", static_cast<long long>(spec.size())},
           {"m", m},
           {"reorder", oracle == "rejection" ? "oracle" : reorder},
           {"seed", flags.seed},
           {"out", out_file}};
  if (std::isfinite(diag.psi_max)) out["psi_max"] = diag.psi_max;
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct CensoredFlags {
  std::string data_file;
  std::string kernel = "matern15";
  double variance = 1.0;
  std::vector<double> ranges{0.1};
  double nugget = 0.01;
  bool chordal = false;
  int m = 30;
  long long N = 10000;
  std::uint64_t seed = 1;
  int threads = default_threads();

  void add_to(CLI::App* cmd) {
    cmd->add_option("--data", data_file, "dataset CSV: x1..xd,value,threshold")
        ->required();
    cmd->add_option("--kernel", kernel, "matern05 | matern15 | matern25")
        ->check(CLI::IsMember({"matern05", "matern15", "matern25"}));
    cmd->add_option("--variance", variance, "kernel variance");
    cmd->add_option("--range", ranges, "kernel range(s)");
    cmd->add_option("--nugget", nugget, "nugget variance");
    cmd->add_flag("--chordal", chordal, "chordal distance on lon/lat degrees");
    cmd->add_option("--m", m, "conditioning-set size");
    cmd->add_option("--N", N, "MC sample size per likelihood evaluation");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--threads", threads, "worker threads");
  }

  CovarianceModel model(const Matrix& locs) const {
    KernelFamily fam = kernel == "matern05" ? KernelFamily::kMatern05
                       : kernel == "matern25" ? KernelFamily::kMatern25
                                              : KernelFamily::kMatern15;
    Vector r(static_cast<Eigen::Index>(ranges.size()));
    for (std::size_t g = 0; g < ranges.size(); ++g)
      r[static_cast<Eigen::Index>(g)] = ranges[g];
    return CovarianceModel::matern(fam, variance, r, nugget, locs,
                                   chordal ? DistanceMetric::kChordal
                                           : DistanceMetric::kEuclidean);
  }

  CensoredOptions options() const {
    CensoredOptions opt;
    opt.m = m;
    opt.N = N;
    opt.seed = seed;
    opt.threads = threads;
    return opt;
  }
};

int run_censored_loglik(const CensoredFlags& flags) {
  auto data = read_censored_csv(flags.data_file);
  const double ll = censored_loglik(data, flags.model(data.locations), flags.options());
  json out{{"loglik", ll},
           {"n", static_cast<long long>(data.size())},
           {"observed", static_cast<long long>(data.observed_count())},
           {"m", flags.m},
           {"N", flags.N},
           {"seed", flags.seed}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_censored_fit(const CensoredFlags& flags, const std::vector<double>& init,
                     const std::vector<double>& lower, const std::vector<double>& upper,
                     int max_iter, const std::string& trace_file) {
  auto data = read_censored_csv(flags.data_file);
  const auto p = static_cast<Eigen::Index>(init.size());
  if (init.empty() || lower.size() != init.size() || upper.size() != init.size())
    throw parameter_error("--init/--lower-bounds/--upper-bounds must share a length");
  Vector vi(p), vl(p), vu(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    vi[j] = init[j];
    vl[j] = lower[j];
    vu[j] = upper[j];
  }
  FitOptions fopt;
  fopt.eval = flags.options();
  fopt.max_iterations = max_iter;
  auto fit = fit_params(data, flags.model(data.locations), vi, vl, vu, fopt);
  if (!trace_file.empty()) {
    Matrix trace(static_cast<Eigen::Index>(fit.trace.size()), p + 1);
    for (std::size_t r = 0; r < fit.trace.size(); ++r) {
      trace.row(static_cast<Eigen::Index>(r)).head(p) = fit.trace[r].first;
      trace(static_cast<Eigen::Index>(r), p) = fit.trace[r].second;
    }
    std::vector<std::string> header;
    header.emplace_back("variance");
    for (Eigen::Index g = 0; g + 2 < p; ++g)
      header.push_back("range" + std::to_string(g + 1));
    header.emplace_back("nugget");
    header.emplace_back("loglik");
    write_matrix_csv(trace_file, trace, header);
  }
  json out{{"params", std::vector<double>(fit.params.data(), fit.params.data() + p)},
           {"loglik", fit.loglik},
           {"evaluations", fit.evaluations},
           {"converged", fit.converged},
           {"trace", trace_file}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_censored_predict(const CensoredFlags& flags, long long samples,
                         long long max_attempts, const std::vector<double>& region,
                         double buffer, const std::string& grid_file,
                         const std::string& samples_file, const std::string& pred_file) {
  auto data = read_censored_csv(flags.data_file);
  auto model = flags.model(data.locations);
  const Eigen::Index d = data.locations.cols();

  RegionalSamples imputed;
  TmvnDiagnostics diag;
  if (!region.empty()) {
    if (static_cast<Eigen::Index>(region.size()) != 2 * d)
      throw parameter_error("--region needs lo1,hi1,...,lod,hid");
    Vector lo(d), hi(d);
    for (Eigen::Index c = 0; c < d; ++c) {
      lo[c] = region[2 * c];
      hi[c] = region[2 * c + 1];
    }
    imputed = regional_sample(data, model, lo, hi, buffer, flags.m, samples,
                              max_attempts, flags.options(), ReorderMethod::kVecchia,
                              &diag);
  } else {
    imputed = sample_censored_posterior(data, model, flags.m, samples, max_attempts,
                                        flags.options(), ReorderMethod::kVecchia, &diag);
  }
  if (!samples_file.empty()) write_matrix_csv(samples_file, imputed.batch.samples);

  json out{{"samples", imputed.batch.samples.rows()},
           {"attempts", imputed.batch.attempts},
           {"acceptance_rate", imputed.batch.acceptance_rate},
           {"censored_selected", static_cast<long long>(imputed.censored_rows.size())},
           {"n", static_cast<long long>(data.size())},
           {"m", flags.m},
           {"seed", flags.seed},
           {"out", samples_file}};

  if (!grid_file.empty()) {
    if (imputed.batch.samples.rows() == 0)
      throw numerical_error("no accepted samples to krige from");
    const Matrix grid = read_locations_csv(grid_file);
    auto kr = krige_predict(data, imputed, model, grid, flags.m);
    Matrix table(grid.rows(), d + 2);
    table.leftCols(d) = grid;
    table.col(d) = kr.mean;
    table.col(d + 1) = kr.sd;
    std::vector<std::string> header;
    for (Eigen::Index c = 0; c < d; ++c) header.push_back("x" + std::to_string(c + 1));
    header.emplace_back("mean");
    header.emplace_back("sd");
    const std::string path = pred_file.empty() ? "predictions.csv" : pred_file;
    write_matrix_csv(path, table, header);
    out["predictions"] = path;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_bench(const std::string& suite, const std::string& out_file, std::uint64_t seed,
              int threads, int replicates) {
  std::ofstream out(out_file);
  if (!out) throw data_error("cannot write " + out_file);
  out << "config,n,m,N,rmse_proxy,elapsed\n";
  out.precision(10);
  if (suite == "const-corr") {
    const Eigen::Index n = 900;
    const double truth = 1.0 / 901.0;
    for (int m : {10, 30, 50, 70, 90}) {
      double sq = 0.0, elapsed = 0.0;
      auto spec = scenario_const_corr(n, 0.5);
      SamplerOptions opt;
      opt.threads = threads;
      auto prep = prepare_problem(spec, m, opt);
      for (int r = 0; r < replicates; ++r) {
        opt.seed = seed + r;
        auto est = estimate_prepared(prep, 10000, opt);
        sq += (est.estimate - truth) * (est.estimate - truth);
        elapsed += est.elapsed_sec;
      }
      out << "const-corr,900," << m << ",10000,"
          << std::sqrt(sq / replicates) / truth << "," << elapsed / replicates << "\n";
    }
  } else if (suite == "scaling") {
    for (Eigen::Index n : {1600, 3136, 6400}) {
      auto spec = scenario1(n, 0.03);
      SamplerOptions opt;
      opt.seed = seed;
      opt.threads = threads;
      auto prep = prepare_problem(spec, 30, opt);
      auto est = estimate_prepared(prep, 10000, opt);
      out << "scaling," << n << ",30,10000," << est.rel_error << "," << est.elapsed_sec
          << "\n";
    }
  } else if (suite == "reorder") {
    const Eigen::Index n = 900;
    const std::vector<std::pair<std::string, ReorderMethod>> methods{
        {"none", ReorderMethod::kNone},
        {"fic", ReorderMethod::kFic},
        {"vecchia", ReorderMethod::kVecchia},
        {"univariate", ReorderMethod::kUnivariate}};
    for (const auto& [label, method] : methods) {
      auto spec = scenario1(n);
      SamplerOptions opt;
      opt.reorder = method;
      opt.threads = threads;
      auto prep = prepare_problem(spec, 30, opt);
      for (int r = 0; r < replicates; ++r) {
        opt.seed = seed + r;
        auto est = estimate_prepared(prep, 10000, opt);
        out << "reorder-" << label << ",900,30,10000," << est.rel_error << ","
            << est.elapsed_sec << "\n";
      }
    }
  } else {
    throw parameter_error("unknown bench suite: " + suite);
  }
  json summary{{"suite", suite}, {"out", out_file}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MVN probabilities and truncated-normal sampling via sparse inverse "
               "Cholesky factors"};
  app.require_subcommand(1);

  auto* mvn = app.add_subcommand("mvnprob", "estimate an MVN probability");
  ProblemFlags mvn_flags;
  mvn_flags.add_to(mvn);
  int m = 30, qmc_shifts = 10, threads = default_threads();
  long long N = 10000, ml_m2 = 0, ml_N2 = 0;
  std::string reorder = "vecchia", oracle;
  bool qmc = false;
  mvn->add_option("--m", m, "conditioning-set size");
  mvn->add_option("--N", N, "MC sample size");
  mvn->add_option("--reorder", reorder, "none | univariate | vecchia | fic")
      ->check(CLI::IsMember({"none", "univariate", "vecchia", "fic"}));
  mvn->add_flag("--qmc", qmc, "randomized low-discrepancy points");
  mvn->add_option("--qmc-shifts", qmc_shifts, "independent randomizations");
  mvn->add_option("--threads", threads, "worker threads");
  mvn->add_option("--ml-m2", ml_m2, "second-level conditioning size (multi-level MC)");
  mvn->add_option("--ml-N2", ml_N2, "second-level sample count (multi-level MC)");
  mvn->add_option("--oracle", oracle, "sov: dense reference estimate instead")
      ->check(CLI::IsMember({"sov"}));

  auto* tmv = app.add_subcommand("tmvn", "sample a truncated MVN distribution");
  ProblemFlags tmv_flags;
  tmv_flags.add_to(tmv);
  int tm = 30, tthreads = default_threads();
  long long k_samples = 1000, max_attempts = 10000000;
  std::string treorder = "vecchia", tout = "samples.csv", toracle;
  tmv->add_option("--m", tm, "conditioning-set size");
  tmv->add_option("--samples", k_samples, "accepted draws wanted");
  tmv->add_option("--max-attempts", max_attempts, "proposal budget");
  tmv->add_option("--reorder", treorder, "none | univariate | vecchia | fic")
      ->check(CLI::IsMember({"none", "univariate", "vecchia", "fic"}));
  tmv->add_option("--threads", tthreads, "worker threads");
  tmv->add_option("--out", tout, "samples CSV path");
  tmv->add_option("--oracle", toracle, "rejection: naive dense sampler instead")
      ->check(CLI::IsMember({"rejection"}));

  auto* cen = app.add_subcommand("censored", "censored Gaussian-field modeling");
  cen->require_subcommand(1);
  auto* cll = cen->add_subcommand("loglik", "evaluate the censored log-likelihood");
  CensoredFlags cll_flags;
  cll_flags.add_to(cll);
  auto* cft = cen->add_subcommand("fit", "fit kernel parameters");
  CensoredFlags cft_flags;
  cft_flags.add_to(cft);
  std::vector<double> f_init{1.0, 0.1, 0.01}, f_lo{0.1, 0.01, 0.001}, f_hi{10.0, 1.0, 0.5};
  int f_iter = 100;
  std::string f_trace;
  cft->add_option("--init", f_init, "initial (variance, ranges..., nugget)");
  cft->add_option("--lower-bounds", f_lo, "parameter lower bounds");
  cft->add_option("--upper-bounds", f_hi, "parameter upper bounds");
  cft->add_option("--max-iter", f_iter, "simplex iterations");
  cft->add_option("--trace-out", f_trace, "CSV of evaluated parameters");
  auto* cpr = cen->add_subcommand("predict", "impute censored values and krige");
  CensoredFlags cpr_flags;
  cpr_flags.add_to(cpr);
  long long c_samples = 200, c_attempts = 10000000;
  std::vector<double> c_region;
  double c_buffer = 0.1;
  std::string c_grid, c_samples_out = "imputations.csv", c_pred_out;
  cpr->add_option("--samples", c_samples, "accepted draws wanted");
  cpr->add_option("--max-attempts", c_attempts, "proposal budget");
  cpr->add_option("--region", c_region, "axis-aligned box lo1,hi1,...,lod,hid");
  cpr->add_option("--buffer", c_buffer, "region expansion for conditioning");
  cpr->add_option("--grid", c_grid, "test locations CSV for kriging");
  cpr->add_option("--out", c_samples_out, "imputation samples CSV");
  cpr->add_option("--pred-out", c_pred_out, "prediction table CSV");

  auto* ben = app.add_subcommand("bench", "benchmark sweeps as plot-ready CSV");
  std::string b_suite = "const-corr", b_out = "bench.csv";
  std::uint64_t b_seed = 1;
  int b_threads = default_threads(), b_reps = 10;
  ben->add_option("--suite", b_suite, "const-corr | scaling | reorder")
      ->check(CLI::IsMember({"const-corr", "scaling", "reorder"}));
  ben->add_option("--out", b_out, "output CSV");
  ben->add_option("--seed", b_seed, "random seed");
  ben->add_option("--threads", b_threads, "worker threads");
  ben->add_option("--replicates", b_reps, "replicates per configuration");

  try {
    app.parse(argc, argv);
    if (mvn->parsed())
      return run_mvnprob(mvn_flags, m, N, reorder, qmc, qmc_shifts, threads, ml_m2,
                         ml_N2, oracle);
    if (tmv->parsed())
      return run_tmvn(tmv_flags, tm, k_samples, max_attempts, treorder, tthreads, tout,
                      toracle);
    if (cen->parsed()) {
      if (cll->parsed()) return run_censored_loglik(cll_flags);
      if (cft->parsed())
        return run_censored_fit(cft_flags, f_init, f_lo, f_hi, f_iter, f_trace);
      if (cpr->parsed())
        return run_censored_predict(cpr_flags, c_samples, c_attempts, c_region, c_buffer,
                                    c_grid, c_samples_out, c_pred_out);
    }
    if (ben->parsed()) return run_bench(b_suite, b_out, b_seed, b_threads, b_reps);
    throw parameter_error("no subcommand given");
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    json err{{"error", "config"}, {"message", e.what()}};
    std::cout << err.dump(2) << "\n";
    return 2;
  } catch (const parameter_error& e) {
    json err{{"error", "config"}, {"message", e.what()}};
    std::cout << err.dump(2) << "\n";
    return 2;
  } catch (const data_error& e) {
    json err{{"error", "config"}, {"message", e.what()}};
    std::cout << err.dump(2) << "\n";
    return 2;
  } catch (const error& e) {
    json err{{"error", "numerical"}, {"message", e.what()}};
    std::cout << err.dump(2) << "\n";
    return 3;
  }
}
