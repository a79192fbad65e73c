// End-to-end checks of the CLI surface: JSON outputs validate against
// the published schema, CSV artifacts parse, exit codes follow the
// contract, and --seed + --threads reproducibility holds bit for bit.
// The binary path arrives via the VECMVN_CLI environment variable.

#include "vecmvn/io.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using nlohmann::json;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
};

const char* cli_path() { return std::getenv("VECMVN_CLI"); }

CliResult run_cli(const std::string& args) {
  const std::string out_file = "cli_stdout.tmp";
  const std::string cmd =
      std::string(cli_path()) + " " + args + " > " + out_file + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(raw), ss.str()};
}

json load_schema_definition(const std::string& name) {
  const char* dir = std::getenv("VECMVN_SCHEMA_DIR");
  REQUIRE(dir != nullptr);
  std::ifstream in(std::string(dir) + "/cli-output.schema.json");
  REQUIRE(in.good());
  json schema = json::parse(in);
  return schema.at("definitions").at(name);
}

// Minimal validator for the subset of JSON Schema the file uses:
// required keys plus per-property type names.
void validate(const json& instance, const json& definition) {
  for (const auto& key : definition.at("required")) {
    INFO("required key " << key.get<std::string>());
    REQUIRE(instance.contains(key.get<std::string>()));
  }
  const auto& props = definition.at("properties");
  for (auto it = instance.begin(); it != instance.end(); ++it) {
    if (!props.contains(it.key())) continue;
    const std::string type = props.at(it.key()).at("type").get<std::string>();
    INFO("key " << it.key() << " should be " << type);
    if (type == "number") {
      REQUIRE(it.value().is_number());
    } else if (type == "integer") {
      REQUIRE(it.value().is_number_integer());
    } else if (type == "string") {
      REQUIRE(it.value().is_string());
    } else if (type == "boolean") {
      REQUIRE(it.value().is_boolean());
    } else if (type == "array") {
      REQUIRE(it.value().is_array());
    }
  }
}

}  // namespace

TEST_CASE("mvnprob output validates and is reproducible", "[cli]") {
  if (!cli_path()) SKIP("VECMVN_CLI not set");
  auto r1 = run_cli("mvnprob --identity --n 10 --upper 0 --N 4000 --qmc --seed 7");
  REQUIRE(r1.exit_code == 0);
  const json out = json::parse(r1.out);
  validate(out, load_schema_definition("mvnprob_result"));
  // Independent halves: 2^-10, and the integrand is constant.
  REQUIRE(out["estimate"].get<double>() ==
          Catch::Approx(std::pow(2.0, -10.0)).epsilon(0.005));
  REQUIRE(out["n"] == 10);

  auto r2 =
      run_cli("mvnprob --identity --n 10 --upper 0 --N 4000 --qmc --seed 7 --threads 2");
  REQUIRE(r2.exit_code == 0);
  REQUIRE(json::parse(r2.out)["log_estimate"] == out["log_estimate"]);
}

TEST_CASE("const-corr scenario reaches the analytic neighborhood", "[cli]") {
  if (!cli_path()) SKIP("VECMVN_CLI not set");
  auto r = run_cli("mvnprob --scenario const-corr --n 100 --rho 0.5 --upper 0 "
                   "--m 30 --N 10000 --seed 3");
  REQUIRE(r.exit_code == 0);
  const json out = json::parse(r.out);
  validate(out, load_schema_definition("mvnprob_result"));
  REQUIRE(out["estimate"].get<double>() ==
          Catch::Approx(1.0 / 101.0).margin(0.2 / 101.0));
}

TEST_CASE("tmvn writes samples CSV and summary", "[cli]") {
  if (!cli_path()) SKIP("VECMVN_CLI not set");
  auto r = run_cli("tmvn --identity --n 4 --lower -1 --upper 1 --samples 50 "
                   "--max-attempts 100000 --seed 5 --out cli_tmvn_samples.csv");
  REQUIRE(r.exit_code == 0);
  const json out = json::parse(r.out);
  validate(out, load_schema_definition("tmvn_summary"));
  REQUIRE(out["samples"] == 50);
  const vecmvn::Matrix samples = vecmvn::read_csv("cli_tmvn_samples.csv").values;
  REQUIRE(samples.rows() == 50);
  REQUIRE(samples.cols() == 4);
  REQUIRE(samples.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("censored subcommands run end to end", "[cli]") {
  if (!cli_path()) SKIP("VECMVN_CLI not set");
  {
    std::ofstream data("cli_censored.csv");
    data << "x1,x2,value,threshold\n";
    const int g = 6;
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        const double x = static_cast<double>(j) / (g - 1);
        const double y = static_cast<double>(i) / (g - 1);
        const double v = std::sin(6 * x) + std::cos(4 * y);  // deterministic field
        data << x << "," << y << ",";
        if (v > 0.0) data << v;
        data << ",0.0\n";
      }
  }
  auto ll = run_cli("censored loglik --data cli_censored.csv --m 8 --N 2000 --seed 2");
  REQUIRE(ll.exit_code == 0);
  validate(json::parse(ll.out), load_schema_definition("censored_loglik_result"));

  auto fit = run_cli("censored fit --data cli_censored.csv --m 8 --N 1000 --seed 2 "
                     "--max-iter 4 --trace-out cli_fit_trace.csv");
  REQUIRE(fit.exit_code == 0);
  validate(json::parse(fit.out), load_schema_definition("censored_fit_result"));
  REQUIRE(vecmvn::read_csv("cli_fit_trace.csv").values.rows() > 0);

  {
    std::ofstream grid("cli_grid.csv");
    grid << "0.1,0.1\n0.9,0.9\n";
  }
  auto pred = run_cli("censored predict --data cli_censored.csv --m 8 --seed 2 "
                      "--samples 20 --max-attempts 200000 --grid cli_grid.csv "
                      "--out cli_imp.csv --pred-out cli_pred.csv");
  REQUIRE(pred.exit_code == 0);
  validate(json::parse(pred.out), load_schema_definition("censored_predict_result"));
  const auto table = vecmvn::read_csv("cli_pred.csv");
  REQUIRE(table.header.size() == 4);
  REQUIRE(table.values.rows() == 2);
}

TEST_CASE("bad configuration exits 2 with an error object", "[cli]") {
  if (!cli_path()) SKIP("VECMVN_CLI not set");
  auto r = run_cli("mvnprob --n 10 --upper 0");  // no covariance source
  REQUIRE(r.exit_code == 2);
  const json err = json::parse(r.out);
  validate(err, load_schema_definition("error_result"));
  REQUIRE(err["error"] == "config");

  auto r2 = run_cli("mvnprob --identity --n 10 --lower 1 --upper 0");
  REQUIRE(r2.exit_code == 2);
}
