#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcmclab/cli.hpp"

using namespace mcmclab;
using nlohmann::json;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string field;
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing is strict about keys and types") {
  const CliOverrides ov;
  CHECK(thrown_message([&] { load_config("{\"foo\":1}", ov); }) ==
        "unknown config key: config.foo");
  CHECK(thrown_message([&] { load_config("{\"sweep\":{\"foo\":1}}", ov); }) ==
        "unknown config key: sweep.foo");
  CHECK(thrown_message([&] { load_config("{\"sweep\":3}", ov); }) ==
        "sweep must be a JSON object");
  CHECK(thrown_message([&] { load_config("not json", ov); })
            .rfind("config is not valid JSON", 0) == 0);
  CHECK(thrown_message([&] { load_config("[1,2]", ov); }) ==
        "config root must be a JSON object");
  CHECK(thrown_message([&] {
          load_config("{\"sweep\":{\"gammas\":\"x\"}}", ov);
        }).rfind("config value has wrong type", 0) == 0);
  CHECK_THROWS_AS(load_config("{\"kernel\":{\"kind\":\"mala\"}}", ov),
                  std::invalid_argument);
  CHECK_THROWS_AS(load_config("{\"metric\":{\"p\":3.0}}", ov),
                  std::invalid_argument);
  CHECK_THROWS_AS(load_config("{\"metric\":{\"base\":\"chebyshev\"}}", ov),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      load_config("{\"coupling\":{\"reference\":\"magic\"}}", ov),
      std::invalid_argument);
}

TEST_CASE("config defaults and the output path precedence") {
  CliOverrides ov;
  const LoadedConfig lc = load_config("{}", ov);
  CHECK(lc.sweep.dimensions == std::vector<int>{1});
  CHECK(lc.sweep.gammas == std::vector<double>{0.1});
  CHECK(lc.sweep.metrics.size() == 1);
  CHECK(lc.sweep.samples_per_cell == 100000);
  CHECK(lc.sweep.seed == 0);
  CHECK(lc.sweep.jobs == 1);
  CHECK(lc.output_path.empty());
  CHECK(lc.horizon_steps == 100);
  CHECK(lc.replicas == 10000);
  CHECK(lc.refinement == 64);
  CHECK(lc.reference == "exact-ou");
  CHECK_FALSE(lc.has_contraction_inputs);

  const LoadedConfig cfg =
      load_config("{\"seed\":42,\"output\":\"scan.csv\"}", ov);
  CHECK(cfg.sweep.seed == 42);
  CHECK(cfg.output_path == "scan.csv");
  CHECK(cfg.echo.find("\"seed\":42") != std::string::npos);

  ov.out_path = "flag.csv";
  ov.jobs = 3;
  const LoadedConfig both = load_config("{\"output\":\"scan.csv\"}", ov);
  CHECK(both.output_path == "flag.csv");
  CHECK(both.sweep.jobs == 3);

  const LoadedConfig bi = load_config(
      "{\"bounds_inputs\":{\"A\":1.5,\"c\":0.8,\"psi_rate\":2.0}}", ov);
  CHECK(bi.has_contraction_inputs);
  CHECK(bi.sweep.bound_inputs.A == 1.5);
  REQUIRE(bi.sweep.bound_inputs.psi);
  CHECK(bi.sweep.bound_inputs.psi(0.5) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("gaussian check passes on the exact kernels and rejects bad input") {
  std::ostringstream os;
  CHECK(cmd_gaussian_check(0.1, 1, "ula", 2.0, 0, os) == kExitPass);
  const std::string text = os.str();
  CHECK(text.find("kernel=ula gamma=0.1") != std::string::npos);
  CHECK(text.find(" d=1 p=2") != std::string::npos);
  CHECK(text.find("measured_variance=") != std::string::npos);
  CHECK(text.find("closed_form_bias=") != std::string::npos);
  CHECK(text.find("z_score=") != std::string::npos);
  CHECK(text.find("PASS\n") != std::string::npos);

  std::ostringstream os2;
  CHECK(cmd_gaussian_check(0.2, 1, "uhmc", 2.0, 0, os2) == kExitPass);

  std::ostringstream bad;
  CHECK(cmd_gaussian_check(0.0, 1, "ula", 2.0, 0, bad) == kExitConfigError);
  CHECK(cmd_gaussian_check(0.1, 0, "ula", 2.0, 0, bad) == kExitConfigError);
  CHECK(cmd_gaussian_check(0.1, 1, "mala", 2.0, 0, bad) == kExitConfigError);
  // 0.3 does not divide the unit transition duration
  CHECK(cmd_gaussian_check(0.3, 1, "uhmc", 2.0, 0, bad) == kExitConfigError);
  CHECK(bad.str().find("error: ") != std::string::npos);
}

TEST_CASE("bias scan emits csv plus slope sidecar and exit codes") {
  const std::string cfg =
      "{\"seed\":3,\"model\":{\"family\":\"gaussian\"},"
      "\"sweep\":{\"dimensions\":[1],\"gammas\":[0.05,0.1,0.2],"
      "\"samples_per_cell\":3000}}";
  CliOverrides ov;
  std::ostringstream out, err;
  CHECK(cmd_bias_scan(cfg, ov, out, err) == kExitPass);
  const auto ls = lines_of(out.str());
  REQUIRE(ls.size() == 6);  // comment, header, 3 cells, slope json
  CHECK(ls[0].rfind("# config: ", 0) == 0);
  CHECK(ls[1].rfind("experiment_id,", 0) == 0);
  for (int i = 2; i < 5; ++i) CHECK(split_csv(ls[i]).size() == 16);

  const json fits = json::parse(ls[5]);
  REQUIRE(fits.size() == 1);
  CHECK(fits[0]["axis"] == "gamma");
  CHECK(fits[0]["points"] == 3);
  const double slope = fits[0]["slope"].get<double>();
  CHECK(slope > 0.85);
  CHECK(slope < 1.2);

  // determinism modulo the wall-time column
  std::ostringstream out2, err2;
  CHECK(cmd_bias_scan(cfg, ov, out2, err2) == kExitPass);
  const auto ls2 = lines_of(out2.str());
  REQUIRE(ls2.size() == ls.size());
  for (size_t i = 0; i < ls.size(); ++i) {
    if (i < 2 || i == 5) {
      CHECK(ls2[i] == ls[i]);
      continue;
    }
    auto a = split_csv(ls[i]);
    auto b = split_csv(ls2[i]);
    REQUIRE(a.size() == b.size());
    for (size_t f = 0; f < a.size(); ++f)
      if (f != 14) CHECK(a[f] == b[f]);
  }

  // --out redirects the table and writes the sidecar next to it
  const std::string path = "/tmp/mcmclab_test_scan.csv";
  CliOverrides file_ov;
  file_ov.out_path = path;
  std::ostringstream out3, err3;
  CHECK(cmd_bias_scan(cfg, file_ov, out3, err3) == kExitPass);
  CHECK(out3.str().empty());
  std::ifstream f(path);
  CHECK(f.good());
  std::ifstream sf(path + ".slopes.json");
  CHECK(sf.good());
  f.close();
  sf.close();
  std::remove(path.c_str());
  std::remove((path + ".slopes.json").c_str());

  // a diverging grid yields labeled rows and the divergence exit code
  const std::string div_cfg =
      "{\"kernel\":{\"gamma_cap\":5},"
      "\"sweep\":{\"gammas\":[4],\"samples_per_cell\":1000}}";
  std::ostringstream dout, derr;
  CHECK(cmd_bias_scan(div_cfg, CliOverrides{}, dout, derr) == kExitDiverged);
  CHECK(dout.str().find("diverged at step") != std::string::npos);

  std::ostringstream eout, eerr;
  CHECK(cmd_bias_scan("{\"sweep\":{\"gammas\":[0]}}", CliOverrides{}, eout,
                      eerr) == kExitConfigError);
  CHECK(eerr.str().rfind("error: ", 0) == 0);
}

TEST_CASE("coupling command prints a curve dominated by the theory column") {
  const std::string cfg =
      "{\"seed\":4,\"model\":{\"family\":\"gaussian\"},"
      "\"sweep\":{\"dimensions\":[2],\"gammas\":[0.1]},"
      "\"coupling\":{\"horizon_steps\":20,\"replicas\":2000}}";
  std::ostringstream out, err;
  CHECK(cmd_coupling(cfg, CliOverrides{}, out, err) == kExitPass);
  const auto ls = lines_of(out.str());
  REQUIRE(ls.size() >= 4);
  CHECK(ls[0].rfind("# config: ", 0) == 0);
  CHECK(ls[1] == "t,rmse,stderr,theory_bound");
  for (size_t i = 2; i < ls.size(); ++i) {
    const auto cols = split_csv(ls[i]);
    REQUIRE(cols.size() == 4);
    const double rmse = std::stod(cols[1]);
    const double bound = std::stod(cols[3]);
    CHECK(rmse <= bound);
  }
}

TEST_CASE("coupling config can force the taming and the initial law") {
  // plain ula kernel, but the coupled chain is forced to the tamed variant
  // and the start to an equilibrated chain instead of the closed form
  const std::string cfg =
      "{\"seed\":9,\"model\":{\"family\":\"product-double-well\"},"
      "\"sweep\":{\"dimensions\":[2],\"gammas\":[0.05]},"
      "\"coupling\":{\"horizon_steps\":5,\"replicas\":500,"
      "\"reference\":\"fine-grid\",\"refinement\":16,"
      "\"tamed\":true,\"initial_law\":\"chain-equilibrated\"}}";
  std::ostringstream out, err;
  CHECK(cmd_coupling(cfg, CliOverrides{}, out, err) == kExitPass);
  CHECK(lines_of(out.str()).size() >= 4);

  const std::string law = load_config(cfg, CliOverrides{})
                              .coupling_initial_law.value();
  CHECK(law == "chain-equilibrated");
  CHECK(load_config(cfg, CliOverrides{}).coupling_tamed.value());

  std::ostringstream o2, e2;
  CHECK(cmd_coupling(
            "{\"model\":{\"family\":\"gaussian\"},"
            "\"coupling\":{\"initial_law\":\"stationary\"}}",
            CliOverrides{}, o2, e2) == kExitConfigError);
  CHECK(e2.str().find("unknown coupling initial_law") != std::string::npos);

  std::ostringstream o3, e3;
  CHECK(cmd_coupling("{\"coupling\":{\"tamed\":\"yes\"}}", CliOverrides{}, o3,
                     e3) == kExitConfigError);
  CHECK(e3.str().find("config value has wrong type") != std::string::npos);
}

TEST_CASE("bounds command needs rate inputs and reports every constant") {
  std::ostringstream out, err;
  CHECK(cmd_bounds("{}", CliOverrides{}, out, err) == kExitConfigError);
  CHECK(err.str().find("bounds need the convergence inputs") !=
        std::string::npos);

  const std::string cfg =
      "{\"seed\":6,\"model\":{\"family\":\"gaussian\"},"
      "\"sweep\":{\"dimensions\":[4],\"gammas\":[0.1]},"
      "\"bounds_inputs\":{\"A\":1,\"c\":1,\"psi_rate\":1.0,\"kappa\":1,"
      "\"A_tv\":0.5,\"B_tv\":2,\"lambda_tv\":0.1}}";
  std::ostringstream out2, err2;
  REQUIRE(cmd_bounds(cfg, CliOverrides{}, out2, err2) == kExitPass);
  const json rep = json::parse(out2.str());
  CHECK(rep["model"] == "gaussian");
  CHECK(rep["d"] == 4);
  CHECK(rep["gamma"] == 0.1);
  for (const char* key : {"M1", "M2", "M3", "M4", "M5", "Mtilde1", "Mtilde2",
                          "Mtilde3", "Mtilde4", "Mtilde5", "Mtilde6"}) {
    REQUIRE(rep.contains(key));
    CHECK(rep[key].contains("value"));
    CHECK(rep[key].contains("stderr"));
  }
  CHECK(std::abs(rep["M1"]["value"].get<double>() - 4.0) < 0.5);
  CHECK(rep["M2"]["value"].get<double>() == doctest::Approx(4.0));
  CHECK(rep["lambda_L"].get<double>() == doctest::Approx(2.15).epsilon(1e-12));
  CHECK(rep["lambda_H"].get<double>() ==
        doctest::Approx(1.0525).epsilon(1e-12));
  CHECK(rep["M_L"].get<double>() > 0.0);
  CHECK(rep["M_H"].get<double>() > 0.0);
  CHECK(rep["Mtilde_L"].get<double>() > 0.0);
  CHECK(rep["wasserstein_bound_geometric"].get<double>() > 0.0);
  CHECK(rep["wasserstein_bound_subgeometric"].get<double>() > 0.0);
  CHECK(rep["hmc_bound"].get<double>() > 0.0);
  CHECK(rep["C_tv"].get<double>() ==
        doctest::Approx(1.1388568100).epsilon(1e-5));
  CHECK(rep["Mtilde7"].get<double>() > 0.0);
  CHECK(rep["tv_bound"].get<double>() > 0.0);
}

TEST_CASE("contraction command fits the exact synchronous rate") {
  const std::string cfg =
      "{\"seed\":8,\"model\":{\"family\":\"gaussian\"},"
      "\"sweep\":{\"dimensions\":[1],\"gammas\":[0.1]},"
      "\"coupling\":{\"horizon_steps\":30,\"replicas\":500}}";
  std::ostringstream out, err;
  REQUIRE(cmd_contraction(cfg, CliOverrides{}, out, err) == kExitPass);
  const json rep = json::parse(out.str());
  CHECK(rep["pairs"] == 500);
  CHECK(rep["metric_base"] == "euclidean");
  CHECK_FALSE(rep["degenerate"].get<bool>());
  CHECK(rep["rate_per_unit_time"].get<double>() ==
        doctest::Approx(-std::log(0.9) / 0.1).epsilon(1e-9));
  CHECK(rep["fit_residual"].get<double>() < 1e-8);

  // a quarter rotation has no average contraction to fit
  const std::string deg =
      "{\"model\":{\"family\":\"gaussian\"},"
      "\"kernel\":{\"kind\":\"exact-hmc\",\"duration_T\":1.5707963267948966},"
      "\"sweep\":{\"dimensions\":[1],\"gammas\":[0.1]},"
      "\"coupling\":{\"horizon_steps\":10,\"replicas\":100}}";
  std::ostringstream out2, err2;
  REQUIRE(cmd_contraction(deg, CliOverrides{}, out2, err2) == kExitPass);
  const json rep2 = json::parse(out2.str());
  CHECK(rep2["degenerate"].get<bool>());
  CHECK(rep2["rate_per_unit_time"].is_null());
}

TEST_CASE("quantities command reports the sampled constants") {
  const std::string cfg =
      "{\"seed\":9,\"model\":{\"family\":\"gaussian\"},"
      "\"sweep\":{\"dimensions\":[10],\"gammas\":[0.1]}}";
  std::ostringstream out, err;
  REQUIRE(cmd_quantities(cfg, CliOverrides{}, out, err) == kExitPass);
  const json rep = json::parse(out.str());
  CHECK(rep["model"] == "gaussian");
  CHECK(rep["d"] == 10);
  CHECK(std::abs(rep["M1"]["value"].get<double>() - 10.0) < 1.0);
  CHECK(rep["M2"]["value"].get<double>() == doctest::Approx(10.0));
  CHECK(rep["M4"]["value"].get<double>() == doctest::Approx(0.0));
  CHECK(rep["Mtilde2"]["value"].get<double>() == doctest::Approx(10.0));
  const double mt6 = rep["Mtilde6"]["value"].get<double>();
  CHECK(std::abs(mt6 - 10.0 / 0.95) < 0.7);
}

TEST_CASE("seed resolution prefers the flag, then the environment") {
  unsetenv("MCMCLAB_SEED");
  CHECK(resolve_seed(std::nullopt, 5) == 5);
  CHECK(resolve_seed(7, 5) == 7);

  setenv("MCMCLAB_SEED", "99", 1);
  CHECK(resolve_seed(std::nullopt, 5) == 99);
  CHECK(resolve_seed(7, 5) == 7);

  setenv("MCMCLAB_SEED", "12x", 1);
  CHECK_THROWS_AS(resolve_seed(std::nullopt, 5), std::invalid_argument);
  CHECK(thrown_message([] { resolve_seed(std::nullopt, 5); })
            .find("MCMCLAB_SEED must be an unsigned integer") !=
        std::string::npos);

  // the config loader picks the environment seed up as well
  setenv("MCMCLAB_SEED", "31", 1);
  const LoadedConfig lc = load_config("{\"seed\":42}", CliOverrides{});
  CHECK(lc.sweep.seed == 31);
  unsetenv("MCMCLAB_SEED");
}
