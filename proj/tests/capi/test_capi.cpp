#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oampump/oampump.h"

namespace fs = std::filesystem;

namespace {

std::string tmp(const std::string& name) {
  const fs::path p = fs::path(OAMPUMP_TEST_TMP) / name;
  fs::remove_all(p);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("model handle") {
  oampump_model* m = nullptr;
  REQUIRE(oampump_model_create(5.0, 1.0, &m) == OAMPUMP_OK);
  double lo = 0, up = 0;
  REQUIRE(oampump_model_bands(m, 0.0, 0.0, 0.0, &lo, &up) == OAMPUMP_OK);
  CHECK(lo == doctest::Approx(-std::sqrt(104.0)));
  CHECK(up == doctest::Approx(std::sqrt(104.0)));
  int cl = 0, cu = 0;
  REQUIRE(oampump_model_chern(m, 21.0, 1, 32, 32, &cl, &cu) == OAMPUMP_OK);
  CHECK(cl == 1);
  CHECK(cu == -1);
  REQUIRE(oampump_model_chern(m, 21.0, 0, 32, 32, &cl, &cu) == OAMPUMP_OK);
  CHECK(cl == -1);
  oampump_model_destroy(m);

  oampump_model* bad = reinterpret_cast<oampump_model*>(1);
  CHECK(oampump_model_create(-1.0, 1.0, &bad) == OAMPUMP_ERR_INVALID_ARGUMENT);
  CHECK(bad == nullptr);
  CHECK(std::string(oampump_last_error()).size() > 0);
  CHECK(oampump_model_bands(nullptr, 0, 0, 0, &lo, &up) == OAMPUMP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("pump trajectory handle") {
  oampump_model* m = nullptr;
  REQUIRE(oampump_model_create(5.0, 1.0, &m) == OAMPUMP_OK);
  oampump_trajectory* t = nullptr;
  REQUIRE(oampump_pump_run(m, 21.0, 1.0, 0, OAMPUMP_BAND_LOWER, 1.0, &t) == OAMPUMP_OK);
  const size_t n = oampump_trajectory_samples(t);
  REQUIRE(n > 2);
  double time = 0, mean = 0, p = 0;
  REQUIRE(oampump_trajectory_sample(t, n - 1, &time, &mean) == OAMPUMP_OK);
  CHECK(time == doctest::Approx(21.0));
  CHECK(std::abs(mean - 2.0) < 0.05);
  REQUIRE(oampump_trajectory_probability(t, n - 1, 2, &p) == OAMPUMP_OK);
  CHECK(p > 0.9);
  REQUIRE(oampump_trajectory_probability(t, n - 1, 100000, &p) == OAMPUMP_OK);
  CHECK(p == 0.0);
  CHECK(oampump_trajectory_sample(t, n, &time, &mean) == OAMPUMP_ERR_INVALID_ARGUMENT);
  oampump_trajectory_destroy(t);
  CHECK(oampump_pump_run(m, 21.0, 1.0, 1, OAMPUMP_BAND_LOWER, 1.0, &t) == OAMPUMP_ERR_INVALID_ARGUMENT);
  oampump_model_destroy(m);
}

TEST_CASE("plan") {
  int digits[8];
  size_t count = 0;
  double periods = 0;
  REQUIRE(oampump_plan_switch(512, 10, 3, 0, digits, 8, &count, &periods) == OAMPUMP_OK);
  REQUIRE(count == 3);
  CHECK(digits[0] == 2);
  CHECK(digits[1] == 1);
  CHECK(digits[2] == 5);
  CHECK(periods == 4.0);
  CHECK(oampump_plan_switch(512, 10, 2, 0, digits, 8, &count, &periods) == OAMPUMP_ERR_UNREPRESENTABLE);
  CHECK(oampump_exit_code(OAMPUMP_ERR_UNREPRESENTABLE) == 2);
  CHECK(oampump_plan_switch(512, 10, 3, 0, digits, 2, &count, &periods) == OAMPUMP_ERR_BUFFER_TOO_SMALL);
  CHECK(count == 3);
}

TEST_CASE("status names and exit codes") {
  CHECK(std::string(oampump_status_name(OAMPUMP_ERR_GAP_CLOSED)) == "gap_closed");
  CHECK(std::string(oampump_status_name(OAMPUMP_ERR_EDGE_LEAK)) == "edge_leak");
  CHECK(oampump_exit_code(OAMPUMP_OK) == 0);
  CHECK(oampump_exit_code(OAMPUMP_ERR_CONFIG) == 2);
  CHECK(oampump_exit_code(OAMPUMP_ERR_GAP_CLOSED) == 3);
  CHECK(oampump_exit_code(OAMPUMP_ERR_EDGE_LEAK) == 3);
}

TEST_CASE("run experiment") {
  std::vector<char> buf(1 << 20);
  const std::string out = tmp("chern");
  REQUIRE(oampump_run_experiment("chern", R"({"n_k": 32, "n_t": 32})", out.c_str(), nullptr, buf.data(),
                                 buf.size()) == OAMPUMP_OK);
  const auto summary = nlohmann::json::parse(buf.data());
  CHECK(summary["results"]["lower"] == 1);
  CHECK(summary["results"]["upper"] == -1);
  CHECK(fs::exists(fs::path(out) / "summary.json"));
  CHECK(fs::exists(fs::path(out) / "curvature.csv"));
  CHECK(nlohmann::json::parse(slurp(fs::path(out) / "summary.json")) == summary);

  // gap closing loop: numerical failure, error object, no artifacts
  const std::string crit = tmp("critical");
  const oampump_status s = oampump_run_experiment(
      "chern", R"({"loop": "circle", "radius": 0.0, "n_k": 16, "n_t": 16})", crit.c_str(), nullptr,
      buf.data(), buf.size());
  CHECK(s == OAMPUMP_ERR_GAP_CLOSED);
  const auto err = nlohmann::json::parse(buf.data());
  CHECK(err["error"]["code"] == "gap_closed");
  CHECK(err["error"]["exit_code"] == 3);
  CHECK_FALSE(fs::exists(crit));

  const std::string bad = tmp("bad");
  CHECK(oampump_run_experiment("chern", R"({"n_k": 32, "nk": 3})", bad.c_str(), nullptr, buf.data(),
                               buf.size()) == OAMPUMP_ERR_CONFIG);
  CHECK(nlohmann::json::parse(buf.data())["error"]["message"].get<std::string>().find("nk") != std::string::npos);
  CHECK(oampump_run_experiment("nope", "{}", bad.c_str(), nullptr, buf.data(), buf.size()) == OAMPUMP_ERR_CONFIG);
  CHECK(oampump_run_experiment("disorder", R"({"trials": 2})", bad.c_str(), nullptr, buf.data(), buf.size()) ==
        OAMPUMP_ERR_CONFIG);
  const uint64_t seed = 3;
  CHECK(oampump_run_experiment("chern", "{}", bad.c_str(), &seed, buf.data(), buf.size()) == OAMPUMP_ERR_CONFIG);
  CHECK_FALSE(fs::exists(bad));
  // truncated summary stays NUL-terminated
  char small[8];
  REQUIRE(oampump_run_experiment("plan", R"({"delta_l": 5})", tmp("small").c_str(), nullptr, small, sizeof small) ==
          OAMPUMP_OK);
  CHECK(std::string(small).size() == 7);
}

TEST_CASE("seeded runs are reproducible") {
  const char* cfg = R"({"kind": "phase", "sigma": 0.1, "trials": 4, "cycles": 0.5})";
  const uint64_t seed = 99;
  const std::string a = tmp("seed_a"), b = tmp("seed_b"), c = tmp("seed_c");
  REQUIRE(oampump_run_experiment("disorder", cfg, a.c_str(), &seed, nullptr, 0) == OAMPUMP_OK);
  REQUIRE(oampump_run_experiment("disorder", cfg, b.c_str(), &seed, nullptr, 0) == OAMPUMP_OK);
  const uint64_t other = 100;
  REQUIRE(oampump_run_experiment("disorder", cfg, c.c_str(), &other, nullptr, 0) == OAMPUMP_OK);
  for (const char* f : {"summary.json", "disorder.csv", "trials.csv"})
    CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));
  CHECK(slurp(fs::path(a) / "trials.csv") != slurp(fs::path(c) / "trials.csv"));
}
