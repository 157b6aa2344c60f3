#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ioncav/cli.hpp"

using namespace ioncav;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("ioncav_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

double comment_value(const std::string& text, const std::string& key) {
  for (const auto& line : lines_of(text))
    if (line.rfind("# " + key + "=", 0) == 0) return std::stod(line.substr(key.size() + 3));
  FAIL("missing " << key);
  return 0.0;
}

double row_value(const std::string& text, const std::string& key) {
  for (const auto& line : lines_of(text))
    if (line.rfind(key + ",", 0) == 0) return std::stod(line.substr(key.size() + 1));
  FAIL("missing " << key);
  return 0.0;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(123456789012.0) == "1.23456789e+11");
}

TEST_CASE("config parsing") {
  const RunConfig defaults = parse_config("{}");
  CHECK(defaults.params().omega1_mhz == 82.0);
  CHECK(defaults.sweep.points == 241);
  CHECK(defaults.displacements_nm.size() == 21);
  CHECK(defaults.displacements_nm.back() == 433.0);

  const RunConfig c = parse_config(R"({"omega1_mhz": 40, "drive_config": "sigma", "n_max": 3,
      "swept_parameter": "cavity_detuning", "displacements_nm": [0, 50.5], "format": "json", "workers": 4})");
  CHECK(c.params().omega1_mhz == 40.0);
  CHECK(c.params().drive_config == DriveConfig::sigma);
  CHECK(c.params().n_max == 3);
  CHECK(c.sweep.swept == SweptParameter::cavity_detuning);
  CHECK(c.displacements_nm == std::vector<double>{0.0, 50.5});
  CHECK(c.format == OutputFormat::json);
  CHECK(c.workers == 4);

  CHECK_THROWS_AS(parse_config(R"({"omega_1": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"n_max": 1.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"omega1_mhz": "82"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"drive_config": "circular"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"g_obs_mhz": 2.0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sweep_points": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"displacements_nm": [1], "displacement_points": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"tune_to_line": "Z"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
}

TEST_CASE("lines command") {
  const Scratch s;
  const Run r = run({"lines", "--config", s.write("c.json", "{}")});
  REQUIRE(r.code == 0);
  const auto rows = lines_of(r.out);
  CHECK(rows[1] == "label,initial,intermediate,final,shift_factor,strength,stokes_polarization,position_mhz");
  CHECK(rows[2] == "A,S1/2(+1/2),P1/2(+1/2),D3/2(-1/2),-7/5,1/18,sigma-,-5.486432");
  CHECK(rows[13] == "L,S1/2(-1/2),P1/2(+1/2),D3/2(+3/2),11/5,1/3,sigma+,8.621536");
  CHECK(rows.size() == 1 + 1 + 12 + 1 + 1 + 6);

  const Run zero = run({"lines", "--config", s.write("b0.json", R"({"b_field_mt": 0, "drive_config": "sigma"})")});
  REQUIRE(zero.code == 0);
  const auto zrows = lines_of(zero.out);
  for (std::size_t i = 2; i < 14; ++i) CHECK(zrows[i].substr(zrows[i].rfind(',') + 1) == "0");
  std::string effective;
  for (std::size_t i = 16; i < zrows.size(); ++i) effective += zrows[i][0];
  CHECK(effective == "GHIJKL");

  const Run js = run({"lines", "--config", s.path("c.json"), "--format", "json"});
  const auto doc = nlohmann::json::parse(js.out);
  CHECK(doc["lines"].size() == 12);
  CHECK(doc["lines"][7]["strength"] == "2/9");
  CHECK(doc["effective_lines"][1]["cavity_polarization"] == "H");
}

TEST_CASE("localization command") {
  const Scratch s;
  const Run r = run({"localization", "--config", s.write("c.json", R"({"visibility": 0.6, "sigma_nm": 70})")});
  REQUIRE(r.code == 0);
  CHECK(row_value(r.out, "sigma_from_visibility_nm") == doctest::Approx(70.0).epsilon(0.01));
  CHECK(row_value(r.out, "g_effective_mhz") == doctest::Approx(1.41).epsilon(0.01));
  CHECK(row_value(r.out, "visibility_from_sigma") == doctest::Approx(0.597).epsilon(0.005));

  const Run one = run({"localization", "--config", s.write("v1.json", R"({"visibility": 1})")});
  CHECK(row_value(one.out, "sigma_from_visibility_nm") == 0.0);

  const Run bad = run({"localization", "--config", s.write("v2.json", R"({"visibility": 1.5})")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("visibility") != std::string::npos);
}

TEST_CASE("spectrum command") {
  const Scratch s;
  const std::string cfg =
      s.write("c.json", R"({"n_max": 1, "b_field_mt": 0.61, "sweep_start_mhz": -2, "sweep_stop_mhz": 2,
                           "sweep_points": 5})");
  const Run one = run({"spectrum", "--config", cfg, "--workers", "1", "--output", s.path("w1.csv")});
  const Run three = run({"spectrum", "--config", cfg, "--workers", "3", "--output", s.path("w3.csv")});
  REQUIRE(one.code == 0);
  REQUIRE(three.code == 0);
  const std::string csv = slurp(s.path("w1.csv"));
  CHECK(csv == slurp(s.path("w3.csv")));
  const auto rows = lines_of(csv);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "detuning_mhz,n_h,n_v,rate_h_cps,rate_v_cps,rate_total_cps,residual,top_fock_pop");
  CHECK(rows[1].rfind("-2,", 0) == 0);
  CHECK(rows[5].rfind("2,", 0) == 0);

  const Run js = run({"spectrum", "--config", cfg, "--format", "json"});
  REQUIRE(js.code == 0);
  const auto doc = nlohmann::json::parse(js.out);
  CHECK(doc["records"].size() == 5);

  const Run plot = run({"spectrum", "--config", cfg, "--output", s.path("p.csv"), "--plot-script", s.path("p.gp")});
  REQUIRE(plot.code == 0);
  CHECK(slurp(s.path("p.gp")).find("p.csv") != std::string::npos);
  CHECK(run({"spectrum", "--config", cfg, "--plot-script", s.path("q.gp")}).code == 2);
}

TEST_CASE("solver failures exit with code 3 and name the detuning") {
  const Scratch s;
  const std::string cfg =
      s.write("c.json", R"({"n_max": 1, "omega1_mhz": 0, "sweep_start_mhz": -1, "sweep_stop_mhz": 1,
                           "sweep_points": 3})");
  const Run r = run({"spectrum", "--config", cfg});
  CHECK(r.code == 3);
  CHECK(r.err.find("detuning -1 MHz") != std::string::npos);
}

TEST_CASE("standing-wave command") {
  const Scratch s;
  // Weak drive, where the detected rate follows g^2.
  const std::string base = R"("n_max": 1, "omega1_mhz": 2, "displacement_points": 9)";
  const Run point = run({"standing-wave", "--config", s.write("s0.json", "{" + base + R"(, "sigma_nm": 0})")});
  REQUIRE(point.code == 0);
  const auto rows = lines_of(point.out);
  CHECK(rows[0] == "displacement_nm,rate_cps");
  CHECK(rows.size() == 1 + 9 + 6);
  CHECK(comment_value(point.out, "fit_visibility") == doctest::Approx(1.0).epsilon(0.01));

  const Run wide = run({"standing-wave", "--config", s.write("s1.json", "{" + base + R"(, "sigma_nm": 100})")});
  REQUIRE(wide.code == 0);
  CHECK(comment_value(wide.out, "fit_visibility") == doctest::Approx(0.35).epsilon(0.02 / 0.35));
  CHECK(comment_value(wide.out, "closed_form_visibility") == doctest::Approx(0.349).epsilon(0.005));
}

TEST_CASE("steady-state command") {
  const Scratch s;
  const std::string cfg = s.write("c.json", R"({"n_max": 1})");
  const Run r = run({"steady-state", "--config", cfg});
  REQUIRE(r.code == 0);
  CHECK(row_value(r.out, "residual") < 1e-10);
  CHECK(row_value(r.out, "population_s") + row_value(r.out, "population_p") + row_value(r.out, "population_d") ==
        doctest::Approx(1.0).epsilon(1e-8));  // printed to 9 digits
  CHECK(r.out == run({"steady-state", "--config", cfg}).out);
  CHECK(r.err.empty());
  CHECK_FALSE(run({"steady-state", "--config", cfg, "--verbose"}).err.empty());
}

TEST_CASE("argument errors exit with code 2") {
  const Scratch s;
  CHECK(run({}).code == 2);
  CHECK(run({"lines"}).code == 2);
  CHECK(run({"frobnicate", "--config", s.write("c.json", "{}")}).code == 2);
  CHECK(run({"lines", "--config", s.path("missing.json")}).code == 2);
  CHECK(run({"lines", "--config", s.path("c.json"), "--format", "xml"}).code == 2);
  CHECK(run({"lines", "--config", s.path("c.json"), "--workers", "0"}).code == 2);
  CHECK(run({"lines", "--config", s.write("u.json", R"({"bogus": 1})")}).code == 2);
}

TEST_CASE("the installed tool reports exit codes") {
  const Scratch s;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const std::string tool = IONCAV_TOOL;
  CHECK(status(tool + " lines --config " + s.write("ok.json", "{}")) == 0);
  CHECK(status(tool + " lines --config " + s.write("bad.json", R"({"nope": 0})")) == 2);
  CHECK(status(tool + " spectrum --config " +
               s.write("fail.json", R"({"n_max": 1, "omega1_mhz": 0, "sweep_points": 2})")) == 3);
}
