// End-to-end tests of the twsolve binary: exit codes, JSON/CSV shapes,
// config-file precedence and rerun determinism. The binary path comes in
// through TWSOLVE_BIN from the build.

#ifdef TWSOLVE_BIN

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "twsolve/io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "twsolve_cli_tests";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Run the tool through /bin/sh; `env_prefix` lets a test pin TWSOLVE_THREADS.
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int serial = 0;
  const fs::path dir = scratch_dir();
  const fs::path out_p = dir / ("stdout." + std::to_string(serial) + ".txt");
  const fs::path err_p = dir / ("stderr." + std::to_string(serial) + ".txt");
  ++serial;

  std::string cmd = env_prefix;
  if (!cmd.empty()) cmd += " ";
  cmd += "\"" TWSOLVE_BIN "\" " + args + " > \"" + out_p.string() +
         "\" 2> \"" + err_p.string() + "\"";
  const int status = std::system(cmd.c_str());

  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_p);
  r.err = slurp(err_p);
  return r;
}

std::string first_line(const std::string& s) {
  return s.substr(0, s.find('\n'));
}

std::set<std::string> csv_ids(const std::string& csv) {
  std::set<std::string> ids;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma != std::string::npos) ids.insert(line.substr(0, comma));
  }
  return ids;
}

long line_count(const std::string& s) {
  return std::count(s.begin(), s.end(), '\n');
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
  REQUIRE(out.good());
}

}  // namespace

TEST_CASE("cli usage errors exit 2, help exits 0", "[cli]") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("").code == 2);             // subcommand required
  CHECK(run_cli("frobnicate").code == 2);   // unknown subcommand
  CHECK(run_cli("portrait").code == 2);     // --mu is required
  CHECK(run_cli("homoclinic --bracket nonsense").code == 2);
  CHECK(run_cli("portrait --mu -0.85 --t-budget 0").code == 2);
}

TEST_CASE("cli portrait emits trajectory csv", "[cli]") {
  const auto r = run_cli("portrait --mu -0.85 --t-budget 10");
  REQUIRE(r.code == 0);
  CHECK(first_line(r.out) == "trajectory_id,T,U,W");
  // six default seeds -> trajectory ids 0..5
  CHECK(csv_ids(r.out) ==
        std::set<std::string>{"0", "1", "2", "3", "4", "5"});

  SECTION("--out writes the same bytes to a file, rerun is byte-identical") {
    const fs::path f = scratch_dir() / "portrait.csv";
    const auto r1 = run_cli("portrait --mu -0.85 --t-budget 10 --out \"" +
                            f.string() + "\"");
    REQUIRE(r1.code == 0);
    CHECK(r1.out.empty());
    CHECK(slurp(f) == r.out);
  }
}

TEST_CASE("cli portrait seeds file", "[cli]") {
  const fs::path seeds = scratch_dir() / "seeds.txt";
  write_file(seeds,
             "# two seeds, comma or whitespace separated\n"
             "0.5 0.0\n"
             "1.2,0.1  # trailing comment\n");
  const auto r = run_cli("portrait --mu -0.85 --t-budget 5 --seeds-file \"" +
                         seeds.string() + "\"");
  REQUIRE(r.code == 0);
  CHECK(csv_ids(r.out) == std::set<std::string>{"0", "1"});

  const fs::path empty = scratch_dir() / "seeds_empty.txt";
  write_file(empty, "# nothing here\n\n");
  CHECK(run_cli("portrait --mu -0.85 --seeds-file \"" + empty.string() +
                "\"").code == 2);
  CHECK(run_cli("portrait --mu -0.85 --seeds-file /nonexistent/seeds.txt")
            .code == 2);
}

TEST_CASE("cli homoclinic locates the loop and reports indicial data",
          "[cli]") {
  const auto r = run_cli("homoclinic");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["A"].get<double>() == 1.0);
  CHECK(j["mu_star"].get<double>() == Catch::Approx(-0.83577932).margin(1e-5));
  CHECK(j["x_star"].get<double>() == Catch::Approx(1.4262128).margin(1e-4));
  CHECK(j["alpha"].get<double>() == Catch::Approx(1.5018).margin(1e-3));
  CHECK(j["beta"].get<double>() == Catch::Approx(0.6658).margin(1e-3));
  CHECK(std::abs(j["alpha_times_beta"].get<double>() - 1.0) <= 1e-10);
  CHECK(j["iterations"].get<int>() >= 1);
  CHECK(j["meta"]["version"] == "1.0.0");
  CHECK(j["meta"]["flags"]["bracket"] == "-0.9:-0.8");
  CHECK(j["meta"]["tolerances"]["mu_tol"].get<double>() == 1e-6);

  SECTION("bracket without a sign change exits 4") {
    const auto bad = run_cli("homoclinic --bracket -0.5:-0.4");
    CHECK(bad.code == 4);
    CHECK(bad.err.find("twsolve:") != std::string::npos);
  }

  SECTION("series --compare against the located loop converges") {
    // Feed the loop parameters back in at full precision; the looser
    // truncation must sit strictly above the finer one.
    const std::string at =
        " --mu " + twsolve::format_double(j["mu_star"].get<double>()) +
        " --xstar " + twsolve::format_double(j["x_star"].get<double>());
    const auto r10 = run_cli("series" + at + " --Nl 10 --compare");
    const auto r40 = run_cli("series" + at + " --Nl 40 --compare");
    REQUIRE(r10.code == 0);
    REQUIRE(r40.code == 0);
    const double e10 =
        json::parse(r10.out)["errors"]["lower_sup_T_0_6"].get<double>();
    const double e40 =
        json::parse(r40.out)["errors"]["lower_sup_T_0_6"].get<double>();
    CHECK(e10 > 0.08);
    CHECK(e10 < 0.2);
    CHECK(e40 > 1.5e-2);
    CHECK(e40 < 3e-2);
    CHECK(e10 > 2.0 * e40);
    const double u40 =
        json::parse(r40.out)["errors"]["upper_sup_T_m6_0"].get<double>();
    CHECK(u40 < 1e-4);
  }
}

TEST_CASE("cli series json and profile csv", "[cli]") {
  const fs::path prof = scratch_dir() / "profile.csv";
  const auto r = run_cli("series --out \"" + prof.string() + "\"");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["b1"].get<double>() == Catch::Approx(1.598886131406).margin(1e-9));
  CHECK(j["a"].size() == 20);
  CHECK(j["b"].size() == 40);
  CHECK(j["a"][0].get<double>() ==
        Catch::Approx(5.239343533).margin(1e-6));
  CHECK(j["derivative_jump"].get<double>() ==
        Catch::Approx(-6.940169079e-2).margin(1e-6));
  CHECK(j["upper_ill_conditioned"].get<bool>() == false);

  const std::string csv = slurp(prof);
  CHECK(first_line(csv) == "T,U");
  CHECK(line_count(csv) == 802);  // header + T = -8(0.02)8
  // 17-significant-digit formatting of the double nearest 1.426095
  CHECK(csv.find("\n0,1.4260949999999999\n") != std::string::npos);

  SECTION("reruns are byte-identical") {
    const auto r2 = run_cli("series --out \"" + prof.string() + "\"");
    REQUIRE(r2.code == 0);
    CHECK(r2.out == r.out);
    CHECK(slurp(prof) == csv);
  }

  SECTION("zero apex gives the zero profile") {
    const fs::path zp = scratch_dir() / "zero.csv";
    const auto rz = run_cli("series --xstar 0 --out \"" + zp.string() + "\"");
    REQUIRE(rz.code == 0);
    const json jz = json::parse(rz.out);
    CHECK(jz["b1"].get<double>() == 0.0);
    CHECK(jz["derivative_jump"].get<double>() == 0.0);
    const std::string zcsv = slurp(zp);
    CHECK(zcsv.find("\n-8,0\n") != std::string::npos);
    CHECK(zcsv.find("\n0,0\n") != std::string::npos);
    CHECK(zcsv.find("\n8,0\n") != std::string::npos);
  }

  SECTION("calibration failure exits 5") {
    const auto bad = run_cli("series --Nl 60");
    CHECK(bad.code == 5);
    CHECK(bad.err.find("twsolve:") != std::string::npos);
  }
}

TEST_CASE("cli verify", "[cli]") {
  SECTION("single passing case") {
    const auto r = run_cli("verify IVe_a --draws 20 --seed 7");
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j["cases"].size() == 1);
    CHECK(j["cases"][0]["id"] == "IVe_a");
    CHECK(j["cases"][0]["pass"].get<bool>());
    CHECK(j["cases"][0]["max_residual"].get<double>() <= 1e-12);
    CHECK(j["all_pass"].get<bool>());
    CHECK(j["meta"]["tolerances"]["threshold"].get<double>() == 1e-10);
  }

  SECTION("verify all surfaces the two inconsistent families") {
    const auto r = run_cli("verify all --draws 20 --seed 7");
    CHECK(r.code == 6);
    const json j = json::parse(r.out);
    REQUIRE(j["cases"].size() == 15);
    CHECK_FALSE(j["all_pass"].get<bool>());
    int failing = 0;
    for (const auto& c : j["cases"]) {
      if (!c["pass"].get<bool>()) {
        ++failing;
        CHECK(c["id"].get<std::string>().rfind("BIO_", 0) == 0);
      } else {
        CHECK(c["max_residual"].get<double>() <= 1e-10);
      }
    }
    CHECK(failing == 2);
  }

  SECTION("unknown case and zero draws exit 2") {
    CHECK(run_cli("verify nosuchcase").code == 2);
    CHECK(run_cli("verify IVc --draws 0").code == 2);
  }

  SECTION("fan-out width does not change the report") {
    const fs::path one = scratch_dir() / "verify_t1.json";
    const fs::path many = scratch_dir() / "verify_tn.json";
    const auto r1 = run_cli("verify all --draws 5 --seed 3 --out \"" +
                                one.string() + "\"",
                            "TWSOLVE_THREADS=1");
    const auto rn = run_cli("verify all --draws 5 --seed 3 --out \"" +
                            many.string() + "\"");
    CHECK(r1.code == 6);
    CHECK(rn.code == 6);
    CHECK(slurp(one) == slurp(many));
    CHECK_FALSE(slurp(one).empty());
  }
}

TEST_CASE("cli hamiltonian equilibria and level sets", "[cli]") {
  const fs::path orbits = scratch_dir() / "orbits.csv";
  const auto r = run_cli("hamiltonian --out \"" + orbits.string() + "\"");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j["equilibria"].size() == 3);
  CHECK(j["equilibria"][0]["u"].get<double>() ==
        Catch::Approx(0.271286).margin(1e-5));
  CHECK(j["equilibria"][0]["kind"] == "center");
  CHECK(j["equilibria"][1]["u"].get<double>() ==
        Catch::Approx(1.0).margin(1e-9));
  CHECK(j["equilibria"][1]["kind"] == "saddle");
  CHECK(j["equilibria"][2]["u"].get<double>() ==
        Catch::Approx(1.228714).margin(1e-5));
  CHECK(j["equilibria"][2]["kind"] == "center");

  REQUIRE(j["orbits"].size() == 6);  // 2 centers x 3 offsets
  for (const auto& o : j["orbits"]) CHECK(std::isfinite(o["H"].get<double>()));

  const std::string csv = slurp(orbits);
  CHECK(first_line(csv) == "trajectory_id,T,U,W");
  CHECK(csv_ids(csv) == std::set<std::string>{"0", "1", "2", "3", "4", "5"});

  SECTION("degenerate cubic coefficient exits 2") {
    CHECK(run_cli("hamiltonian --lambda3 0").code == 2);
  }
}

TEST_CASE("cli config file supplies defaults, flags win", "[cli]") {
  const fs::path good = scratch_dir() / "good.ini";
  write_file(good, "[homoclinic]\nbracket=-0.9:-0.8\ntol=1e-5\n");
  const auto r = run_cli("--config \"" + good.string() + "\" homoclinic");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["meta"]["flags"]["bracket"] == "-0.9:-0.8");
  CHECK(j["meta"]["flags"]["tol"].get<double>() == 1e-5);

  const fs::path bad = scratch_dir() / "bad.ini";
  write_file(bad, "[homoclinic]\nbracket=-0.5:-0.4\n");
  // config value is really consumed -> bracketing failure...
  CHECK(run_cli("--config \"" + bad.string() + "\" homoclinic").code == 4);
  // ...but an explicit flag overrides it.
  const auto over = run_cli("--config \"" + bad.string() +
                            "\" homoclinic --bracket -0.9:-0.8");
  CHECK(over.code == 0);
  CHECK(json::parse(over.out)["meta"]["flags"]["bracket"] == "-0.9:-0.8");
}

#endif  // TWSOLVE_BIN
