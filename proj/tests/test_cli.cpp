#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "magelas/config.hpp"
#include "magelas/io.hpp"

using namespace magelas;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(bool(out));
  out << text;
}

// Scratch area for one test case, wiped up front so reruns start clean.
fs::path scratch(const std::string &name) {
  const fs::path dir = fs::path("cli_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the built binary (path from the environment) and returns its exit
// status; stderr goes to `errfile` when given.
int run_cli(const std::string &args, const fs::path &errfile = {}) {
  const char *cli = std::getenv("MAGELAS_CLI");
  REQUIRE(cli != nullptr);
  std::string cmd = std::string(cli) + " " + args;
  if (!errfile.empty())
    cmd += " 2> " + errfile.string();
  else
    cmd += " 2> /dev/null";
  const int ret = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(ret));
  return WEXITSTATUS(ret);
}

const char *tiny_gamma(const char *outdir_key = "") {
  static std::string text;
  text = std::string("{\n"
                     "  \"kind\": \"gamma-study\",\n"
                     "  \"n\": 8,\n"
                     "  \"anisotropy\": {\"kind\": \"uniaxial\", \"kappa\": "
                     "4.0, \"axis\": [1, 0, 0]},\n"
                     "  \"eps\": [0.2, 0.1]") +
         outdir_key + "\n}\n";
  return text.c_str();
}

} // namespace

TEST_CASE("csv writer follows the quoting rules") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("with,comma") == "\"with,comma\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");

  const fs::path dir = scratch("csv");
  write_csv((dir / "t.csv").string(), {"a", "b"}, {{"1", "x,y"}, {"2", "z"}});
  CHECK(slurp(dir / "t.csv") == "a,b\n1,\"x,y\"\n2,z\n");
  CHECK_THROWS_AS(write_csv((dir / "t.csv").string(), {"a", "b"}, {{"1"}}),
                  std::runtime_error);
}

TEST_CASE("numbers round-trip through their decimal form") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 4.028201668596126, 0.0})
    CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
}

TEST_CASE("configuration parsing, defaults and validation messages") {
  const ExperimentConfig c = parse_config(tiny_gamma());
  CHECK(c.kind == "gamma-study");
  CHECK(c.n == 8);
  CHECK(c.kappa == 4.0);
  CHECK(c.beta == 0.5);           // default
  CHECK(c.law.q == 2.0);          // default
  CHECK(c.eps_schedule.size() == 2);
  CHECK(c.outdir == ".");

  // The resolved manifest parses back to the same resolved manifest.
  const std::string m1 = manifest_json(c);
  const std::string m2 = manifest_json(parse_config(m1));
  CHECK(m1 == m2);

  const auto message_of = [](const std::string &text) {
    try {
      parse_config(text);
    } catch (const std::invalid_argument &e) {
      return std::string(e.what());
    }
    return std::string("(no error)");
  };

  // The admissible-exponent failure names the inequality it violates.
  const std::string beta_msg = message_of(
      "{\"kind\": \"gamma-study\", \"beta\": 1.2}");
  CHECK(beta_msg.find("0 < beta < min(2(q-1)/q, 1)") != std::string::npos);

  CHECK(message_of("{\"kind\": \"unknown-study\"}").find("kind") !=
        std::string::npos);
  CHECK(message_of("{}").find("kind") != std::string::npos);
  CHECK(message_of("{\"kind\": \"gamma-study\", \"typo\": 1}")
            .find("unknown key") != std::string::npos);
  CHECK(message_of("{\"kind\": \"gamma-study\", \"eps\": [0.1, 0.2]}")
            .find("decreasing") != std::string::npos);
  CHECK(message_of("not json").find("JSON") != std::string::npos);
  CHECK(message_of("{\"kind\": \"gamma-study\", \"n\": \"big\"}")
            .find("type error") != std::string::npos);
  CHECK(message_of("{\"kind\": \"stray-check\", \"n\": 7}").find("even") !=
        std::string::npos);
  CHECK(message_of("{\"kind\": \"minimize-limit\"}").find("Dirichlet") !=
        std::string::npos);
  CHECK(message_of("{\"kind\": \"gamma-study\", \"boundary\": {\"faces\": "
                   "[\"x?\"]}}")
            .find("face") != std::string::npos);
}

TEST_CASE("driver writes results, manifest and snapshots") {
  const fs::path dir = scratch("run");
  spit(dir / "cfg.json", tiny_gamma());
  const int code = run_cli("--config " + (dir / "cfg.json").string() +
                           " --out " + (dir / "out").string() +
                           " --snapshots --threads 2");
  CHECK(code == 0);

  const std::string csv = slurp(dir / "out" / "results.csv");
  CHECK(csv.rfind("eps,elastic,magnetic,stray,zeeman,total,"
                  "magnetic_per_area,mu_l1,disp_w12,layer_volume,"
                  "elastic_limit,magnetic_limit,stray_limit,zeeman_limit,"
                  "total_limit,interface_area,tension,profile_cost,"
                  "oracle_cost\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3); // header + 2 rows

  // Snapshots: base labels plus one magnetization per schedule point.
  for (const char *f : {"labels.vtk", "mu_000.vtk", "mu_001.vtk"})
    CHECK(slurp(dir / "out" / f).rfind("# vtk DataFile", 0) == 0);

  // The manifest reproduces the run byte for byte (round-trip property).
  const int again = run_cli("--config " +
                            (dir / "out" / "manifest.json").string() +
                            " --out " + (dir / "out2").string());
  CHECK(again == 0);
  CHECK(slurp(dir / "out2" / "results.csv") == csv);
}

TEST_CASE("fixed seed and thread count give byte-identical output") {
  const fs::path dir = scratch("det");
  // A seeded experiment with actual randomness in its starting state.
  spit(dir / "cfg.json",
       "{\n"
       "  \"kind\": \"minimize-diffuse\",\n"
       "  \"n\": 8,\n"
       "  \"anisotropy\": {\"kind\": \"uniaxial\", \"kappa\": 2.0, \"axis\": "
       "[1, 0, 0]},\n"
       "  \"eps\": [0.1],\n"
       "  \"field\": {\"kind\": \"uniform\", \"vector\": [2, 0, 0]},\n"
       "  \"boundary\": {\"faces\": [\"x-\"]},\n"
       "  \"init_labels\": \"constant\",\n"
       "  \"steps\": 10,\n"
       "  \"jitter\": 0.05,\n"
       "  \"seed\": 77\n"
       "}\n");
  const std::string base = "--config " + (dir / "cfg.json").string();
  CHECK(run_cli(base + " --out " + (dir / "a").string() + " --threads 1") ==
        0);
  CHECK(run_cli(base + " --out " + (dir / "b").string() + " --threads 4") ==
        0);
  const std::string a = slurp(dir / "a" / "results.csv");
  CHECK(a == slurp(dir / "b" / "results.csv"));
  CHECK(std::count(a.begin(), a.end(), '\n') >= 2);

  // A different seed moves the jittered start, so the trace changes.
  CHECK(run_cli(base + " --out " + (dir / "c").string() + " --seed 78") == 0);
  CHECK(a != slurp(dir / "c" / "results.csv"));
}

TEST_CASE("exit codes separate validation from numeric failures") {
  const fs::path dir = scratch("codes");

  spit(dir / "beta.json", "{\"kind\": \"gamma-study\", \"beta\": 1.2}");
  const fs::path err = dir / "stderr.txt";
  CHECK(run_cli("--config " + (dir / "beta.json").string(), err) == 2);
  CHECK(slurp(err).find("0 < beta < min(2(q-1)/q, 1)") != std::string::npos);

  CHECK(run_cli("--config " + (dir / "missing.json").string()) == 2);

  // An eps the injectivity certificate rejects is a configuration error.
  spit(dir / "eps.json",
       "{\"kind\": \"minimize-diffuse\", \"n\": 8, \"eps\": [3.0], "
       "\"boundary\": {\"faces\": [\"x-\"], \"affine\": "
       "[[0.4, 0, 0], [0, 0, 0], [0, 0, 0]]}, \"outdir\": \"" +
           (dir / "eps_out").string() + "\"}");
  CHECK(run_cli("--config " + (dir / "eps.json").string(), err) == 2);
  CHECK(slurp(err).find("certificate") != std::string::npos);

  // A solve whose internal cross-check trips reports a numeric failure.
  spit(dir / "tiny.json", "{\"kind\": \"stray-check\", \"n\": 4, \"outdir\": "
                          "\"" +
                              (dir / "tiny_out").string() + "\"}");
  CHECK(run_cli("--config " + (dir / "tiny.json").string()) == 3);
}
