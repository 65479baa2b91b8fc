#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "grok/cli.hpp"
#include "grok/io.hpp"

using namespace grok;
namespace fs = std::filesystem;

namespace {

fs::path dir() {
  const fs::path d = fs::temp_directory_path() / "grok_test_cli";
  fs::create_directories(d);
  return d;
}

std::string p(const std::string& name) { return (dir() / name).string(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int invoke(const std::vector<std::string>& args) { return cli::run_cli(args); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen writes instance files") {
  CHECK(invoke({"gen", "sparse", "--n", "100", "--s", "5", "--N", "30", "--tau", "0", "--snr", "1e8", "--seed", "0",
             "-o", p("inst.json")}) == cli::kExitOk);
  CHECK(fs::exists(p("inst.json")));
  CHECK(invoke({"gen", "lowrank", "--n1", "10", "--n2", "10", "--r", "2", "--N", "70", "--mode", "completion",
             "--tau", "0", "--seed", "0", "-o", p("low.json")}) == cli::kExitOk);
  const auto inst = io::read_instance(p("low.json"));
  CHECK(std::get<LowRankInstance>(inst).N == 70);
}

TEST_CASE("gen usage errors exit 2") {
  CHECK(invoke({"gen", "sparse", "--n", "100", "--s", "5"}) == cli::kExitUsage);
  CHECK(invoke({"gen", "sparse", "--n", "10", "--s", "50", "--N", "5", "-o", p("x.json")}) == cli::kExitUsage);
  CHECK(invoke({"gen", "lowrank", "--n1", "3", "--n2", "3", "--r", "1", "--N", "5", "--mode", "bogus", "-o",
             p("x.json")}) == cli::kExitUsage);
  CHECK(invoke({}) == cli::kExitUsage);
  CHECK(invoke({"frobnicate"}) == cli::kExitUsage);
}

TEST_CASE("run is deterministic and writes trace and report") {
  REQUIRE(invoke({"gen", "sparse", "--n", "30", "--s", "3", "--N", "15", "--seed", "2", "-o", p("small.json")}) == 0);
  const std::vector<std::string> base = {"run", "--instance", p("small.json"), "--method", "subgradient", "--reg",
                                         "l1", "--alpha", "0.1", "--beta", "1e-4", "--init-scale", "1e-6",
                                         "--steps", "3000"};
  auto args = base;
  args.insert(args.end(), {"--trace", p("t1.csv"), "--report", p("r1.json")});
  CHECK(invoke(args) == 0);
  args = base;
  args.insert(args.end(), {"--trace", p("t2.csv"), "--report", p("r2.json")});
  CHECK(invoke(args) == 0);
  CHECK(slurp(p("t1.csv")) == slurp(p("t2.csv")));
  const auto rep = io::read_json(p("r1.json"));
  CHECK(rep.at("status") == "ok");
  CHECK(rep.at("version") == "v1");
  CHECK(rep.at("config").at("beta") == 1e-4);
  CHECK(rep.contains("phases"));
  CHECK(rep.at("bounds").contains("rho2"));
}

TEST_CASE("projected run interpolates at the first update") {
  REQUIRE(invoke({"gen", "sparse", "--n", "30", "--s", "3", "--N", "15", "--snr", "inf", "-o", p("clean.json")}) == 0);
  CHECK(invoke({"run", "--instance", p("clean.json"), "--method", "projected", "--reg", "l1", "--alpha", "0.1",
             "--beta", "1e-3", "--steps", "10", "--eval-every", "1", "--trace", p("proj.csv"), "--report",
             p("proj.json")}) == 0);
  const Trace t = io::read_trace_csv(p("proj.csv"));
  CHECK(t.records[1].train_err <= 1e-10);
}

TEST_CASE("config file values are overridden by flags") {
  std::ofstream(p("cfg.json")) << R"({"alpha": 0.05, "beta": 1e-3, "steps": 20, "reg": "l1"})";
  CHECK(invoke({"run", "--instance", p("small.json"), "--config", p("cfg.json"), "--beta", "1e-2", "--trace",
             p("c.csv"), "--report", p("c.json")}) == 0);
  const auto rep = io::read_json(p("c.json"));
  CHECK(rep.at("config").at("alpha") == 0.05);
  CHECK(rep.at("config").at("beta") == 1e-2);
  std::ofstream(p("badcfg.json")) << R"({"alpah": 0.05})";
  CHECK(invoke({"run", "--instance", p("small.json"), "--config", p("badcfg.json"), "--trace", p("c.csv"),
             "--report", p("c.json")}) == cli::kExitUsage);
}

TEST_CASE("run I/O failures exit 1") {
  CHECK(invoke({"run", "--instance", p("does_not_exist.json"), "--trace", p("x.csv"), "--report", p("x.json")}) ==
        cli::kExitIo);
  CHECK(invoke({"run", "--instance", p("small.json"), "--steps", "5", "--trace", "/nonexistent_dir/x.csv",
             "--report", p("x.json")}) == cli::kExitIo);
}

TEST_CASE("report recomputes phases at the given tolerance") {
  CHECK(invoke({"report", "--trace", p("t1.csv"), "--tol", "1e-2", "-o", p("rep.json")}) == 0);
  const auto rep = io::read_json(p("rep.json"));
  CHECK(rep.at("phases").contains("t1"));
  CHECK(rep.at("train_tol") == 1e-2);
  std::ofstream(p("broken.csv")) << "step,train_err\n1,2\n";
  CHECK(invoke({"report", "--trace", p("broken.csv")}) == cli::kExitIo);
}

TEST_CASE("plot writes an SVG with one line per series") {
  CHECK(invoke({"plot", "--trace", p("t1.csv"), "--series", "train_err,rec_err", "-o", p("fig.svg")}) == 0);
  const std::string svg = slurp(p("fig.svg"));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("rec_err") != std::string::npos);
  CHECK(invoke({"plot", "--trace", p("t1.csv"), "--series", "nope", "-o", p("fig2.svg")}) == cli::kExitUsage);
}

TEST_CASE("plot sv expands to one line per singular value") {
  REQUIRE(invoke({"gen", "lowrank", "--n1", "4", "--n2", "3", "--r", "1", "--N", "8", "-o", p("lr.json")}) == 0);
  REQUIRE(invoke({"run", "--instance", p("lr.json"), "--reg", "nuclear", "--beta", "1e-3", "--init-scale", "0.1",
               "--steps", "20", "--components", "--trace", p("lr.csv"), "--report", p("lr_r.json")}) == 0);
  CHECK(invoke({"plot", "--trace", p("lr.csv"), "--series", "sv", "-o", p("sv.svg")}) == 0);
  const std::string svg = slurp(p("sv.svg"));
  for (const char* name : {">sv1<", ">sv2<", ">sv3<"}) CHECK(svg.find(name) != std::string::npos);
  CHECK(svg.find(">sv4<") == std::string::npos);
}

TEST_CASE("sweep writes one trace per point and a summary") {
  std::ofstream(p("sweep.json")) << R"({
    "instance": {"kind": "sparse", "n": 20, "s": 2, "N": 10},
    "run": {"reg": "l1", "alpha": 0.1, "steps": 200, "init_scale": 1e-6},
    "grid": {"beta": [1e-3, 1e-4], "seed": [0, 1]}
  })";
  const std::string out = p("sweep_out");
  fs::remove_all(out);
  CHECK(invoke({"sweep", p("sweep.json"), "-o", out}) == 0);
  const std::string summary = slurp(out + "/summary.csv");
  long lines = 0;
  for (char c : summary) lines += c == '\n';
  CHECK(lines == 5);
  CHECK(summary.rfind("run_id,status,alpha,beta", 0) == 0);
  long csvs = 0;
  for (const auto& e : fs::directory_iterator(out)) csvs += e.path().extension() == ".csv";
  CHECK(csvs == 5);

  // Same spec, same ids.
  const std::string summary_before = summary;
  CHECK(invoke({"sweep", p("sweep.json"), "-o", out}) == 0);
  CHECK(slurp(out + "/summary.csv") == summary_before);
}

TEST_CASE("sweep with an empty grid exits 2") {
  std::ofstream(p("empty.json")) << R"({"instance": {"kind": "sparse", "n": 5, "s": 1, "N": 3}, "grid": {}})";
  CHECK(invoke({"sweep", p("empty.json"), "-o", p("empty_out")}) == cli::kExitUsage);
  std::ofstream(p("empty2.json")) << R"({"instance": {"kind": "sparse", "n": 5, "s": 1, "N": 3}, "grid": {"beta": []}})";
  CHECK(invoke({"sweep", p("empty2.json"), "-o", p("empty_out")}) == cli::kExitUsage);
}

TEST_CASE("sweep where every run fails exits 1") {
  std::ofstream(p("allfail.json")) << R"({
    "instance": {"kind": "sparse", "n": 5, "s": 1, "N": 3},
    "run": {"reg": "nuclear", "steps": 5},
    "grid": {"seed": [0, 1]}
  })";
  CHECK(invoke({"sweep", p("allfail.json"), "-o", p("fail_out")}) == cli::kExitIo);
  CHECK(fs::exists(p("fail_out") + "/summary.csv"));
}

TEST_CASE("help exits 0") { CHECK(invoke({"--help"}) == 0); }

}
