#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trimlab/cli.hpp"

using trimlab::cli::parse_and_dispatch;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = parse_and_dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "trimlab-cli-test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("digits prints N digits") {
  const Run r = run({"digits", "--system", "gauss", "--seed", "7", "--n", "10"});
  CHECK(r.code == 0);
  std::istringstream words(r.out);
  int count = 0;
  for (long d; words >> d;) {
    CHECK(d >= 1);
    ++count;
  }
  CHECK(count == 10);
  CHECK(run({"digits", "--system", "gauss", "--seed", "7", "--n", "10"}).out == r.out);
  CHECK(run({"digits", "--x", "415/93", "--n", "3"}).out == "2 6 7\n");
  CHECK(run({"digits", "--quadratic", "1,1,5,2", "--n", "5"}).out == "1 1 1 1 1\n");
  CHECK(run({"digits", "--system", "doubling", "--x", "1/3", "--n", "3"}).out == "3 1 3\n");
  const Run csv = run({"digits", "--n", "3", "--x", "415/93", "--format", "csv"});
  CHECK(csv.out.find("index,symbol,value\n0,2,2\n1,6,6\n2,7,7\n") != std::string::npos);
}

TEST_CASE("trim prints the trimmed sum") {
  const Run r = run({"trim", "--values", "3,1,4,1,5", "--threshold", "4"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("raw=14 trimmed=9 delta=1", 0) == 0);
  const Run csv = run({"trim", "--values", "7,7", "--threshold", "6", "--format", "csv"});
  CHECK(csv.out == "seed,N,raw,max,argmax,delta,exceedances,trimmed\n0,2,14,7,0,1,2,7\n");
  const Run orbit = run({"trim", "--system", "gauss", "--seed", "3", "--n", "1000"});
  CHECK(orbit.code == 0);
  CHECK(orbit.out.find("threshold=6907.") != std::string::npos);
}

TEST_CASE("usage errors exit with 1") {
  const Run missing = run({"experiment", "--config", "missing.toml-like"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("missing.toml-like") != std::string::npos);
  CHECK(run({"digits", "--n", "3", "--bogus"}).code == 1);
  CHECK(run({"digits"}).code == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"trim", "--values", "3,x", "--threshold", "1"}).code == 1);
  CHECK(run({"digits", "--n", "3", "--system", "tent"}).code == 1);
  CHECK(run({"mainterm", "--ngrid", "10", "--phi-p", "-1"}).code == 1);
  CHECK(run({"experiment", "--ngrid", "10,5", "--samples", "1"}).code == 1);
  CHECK(run({"counterexample", "--normalization", "cubic", "--samples", "1", "--ngrid", "10"}).code == 1);
}

TEST_CASE("runtime errors exit with 2") {
  const Run r = run({"digits", "--x", "1/2", "--n", "5"});
  CHECK(r.code == 2);
  CHECK(r.err.find("expansion-terminated") != std::string::npos);
  CHECK(run({"mainterm", "--ngrid", "10", "--out", "/nonexistent-dir/t.csv"}).code == 2);
}

TEST_CASE("help lists every flag and exits with 0") {
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"digits", {"--system", "--seed", "--n", "--x", "--quadratic", "--format", "--out"}},
      {"trim", {"--values", "--threshold", "--system", "--seed", "--n", "--epsilon", "--phi-p", "--phi-q"}},
      {"mainterm", {"--ngrid", "--gmode", "--gcap", "--epsilon", "--format", "--out"}},
      {"mixing", {"--n", "--gmode", "--gcap", "--report", "--format"}},
      {"experiment", {"--ngrid", "--samples", "--seed", "--threads", "--kind", "--gmode", "--out", "--format"}},
      {"counterexample", {"--ngrid", "--samples", "--normalization", "--threads", "--out"}},
      {"check-hypothesis", {"--ngrid", "--adversarial", "--epsilon"}},
  };
  for (const auto& [name, flags] : commands) {
    const Run r = run({name, "--help"});
    CHECK(r.code == 0);
    for (const auto& flag : flags) CHECK_MESSAGE(r.out.find(flag) != std::string::npos, name << " " << flag);
  }
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("config files supply defaults and flags override them") {
  const auto path = scratch("run.ini");
  {
    std::ofstream ini(path);
    ini << "# sample harness config\n[experiment]\nsamples = 3\nngrid = \"10,100\"\nseed = 5\n\n[trim]\nvalues = \"3,1,4,1,5\"\nthreshold = 4\n";
  }
  const Run from_file = run({"experiment", "--config", path.string()});
  CHECK(from_file.code == 0);
  CHECK(from_file.out.find("\"samples\":3") != std::string::npos);
  CHECK(from_file.out.find("\"base_seed\":5") != std::string::npos);
  CHECK(from_file.out.find("threads") == std::string::npos);
  const Run overridden = run({"experiment", "--config", path.string(), "--samples", "2"});
  CHECK(overridden.out.find("\"samples\":2") != std::string::npos);
  CHECK(run({"trim", "--config", path.string()}).out.rfind("raw=14 trimmed=9 delta=1", 0) == 0);
  CHECK(run({"trim", "--config", path.string(), "--threshold", "10"}).out.rfind("raw=14 trimmed=14 delta=0", 0) == 0);
}

TEST_CASE("seeded subcommands are bit-deterministic") {
  const std::vector<std::string> experiment{"experiment", "--samples", "6", "--ngrid", "10,100,1000", "--seed", "9"};
  auto serial = experiment;
  serial.insert(serial.end(), {"--threads", "1"});
  auto parallel = experiment;
  parallel.insert(parallel.end(), {"--threads", "8"});
  const Run a = run(serial), b = run(serial), c = run(parallel);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  const std::vector<std::string> counter{"counterexample", "--samples", "5", "--ngrid", "100,1000"};
  CHECK(run(counter).out == run(counter).out);
  const std::vector<std::string> classical{"experiment", "--kind", "classical", "--system", "doubling",
                                           "--observable", "indicator", "--samples", "4", "--ngrid", "10,100"};
  const Run d = run(classical);
  CHECK(d.code == 0);
  CHECK(d.out.find("seed,N,raw,average,deviation") != std::string::npos);
  CHECK(d.out == run(classical).out);
}

TEST_CASE("outputs to files and JSON") {
  const auto path = scratch("out.json");
  const Run r = run({"experiment", "--samples", "2", "--ngrid", "10,100", "--format", "json", "--out", path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  const auto document = nlohmann::json::parse(in);
  CHECK(document["records"].size() == 4);
  CHECK(document["config"]["kind"] == "trim");
  CHECK(document["config"]["mixing"]["mode"] == "asserted");
}

TEST_CASE("main terms, mixing and the hypothesis check") {
  const Run table = run({"mainterm", "--ngrid", "10,100"});
  CHECK(table.code == 0);
  CHECK(table.out.find("N,F1,F2,G,F3,tau\n10,") != std::string::npos);
  const Run json = run({"mainterm", "--ngrid", "10,100", "--format", "json"});
  CHECK(nlohmann::json::parse(json.out)["rows"].size() == 2);
  const Run mixing = run({"mixing", "--system", "doubling", "--observable", "indicator", "--n", "3"});
  CHECK(mixing.out == "N,g,G,mode\n0,1,0,exact\n1,1,1,exact\n2,1,2,exact\n3,1,3,exact\n");
  const Run markov = run({"mixing", "--system", "markov", "--matrix", "1/2,1/2;1/3,2/3", "--cell-values", "0,1",
                          "--n", "4"});
  CHECK(markov.code == 0);
  const Run report = run({"mixing", "--system", "doubling", "--observable", "cylinders", "--level", "2",
                          "--cell-values", "1,2,3,4", "--n", "5", "--report", "--format", "json"});
  CHECK(report.code == 0);
  CHECK(nlohmann::json::parse(report.out)["grows"] == false);
  const Run gauss = run({"check-hypothesis", "--ngrid", "2:2000"});
  CHECK(gauss.out.rfind("verdict=consistent", 0) == 0);
  const Run adversarial = run({"check-hypothesis", "--adversarial", "--ngrid", "2:2000"});
  CHECK(adversarial.out.rfind("verdict=inconsistent", 0) == 0);
}
