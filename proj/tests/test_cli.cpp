#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "freelab/cli.hpp"

using freelab::cli::run;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

Outcome call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("freelab_test_" + name); }

}  // namespace

TEST_CASE("moments elliptic") {
  const auto r = call({"moments", "elliptic", "--rho", "0.5", "--word", "1,*,1,*"});
  REQUIRE(r.code == 0);
  const auto j = r.report();
  CHECK(j["result"]["value"].get<double>() == 2.0);
  CHECK(j["result"]["word"] == "1,*,1,*");
  CHECK(j["config"]["command"] == json::array({"moments", "elliptic"}));
  CHECK(j["config"]["options"]["rho"] == "0.5");

  CHECK(call({"moments", "elliptic", "--rho", "0.3", "--word", "1,1,*"}).report()["result"]["value"] == 0.0);
  CHECK(call({"moments", "elliptic", "--rho", "0.5", "--word", "1,1"}).report()["result"]["value"] == 0.5);

  const auto csv = call({"moments", "elliptic", "--rho", "1", "--word", "1,1,1,1", "--format", "csv"});
  CHECK(csv.code == 0);
  CHECK(csv.out == "word,rho,value\n\"1,1,1,1\",1,2\n");
}

TEST_CASE("moments mixed, mp and profile") {
  const auto mixed = call({"moments", "mixed", "--rho", "0.7,0.3", "--word", "1,1@2,*@2,*"});
  REQUIRE(mixed.code == 0);
  CHECK(mixed.report()["result"]["value"].get<double>() == doctest::Approx(1.0));
  const auto cross = call({"moments", "mixed", "--rho", "0.7,0.3", "--word", "1,1@2,*,*@2"});
  CHECK(cross.report()["result"]["value"].get<double>() == 0.0);

  const auto mp = call({"moments", "mp", "--y", "1", "--k", "3"});
  REQUIRE(mp.code == 0);
  CHECK(mp.report()["result"]["value"].get<double>() == doctest::Approx(5.0));
  CHECK(call({"moments", "mp", "--y", "0.5", "--k", "2"}).report()["result"]["value"].get<double>() ==
        doctest::Approx(1.5));

  const auto prof = call({"moments", "profile", "--rho", "0.4", "--word", "1,1"});
  REQUIRE(prof.code == 0);
  CHECK(prof.report()["result"]["value"].get<double>() == doctest::Approx(0.4));
}

TEST_CASE("profile CSV input") {
  const auto path = temp_file("profile.csv");
  {
    std::ofstream f(path);
    f << "x,f\n0,1\n1,1\n";
  }
  const auto r = call({"moments", "profile", "--profile", path.string(), "--word", "1,*,1,1,*,*"});
  REQUIRE(r.code == 0);
  CHECK(r.report()["result"]["value"].get<double>() == doctest::Approx(5.0));
  fs::remove(path);
  CHECK(call({"moments", "profile", "--profile", path.string(), "--word", "1,1"}).code == 2);
}

TEST_CASE("usage errors") {
  CHECK(call({}).code == 2);
  CHECK(call({"moments"}).code == 2);
  CHECK(call({"moments", "elliptic", "--word", "1,*", "--rho", "abc"}).code == 2);
  CHECK(call({"moments", "elliptic", "--word", "1,*", "--rho", "1.5"}).code == 2);
  CHECK(call({"moments", "elliptic", "--rho", "0.5"}).code == 2);
  const auto bad = call({"moments", "elliptic", "--word", "1,x,*"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("position") != std::string::npos);
  CHECK(call({"brown", "product", "--k", "1"}).code == 2);
  CHECK(call({"moments", "elliptic", "--word", "1,*", "--format", "xml"}).code == 2);
  CHECK(call({"moments", "elliptic", "--word", "1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1"}).code == 2);
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("simulate commands") {
  const auto ell = call({"simulate", "elliptic", "--n", "200", "--rho", "0.5", "--word", "1,*", "--reps", "20"});
  CHECK(ell.code == 0);
  const auto j = ell.report()["result"];
  CHECK(j["theory"].get<double>() == 1.0);
  CHECK(j["reps"] == 20);
  CHECK(j["n"] == 200);
  CHECK(j["passed"] == true);
  CHECK(std::abs(j["z_score"].get<double>()) <= 3.0);

  const auto wish = call({"simulate", "wishart", "--p", "100", "--n", "200", "--rho", "0.5", "--k", "1", "--reps", "20"});
  CHECK(wish.code == 0);
  CHECK(wish.report()["result"]["theory"].get<double>() == doctest::Approx(1.0));

  const auto det = call({"simulate", "with-deterministic", "--n", "200", "--rho", "0.5", "--word", "1,*",
                         "--blocks", "D,I", "--reps", "20"});
  CHECK(det.code == 0);
  CHECK(det.report()["result"]["theory"].get<double>() == 0.0);
  CHECK(det.report()["result"]["blocks"] == "D,I");

  const auto csv = call({"simulate", "elliptic", "--n", "50", "--word", "1,*", "--reps", "4", "--format", "csv"});
  CHECK(csv.out.rfind("word,n,reps,value,stderr,theory,z_score,passed\n", 0) == 0);

  CHECK(call({"simulate", "elliptic", "--n", "50", "--word", "1,*", "--reps", "1"}).code == 2);
  CHECK(call({"simulate", "elliptic", "--n", "5000", "--word", "1,*"}).code == 2);
}

TEST_CASE("simulate product writes its spectrum") {
  const auto path = temp_file("spectrum.csv");
  const auto r = call({"simulate", "product", "--k", "2", "--n", "200", "--spectrum-out", path.string()});
  CHECK(r.code == 0);
  CHECK(r.report()["result"]["sup_distance"].get<double>() <= 0.08);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "re,im");
  int rows = 0;
  for (std::string line; std::getline(f, line);) ++rows;
  CHECK(rows == 200);

  const auto overlay = call({"brown", "product", "--k", "2", "--points", "11", "--overlay", path.string(),
                             "--format", "json"});
  REQUIRE(overlay.code == 0);
  const auto res = overlay.report()["result"];
  CHECK(res["grid"].size() == 11);
  CHECK(res["grid"][0].contains("empirical"));
  CHECK(res["sup_distance"].get<double>() == doctest::Approx(r.report()["result"]["sup_distance"].get<double>()));
  fs::remove(path);
}

TEST_CASE("brown rows") {
  const auto r = call({"brown", "product", "--k", "2", "--points", "2", "--t-max", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "t,F(t)\n0,0\n2,1\n");
  const auto q = call({"brown", "product", "--k", "2", "--points", "5", "--t-max", "1"});
  CHECK(q.out == "t,F(t)\n0,0\n0.25,0.25\n0.5,0.5\n0.75,0.75\n1,1\n");

  const auto rd = call({"brown", "rdiagonal", "--k", "1", "--scale", "2", "--points", "3", "--t-max", "2",
                        "--format", "json"});
  REQUIRE(rd.code == 0);
  const auto grid = rd.report()["result"]["grid"];
  CHECK(grid[1]["F"].get<double>() == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(grid[2]["F"].get<double>() == 1.0);
  CHECK(call({"brown", "rdiagonal", "--scale", "0"}).code == 2);
}

TEST_CASE("config round trip reproduces the report") {
  const std::vector<std::vector<std::string>> lines{
      {"simulate", "elliptic", "--n", "60", "--rho", "0.3", "--word", "1,1,*,*", "--reps", "6", "--seed", "9"},
      {"moments", "profile", "--word", "1,1,*,*", "--rho", "0.2", "--mc-samples", "500"},
      {"simulate", "wishart", "--p", "30", "--n", "60", "--labels", "1,2", "--rho", "0.1,0.9", "--reps", "4"},
      {"brown", "product", "--k", "3", "--points", "4", "--format", "json"},
  };
  for (const auto& args : lines) {
    const auto first = call(args);
    REQUIRE(first.code <= 1);
    const auto again = call(freelab::cli::args_from_config(first.report()["config"]));
    CHECK(again.out == first.out);
    CHECK(again.code == first.code);
  }
}

TEST_CASE("reports are deterministic") {
  const std::vector<std::string> args{"simulate", "elliptic", "--n", "80", "--word", "1,*,1,*", "--reps", "8"};
  CHECK(call(args).out == call(args).out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  auto single = args;
  single.insert(single.end(), {"--threads", "1"});
  CHECK(call(threaded).report()["result"] == call(single).report()["result"]);
  auto reseeded = args;
  reseeded.insert(reseeded.end(), {"--seed", "77"});
  CHECK(call(reseeded).report()["result"]["value"] != call(args).report()["result"]["value"]);
}

TEST_CASE("float output") {
  const json j{{"a", 0.1}, {"b", std::nan("")}, {"c", 3}, {"d", "x"}};
  const auto text = freelab::cli::to_json_text(j);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("null") != std::string::npos);
  CHECK(json::parse(text)["a"].get<double>() == 0.1);
}

TEST_CASE("report file output") {
  const auto path = temp_file("report.json");
  const auto r = call({"moments", "mp", "--k", "2", "--out", path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  CHECK(json::parse(f)["result"]["value"].get<double>() == doctest::Approx(2.0));
  fs::remove(path);
}

TEST_CASE("verify command") {
  const auto cheap = call({"verify", "--criteria", "1,2,3,10,11"});
  CHECK(cheap.code == 0);
  const auto summary = cheap.report()["result"];
  CHECK(summary["all_passed"] == true);
  CHECK(cheap.err.find("[PASS] C3") != std::string::npos);

  const auto clean = call({"verify", "--criteria", "8"});
  CHECK(clean.code == 0);
  const auto biased = call({"verify", "--criteria", "8", "--inject-bias", "0.1"});
  CHECK(biased.code == 1);
  CHECK(biased.err.find("[FAIL] C8") != std::string::npos);

  CHECK(call({"verify", "--criteria", "13"}).code == 2);
}
