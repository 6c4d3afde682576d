#include "doctest.h"

#include <lhn/cli.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace lhn;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

class Workdir {
 public:
  Workdir() {
    static int counter = 0;
    dir_ = fs::temp_directory_path() / ("lhn_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  std::string operator()(const std::string& name) const { return (dir_ / name).string(); }

  Run run(std::vector<std::string> args) const {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }

 private:
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_keys(const Workdir& w, const std::vector<std::string>& gen_args, const std::string& tag) {
  std::vector<std::string> args{"gen-params", "--out", w(tag + ".params"), "--seed", "7"};
  args.insert(args.end(), gen_args.begin(), gen_args.end());
  REQUIRE(w.run(args).code == cli::kOk);
  REQUIRE(w.run({"keygen", "--params", w(tag + ".params"), "--pub", w(tag + ".pub"), "--sec", w(tag + ".sec"), "--seed",
                 "8"})
              .code == cli::kOk);
}

std::string encrypt(const Workdir& w, const std::string& tag, int bit, int seed) {
  const auto ct = w(tag + ".ct" + std::to_string(seed));
  REQUIRE(w.run({"encrypt", "--pub", w(tag + ".pub"), "--bit", std::to_string(bit), "--out", ct, "--truth",
                 ct + ".truth", "--seed", std::to_string(seed)})
              .code == cli::kOk);
  return ct;
}

int decrypt(const Workdir& w, const std::string& tag, const std::string& ct) {
  auto r = w.run({"decrypt", "--pub", w(tag + ".pub"), "--sec", w(tag + ".sec"), "--ct", ct});
  REQUIRE(r.code == cli::kOk);
  return std::stoi(r.out);
}

}  // namespace

TEST_CASE("gen-params is deterministic under the seed") {
  Workdir w;
  for (std::vector<std::string> preset : {std::vector<std::string>{"--preset", "c2m", "--m", "6"},
                                          std::vector<std::string>{"--preset", "cyclic64"},
                                          std::vector<std::string>{"--preset", "s3"}}) {
    auto a = preset, b = preset;
    a.insert(a.begin(), {"gen-params", "--seed", "11", "--out", w("a.json")});
    b.insert(b.begin(), {"gen-params", "--seed", "11", "--out", w("b.json")});
    REQUIRE(w.run(a).code == 0);
    REQUIRE(w.run(b).code == 0);
    CHECK(slurp(w("a.json")) == slurp(w("b.json")));
  }
  auto c2m = io::params_from_json(io::read_file(w("a.json")));
  CHECK(c2m.scheme == io::SchemeKind::solvable);
  CHECK(w.run({"gen-params", "--preset", "c2m", "--m", "20", "--out", w("m20.json")}).code == 0);
  auto p = io::params_from_json(io::read_file(w("m20.json")));
  CHECK(p.G.units()->factorization.size() == 20);
  for (const auto& pp : p.G.units()->factorization) CHECK(pp.prime % 4 == 3);
}

TEST_CASE("encrypt, decrypt and add through files") {
  Workdir w;
  make_keys(w, {"--preset", "explicit", "--G", "8,4", "--H", "8,4,2", "--K", "2,2"}, "t");
  make_keys(w, {"--preset", "c2m", "--m", "4", "--bits", "16"}, "u");
  make_keys(w, {"--preset", "d4"}, "d");
  for (const std::string tag : {"t", "u", "d"}) {
    CAPTURE(tag);
    auto c0 = encrypt(w, tag, 0, 1);
    auto c1 = encrypt(w, tag, 1, 2);
    auto c1b = encrypt(w, tag, 1, 3);
    CHECK(decrypt(w, tag, c0) == 0);
    CHECK(decrypt(w, tag, c1) == 1);
    REQUIRE(w.run({"add", "--pub", w(tag + ".pub"), "--ct", c1, c1b, "--out", w(tag + ".sum")}).code == 0);
    CHECK(decrypt(w, tag, w(tag + ".sum")) == 0);
    {
      std::ofstream list(w(tag + ".list"));
      list << c0 << '\n' << c1 << '\n' << c1b << '\n' << c1 << '\n';
    }
    REQUIRE(w.run({"add", "--pub", w(tag + ".pub"), "--ct", "@" + w(tag + ".list"), c0, "--out", w(tag + ".fold")})
                .code == 0);
    CHECK(decrypt(w, tag, w(tag + ".fold")) == 1);
  }
}

TEST_CASE("attack command") {
  Workdir w;
  make_keys(w, {"--preset", "cyclic64"}, "c");
  for (int t = 0; t < 4; ++t) {
    auto ct = encrypt(w, "c", t & 1, 10 + t);
    auto r = w.run({"attack", "--pub", w("c.pub"), "--ct", ct, "--truth", ct + ".truth", "--json", "--out",
                    w("report.json")});
    CHECK(r.code == 0);
    auto j = io::json::parse(r.out);
    CHECK(j["bit"] == (t & 1));
    CHECK(j["success"] == true);
    CHECK(j == io::read_file(w("report.json"), "lhn.attack_report"));
  }

  make_keys(w, {"--preset", "c2m", "--m", "20", "--bits", "18"}, "m");
  auto ct = encrypt(w, "m", 1, 5);
  auto budget = w.run({"attack", "--pub", w("m.pub"), "--ct", ct, "--budget-ops", "1000", "--json"});
  CHECK(budget.code == cli::kBudget);
  auto bj = io::json::parse(budget.out);
  CHECK(bj["error"]["kind"] == "budget");
  CHECK(bj["bit"].is_null());
  CHECK(bj["stages"].size() >= 1);

  auto kernel = w.run({"attack", "--pub", w("m.pub"), "--ct", ct, "--strategy", "kernel"});
  CHECK(kernel.code == cli::kRefusal);
  CHECK(kernel.out.find("quantum") != std::string::npos);

  auto wrong = w.run({"attack", "--pub", w("m.pub"), "--ct", ct, "--strategy", "solvable"});
  CHECK(wrong.code == cli::kAssumption);

  make_keys(w, {"--preset", "q8"}, "q");
  auto qct = encrypt(w, "q", 1, 6);
  auto sol = w.run({"attack", "--pub", w("q.pub"), "--ct", qct, "--truth", qct + ".truth", "--json"});
  CHECK(sol.code == 0);
  CHECK(io::json::parse(sol.out)["strategy"] == "solvable");
  CHECK(io::json::parse(sol.out)["success"] == true);
}

TEST_CASE("exit codes for bad input") {
  Workdir w;
  make_keys(w, {"--preset", "explicit", "--G", "4", "--H", "4,2", "--K", "2"}, "a");
  make_keys(w, {"--preset", "s3"}, "s");
  auto ct = encrypt(w, "a", 1, 1);
  auto sct = encrypt(w, "s", 1, 1);

  CHECK(w.run({"frobnicate"}).code == cli::kUsage);
  CHECK(w.run({"decrypt", "--pub", w("a.pub")}).code == cli::kUsage);

  std::ofstream(w("junk.json")) << "{ not json";
  CHECK(w.run({"decrypt", "--pub", w("a.pub"), "--sec", w("a.sec"), "--ct", w("junk.json")}).code == cli::kSchema);
  CHECK(w.run({"decrypt", "--pub", w("a.pub"), "--sec", w("a.sec"), "--ct", w("a.pub")}).code == cli::kSchema);
  CHECK(w.run({"decrypt", "--pub", w("a.pub"), "--sec", w("a.sec"), "--ct", w("missing.json")}).code == cli::kSchema);
  CHECK(w.run({"decrypt", "--pub", w("a.pub"), "--sec", w("s.sec"), "--ct", ct}).code == cli::kMismatch);
  CHECK(w.run({"decrypt", "--pub", w("a.pub"), "--sec", w("a.sec"), "--ct", sct}).code == cli::kMismatch);
  CHECK(w.run({"gen-params", "--preset", "nope", "--out", w("x.json")}).code == cli::kSchema);
  CHECK(w.run({"attack", "--pub", w("a.pub"), "--ct", ct, "--strategy", "guess"}).code == cli::kSchema);
  CHECK(w.run({"bench-edlp", "--m-range", "9:3"}).code == cli::kSchema);

  // H = Z/2 and K = Z/2 with G = Z/3: phi is trivial, so tau never enters the span.
  REQUIRE(w.run({"gen-params", "--preset", "explicit", "--G", "3", "--H", "2", "--K", "2", "--out", w("bad.params")})
              .code == 0);
  CHECK(w.run({"keygen", "--params", w("bad.params"), "--pub", w("bad.pub"), "--sec", w("bad.sec")}).code ==
        cli::kKeygen);
}

TEST_CASE("validate command") {
  Workdir w;
  make_keys(w, {"--preset", "explicit", "--G", "2", "--H", "2", "--K", "2"}, "tiny");
  auto r = w.run({"validate", "--pub", w("tiny.pub"), "--sec", w("tiny.sec"), "--lambda", "128", "--json"});
  CHECK(r.code == cli::kValidateFail);
  auto j = io::json::parse(r.out);
  CHECK(j["S1"]["pass"] == false);
  CHECK(j["S4"]["pass"] == true);
  CHECK(j["tau_outside_commutator"] == true);

  make_keys(w, {"--preset", "explicit", "--G", "4,4,4,4", "--H", "4,4,4,4,2", "--K", "2"}, "mid");
  r = w.run({"validate", "--pub", w("mid.pub"), "--sec", w("mid.sec"), "--lambda", "4", "--json"});
  CHECK(r.code == cli::kValidateWarn);
  CHECK(io::json::parse(r.out)["verdict"] == "warn");

  make_keys(w, {"--preset", "s3"}, "s");
  r = w.run({"validate", "--pub", w("s.pub"), "--sec", w("s.sec"), "--lambda", "2", "--json"});
  CHECK(r.code == cli::kValidateWarn);
  CHECK(io::json::parse(r.out)["S4"]["pass"] == true);
}

TEST_CASE("bench-edlp") {
  Workdir w;
  auto a = w.run({"bench-edlp", "--m-range", "4:10", "--trials", "3", "--seed", "9", "--json"});
  auto b = w.run({"bench-edlp", "--m-range", "4:10", "--trials", "3", "--seed", "9", "--json"});
  REQUIRE(a.code == 0);
  auto ja = io::json::parse(a.out), jb = io::json::parse(b.out);
  REQUIRE(ja["rows"].size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(ja["rows"][i]["mean_ops"] == jb["rows"][i]["mean_ops"]);
  CHECK(ja["ratios"].size() == 3);
  auto big = cli::bench_edlp(46, 50, 2, 0, 1);
  CHECK(big.rows.size() == 2);
  CHECK(big.warnings.size() == 1);
}
