#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using pairmrf::cli::run;

namespace {

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured call(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pairmrf-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(call({}).code == pairmrf::cli::kUsageError);
  CHECK(call({"no-such-command"}).code == pairmrf::cli::kUsageError);
  CHECK(call({"--version"}).code == pairmrf::cli::kOk);
  CHECK(call({"sample", "--dims", "5,5"}).code == pairmrf::cli::kUsageError);
  const auto missing = call({"fit-pl", "--z", "/nonexistent/field.txt", "--mrfi", "norm:L1:1"});
  CHECK(missing.code == pairmrf::cli::kRuntimeError);
  CHECK_FALSE(missing.err.empty());
}

TEST_CASE("structure printing") {
  CHECK(call({"mrfi", "norm:Linf:6", "--count"}).out == "84\n");
  CHECK(call({"mrfi", "norm:L1:1", "--pos", "4,4", "--count"}).out == "3\n");
}

TEST_CASE("manifest round trip") {
  const fs::path dir = scratch("manifest");
  pairmrf::cli::Manifest m;
  m.subcommand = "sample";
  m.args = {"sample", "--out", "a b.txt", "--seed", "7"};
  m.seed = 7;
  m.outputs = {"a b.txt"};
  m.duration_seconds = 0.25;
  pairmrf::cli::write_manifest(m, dir / "m.txt");
  const auto back = pairmrf::cli::read_manifest(dir / "m.txt");
  CHECK(back.subcommand == m.subcommand);
  CHECK(back.args == m.args);
  CHECK(back.seed == 7);
  CHECK(back.outputs == m.outputs);
  CHECK(back.version == pairmrf::cli::kVersion);
}

TEST_CASE("sample, fit and replay") {
  const fs::path dir = scratch("pipeline");
  const std::string field = (dir / "z.txt").string();
  const auto sampled = call({"sample", "--dims", "30,30", "--mrfi", "norm:L1:1", "--theta", "oneeach:-0.8,-0.8",
                             "--cycles", "20", "--out", field});
  REQUIRE_MESSAGE(sampled.code == 0, sampled.err);
  CHECK(fs::exists(dir / "z.png"));
  const fs::path manifest = dir / "z.txt.manifest";
  REQUIRE(fs::exists(manifest));
  const auto m = pairmrf::cli::read_manifest(manifest);
  CHECK(std::find(m.args.begin(), m.args.end(), "--seed") != m.args.end());

  const std::string first = slurp(field);
  fs::remove(field);
  REQUIRE(call({"replay", manifest.string()}).code == 0);
  CHECK(slurp(field) == first);

  const auto fit = call({"fit-pl", "--z", field, "--mrfi", "norm:L1:1", "--family", "oneeach", "--out",
                         (dir / "fit.spec").string()});
  REQUIRE_MESSAGE(fit.code == 0, fit.err);
  CHECK(fit.out.find("Pseudolikelihood") != std::string::npos);
  CHECK(fs::exists(dir / "fit.spec"));

  const auto hist = call({"cohist", "--z", field, "--mrfi", "norm:L1:1"});
  REQUIRE(hist.code == 0);
  CHECK(hist.out.rfind("a,b,r1,r2,count", 0) == 0);
}
