#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "wavegraph/cli.hpp"
#include "wavegraph/error.hpp"
#include "wavegraph/io.hpp"

using namespace wavegraph;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("wavegraph_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

}  // namespace

TEST_CASE("size ranges") {
  CHECK(parse_size_range("3..10") == std::pair<std::size_t, std::size_t>{3, 10});
  CHECK(parse_size_range("4") == std::pair<std::size_t, std::size_t>{4, 4});
  CHECK_THROWS_AS(parse_size_range("5..3"), InvalidInput);
  CHECK_THROWS_AS(parse_size_range("1..3"), InvalidInput);
  CHECK_THROWS_AS(parse_size_range("a..b"), InvalidInput);
}

TEST_CASE("gen, train and eval are reproducible") {
  TempDir dir;
  for (const char* name : {"a", "b"}) {
    const std::string n = name;
    REQUIRE(run({"gen", "paths", "--size-range", "3..4", "--count", "8", "--seed", "5", "--out", dir / (n + ".jsonl")}) == 0);
    REQUIRE(run({"train", "--data", dir / (n + ".jsonl"), "--out", dir / (n + ".ckpt"), "--iters", "30", "--batch", "4",
                 "--state-size", "4", "--seed", "2"}) == 0);
    REQUIRE(run({"eval", "--model-file", dir / (n + ".ckpt"), "--data", dir / (n + ".jsonl"), "--out", dir / (n + ".csv")}) == 0);
  }
  for (const char* ext : {".jsonl", ".ckpt", ".ckpt.metrics.csv", ".csv"}) {
    CHECK(read_text_file(dir / (std::string("a") + ext)) == read_text_file(dir / (std::string("b") + ext)));
  }
  CHECK(read_dataset(std::filesystem::path(dir / "a.jsonl")).size() == 16);
}

TEST_CASE("seed falls back to the environment") {
  TempDir dir;
  setenv("WAVEGRAPH_SEED", "77", 1);
  REQUIRE(run({"gen", "paths", "--size-range", "3", "--count", "2", "--out", dir / "env.jsonl"}) == 0);
  unsetenv("WAVEGRAPH_SEED");
  REQUIRE(run({"gen", "paths", "--size-range", "3", "--count", "2", "--seed", "77", "--out", dir / "flag.jsonl"}) == 0);
  CHECK(read_text_file(dir / "env.jsonl") == read_text_file(dir / "flag.jsonl"));
}

TEST_CASE("circuit generation defaults follow the size table") {
  TempDir dir;
  REQUIRE(run({"gen", "circuits", "--size-range", "2..3", "--batches", "2", "--seed", "1", "--out", dir / "c.jsonl"}) == 0);
  const auto train = read_dataset(std::filesystem::path(dir / "c.jsonl"));
  CHECK(train.size() == 2 * 100 + 2 * 90);
  REQUIRE(run({"gen", "circuits", "--test", "--size-range", "11..12", "--seed", "1", "--out", dir / "t.jsonl"}) == 0);
  CHECK(read_dataset(std::filesystem::path(dir / "t.jsonl")).size() == 200);
}

TEST_CASE("oracle and gradcheck commands") {
  TempDir dir;
  write_text_file(dir / "divider.json", R"({"nodes": 2, "ground": 0, "components": [
    {"a": 0, "b": 1, "kind": "battery", "voltage": 10, "positive": 1},
    {"a": 1, "b": 0, "kind": "resistor", "resistance": 100}]})");
  std::string text;
  CHECK(run({"oracle", "--netlist", dir / "divider.json", "--out", dir / "v.csv"}, &text) == 0);
  CHECK(text.find("node 1: 5 V") != std::string::npos);
  CHECK(read_text_file(dir / "v.csv") == "node,voltage\n0,0\n1,5\n");
  write_text_file(dir / "broken.json", "{\n\"nodes\": 2,\n]");
  CHECK(run({"oracle", "--netlist", dir / "broken.json"}, &text) == kExitData);
  CHECK(text.find("line 3") != std::string::npos);

  CHECK(run({"gradcheck", "--model", "wave", "--state-size", "4", "--seed", "3"}, &text) == 0);
  CHECK(run({"gradcheck", "--model", "gconv", "--seed", "3"}) == 0);
  write_text_file(dir / "bad.ckpt", "{\"format\": \"wavegraph-checkpoint\", \"version\": 1}");
  CHECK(run({"gradcheck", "--checkpoint", dir / "bad.ckpt"}) == kExitData);
  CHECK(run({"gradcheck", "--tolerance", "0", "--seed", "3"}) == kExitNumeric);
}

TEST_CASE("usage and data errors map to exit codes") {
  TempDir dir;
  CHECK(run({}) == kExitUsage);
  CHECK(run({"gen", "paths", "--size-range", "5..3", "--out", dir / "x"}) == kExitUsage);
  CHECK(run({"gen", "ladders", "--size-range", "3", "--out", dir / "x"}) == kExitUsage);
  CHECK(run({"train", "--data", dir / "missing.jsonl", "--out", dir / "m"}) == kExitData);
  REQUIRE(run({"gen", "paths", "--size-range", "3", "--count", "2", "--out", dir / "p.jsonl"}) == 0);
  CHECK(run({"train", "--data", dir / "p.jsonl", "--task", "circuits", "--out", dir / "m"}) == kExitUsage);
  REQUIRE(run({"train", "--data", dir / "p.jsonl", "--out", dir / "m", "--iters", "2", "--batch", "2"}) == 0);
  REQUIRE(run({"gen", "circuits", "--size-range", "2", "--count", "2", "--out", dir / "c.jsonl"}) == 0);
  CHECK(run({"eval", "--model-file", dir / "m", "--data", dir / "c.jsonl", "--out", dir / "r.csv"}) == kExitData);
  write_text_file(dir / "empty.jsonl", "");
  std::string text;
  CHECK(run({"eval", "--model-file", dir / "m", "--data", dir / "empty.jsonl", "--out", dir / "r.csv"}, &text) == 0);
  CHECK(read_text_file(dir / "r.csv") == "task,generator,size,n,metric,value,params,seed\n");
  CHECK(text.find("parameters:") != std::string::npos);
}
