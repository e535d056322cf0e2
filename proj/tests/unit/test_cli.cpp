#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "commutree/tree_io.hpp"

namespace fs = std::filesystem;
using namespace commutree;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("commutree-cli-" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "commutree");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string last_line(const std::string& text) {
  auto end = text.find_last_not_of('\n');
  auto start = text.rfind('\n', end);
  return text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace

TEST_CASE("toy1d command pipeline") {
  Scratch tmp;
  REQUIRE(run({"generate", "--toy", "toy1d", "-o", tmp("toy.inst")}).code == cli::kExitOk);
  const auto part = run({"partition", "-i", tmp("toy.inst"), "-o", tmp("toy.tree"), "--events", tmp("ev.csv")});
  REQUIRE(part.code == cli::kExitOk);
  CHECK(load_tree(tmp("toy.tree")).leaves().size() == 2);
  const std::string ev = slurp(tmp("ev.csv"));
  CHECK(ev.rfind("iter,t_wall,action,cell_volume,closed_fraction", 0) == 0);
  CHECK(last_line(ev).substr(last_line(ev).rfind(',') + 1) == "1");

  const auto q = run({"query", "-t", tmp("toy.tree"), "--theta", "0.5"});
  REQUIRE(q.code == cli::kExitOk);
  CHECK(q.out.find("delta=0") != std::string::npos);

  CHECK(run({"verify", "-i", tmp("toy.inst"), "-t", tmp("toy.tree")}).code == cli::kExitOk);
  CHECK(run({"verify", "-i", tmp("toy.inst"), "-t", tmp("toy.tree"), "--samples-per-leaf", "0"}).code ==
        cli::kExitOk);

  const auto st = run({"stats", "-t", tmp("toy.tree")});
  REQUIRE(st.code == cli::kExitOk);
  CHECK(st.out.find("leaves") != std::string::npos);

  const std::string manifest = slurp(tmp("manifest.jsonl"));
  CHECK(manifest.find("\"command\":\"partition\"") != std::string::npos);
}

TEST_CASE("exit codes") {
  Scratch tmp;
  CHECK(run({"partition", "-i", tmp("missing.inst"), "-o", tmp("x.tree")}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);

  REQUIRE(run({"generate", "--toy", "toy1d", "--theta-box", "-1,1.5", "-o", tmp("wide.inst")}).code == 0);
  const auto wide = run({"partition", "-i", tmp("wide.inst"), "-o", tmp("wide.tree")});
  CHECK(wide.code == cli::kExitThetaExceedsFeasibleSet);
  CHECK(wide.out.find("witness") != std::string::npos);

  REQUIRE(run({"generate", "--toy", "toy1d-offset", "-o", tmp("off.inst")}).code == 0);
  REQUIRE(run({"partition", "-i", tmp("off.inst"), "-o", tmp("off.tree")}).code == 0);
  CHECK(run({"refine", "-i", tmp("off.inst"), "-t", tmp("off.tree"), "-o", tmp("r.tree"), "--rho-max", "0.5"})
            .code == cli::kExitUsage);
  const auto refine = run({"refine", "-i", tmp("off.inst"), "-t", tmp("off.tree"), "-o", tmp("r.tree"),
                           "--eps-abs", "0.05", "--cert", tmp("cert.csv"), "--events", tmp("rev.csv")});
  REQUIRE(refine.code == cli::kExitOk);
  CHECK(slurp(tmp("rev.csv")).find("split_reassign") != std::string::npos);
  CHECK(slurp(tmp("cert.csv")).find("summary,warned_volume_fraction") != std::string::npos);
  CHECK(run({"verify", "-i", tmp("off.inst"), "-t", tmp("r.tree")}).code == cli::kExitOk);

  auto tree = load_tree(tmp("off.tree"));
  const NodeId victim = tree.leaves().front();
  Commutation d = *tree.node(victim).delta;
  d.set(0, !d[0]);
  tree.node(victim).delta = d;
  save_tree(tmp("flipped.tree"), tree);
  const auto bad = run({"verify", "-i", tmp("off.inst"), "-t", tmp("flipped.tree")});
  CHECK(bad.code == cli::kExitVerificationFailed);
  CHECK(bad.out.find("leaf=" + std::to_string(victim)) != std::string::npos);
}

TEST_CASE("generation is deterministic") {
  Scratch tmp;
  REQUIRE(run({"--seed", "7", "generate", "--nr", "1", "-o", tmp("a.inst")}).code == 0);
  REQUIRE(run({"--seed", "7", "generate", "--nr", "1", "-o", tmp("b.inst")}).code == 0);
  CHECK(slurp(tmp("a.inst")) == slurp(tmp("b.inst")));
  CHECK(!slurp(tmp("a.inst")).empty());
}
