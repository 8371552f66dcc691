#include "doctest.h"

#include <sstream>

#include "cli.hpp"
#include "d2ke/experiment.hpp"
#include "d2ke/io.hpp"
#include "d2ke/matrix_io.hpp"
#include "helpers.hpp"

using namespace d2ke;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "d2ke");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("distance prints 12 significant digits") {
  test::TempDir dir;
  write_file(dir.file("a.str.txt"), "#alphabet abcegiknst\n0 kitten\n1 sitting\n");
  auto r = cli({"distance", "--measure", "edit", "--a", dir.file("a.str.txt"), "--b",
                dir.file("a.str.txt"), "--b-index", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "3\n");
  write_file(dir.file("s.ts.tsv"), "0 1 1 0\n1 1 1 0.3333333333333333\n");
  r = cli({"distance", "--measure", "dtw", "--a", dir.file("s.ts.tsv"), "--b", dir.file("s.ts.tsv"),
           "--b-index", "1"});
  CHECK(r.out == "0.333333333333\n");
  r = cli({"distance", "--measure", "dtw", "--a", dir.file("a.str.txt"), "--b", dir.file("a.str.txt")});
  CHECK(r.code == 2);
}

TEST_CASE("exit codes") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"distance", "--measure", "edit"}).code == 1);
  CHECK(cli({"run", "--config", "/nonexistent.cfg"}).code == 1);
  CHECK(cli({"gen-synthetic", "--task", "motif-string", "--out", "/tmp/x.str.txt"}).code == 1);
  test::TempDir dir;
  CHECK(cli({"--seed", "1", "gen-synthetic", "--task", "motif-string", "--out",
             dir.file("no/such/dir/x.str.txt")})
            .code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("sample, embed, train and evaluate") {
  test::TempDir dir;
  auto data = dir.file("d.str.txt"), omegas = dir.file("o.str.txt"), matrix = dir.file("e.txt"),
       model = dir.file("m.json"), preds = dir.file("p.txt");
  REQUIRE(cli({"--seed", "3", "gen-synthetic", "--task", "motif-string", "--n", "40", "--out", data})
              .code == 0);
  REQUIRE(cli({"--seed", "5", "sample", "--dist", "random-string", "--alphabet-size", "4", "--R",
               "12", "--out", omegas})
              .code == 0);
  REQUIRE(cli({"embed", "--model", omegas, "--gamma", "0.5", "--measure", "edit", "--data", data,
               "--out", matrix})
              .code == 0);
  auto f = read_matrix(matrix);
  CHECK(f.rows() == 40);
  CHECK(f.cols() == 12);

  // Same seed, same omegas.
  auto again = dir.file("o2.str.txt");
  cli({"--seed", "5", "sample", "--dist", "random-string", "--alphabet-size", "4", "--R", "12",
       "--out", again});
  CHECK(read_file(again) == read_file(omegas));

  REQUIRE(cli({"--seed", "2", "train", "--data", data, "--out", model, "--R", "64", "--gamma", "0.3",
               "--mu", "1e-6"})
              .code == 0);
  auto r = cli({"evaluate", "--model", model, "--data", data, "--predictions", preds});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("accuracy ", 0) == 0);
  CHECK(read_file(preds).size() == 80);  // 40 single-digit labels
}

TEST_CASE("run honours --seed and --threads") {
  test::TempDir dir;
  auto cfg = dir.file("c.cfg");
  write_file(cfg, "dataset = synthetic:two-cluster\nn = 40\nmethods = knn\nk_grid = 1, 3\n"
                  "folds = 3\nseed = 1\noutput = " + dir.file("r.tsv") + "\n");
  REQUIRE(cli({"--threads", "2", "--seed", "9", "run", "--config", cfg}).code == 0);
  auto table = parse_results(read_file(dir.file("r.tsv")), ResultFormat::kTsv);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].seed == 9);
  CHECK(table.environment.at("threads") == "2");
  write_file(cfg, "dataset = synthetic:two-cluster\nmethods = knn\nseed = 1\nbogus = 1\n");
  CHECK(cli({"run", "--config", cfg}).code == 1);
}

TEST_CASE("analyze-kernel and timing reports") {
  test::TempDir dir;
  auto data = dir.file("d.str.txt");
  cli({"--seed", "3", "gen-synthetic", "--task", "motif-string", "--n", "20", "--out", data});
  auto r = cli({"--seed", "1", "analyze-kernel", "--data", data, "--R-list", "4,8", "--trials", "3",
                "--pairs", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("min_eigenvalue\td2ke-rf") != std::string::npos);
  r = cli({"--seed", "1", "timing", "--n-list", "10,20,40", "--R-list", "4,8,16"});
  CHECK(r.code == 0);
  CHECK(r.out.find("slope\tn\t") != std::string::npos);
}
