#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "nightatlas/evalkit/report.hpp"
#include "test_util.hpp"

namespace {

const std::string kBinary = NIGHTATLAS_BIN;

int run(const std::string& args, const std::filesystem::path& cwd) {
  const std::string command =
      "cd \"" + cwd.string() + "\" && \"" + kBinary + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

TEST_CASE("cli: no arguments prints usage and exits 1") {
  testutil::TempDir dir;
  CHECK(run("", dir.path()) == 1);
  CHECK(run("--help", dir.path()) == 0);
  CHECK(run("no-such-command", dir.path()) == 1);
  CHECK(run("train-cnn --mode C", dir.path()) == 1);  // missing required --data
}

TEST_CASE("cli: data errors exit 2") {
  testutil::TempDir dir;
  CHECK(run("train-cnn --data missing_dir --run-dir r", dir.path()) == 2);
  CHECK(run("fetch --manifest nope.csv --url-template http://x/{id}.png", dir.path()) == 2);
}

TEST_CASE("cli: full synthetic workflow produces a coherent run directory") {
  testutil::TempDir dir;
  REQUIRE(run("synth --out s --classes 2 --per-class 2 --seed 5", dir.path()) == 0);
  REQUIRE(std::filesystem::exists(dir.path() / "s" / "sources.csv"));

  REQUIRE(run("augment --sources s/sources.csv --out ds --variants 6 --other-variants 3 "
              "--seed 9 --split-fraction 0.7",
              dir.path()) == 0);
  REQUIRE(std::filesystem::exists(dir.path() / "ds" / "manifest.jsonl"));
  REQUIRE(std::filesystem::exists(dir.path() / "ds" / "config.json"));

  REQUIRE(run("train-cnn --data ds --run-dir run1 --mode C --epochs 1 --batch 4 --lr 1e-3 "
              "--input-size 32 --map-divisor 16",
              dir.path()) == 0);
  CHECK(std::filesystem::exists(dir.path() / "run1" / "config.json"));
  CHECK(std::filesystem::exists(dir.path() / "run1" / "checkpoints" / "epoch_001.nann"));
  CHECK(std::filesystem::exists(dir.path() / "run1" / "curves" / "loss.csv"));

  REQUIRE(run("augment --sources s/sources.csv --out test_ds --originals", dir.path()) == 0);
  REQUIRE(run("eval-cnn --data test_ds --run-dir run1 --input-size 32", dir.path()) == 0);
  CHECK(std::filesystem::exists(dir.path() / "run1" / "reports" / "epoch_001" /
                                "confusion.csv"));
  CHECK(std::filesystem::exists(dir.path() / "run1" / "reports" / "epoch_001" /
                                "metrics.csv"));
  CHECK(std::filesystem::exists(dir.path() / "run1" / "reports" / "epoch_001" /
                                "top_predictions.json"));
  CHECK(std::filesystem::exists(dir.path() / "run1" / "reports" / "epoch_001" /
                                "probabilities.csv"));

  // report re-renders the same metrics from the raw dump
  const std::string before =
      read_file(dir.path() / "run1" / "reports" / "epoch_001" / "metrics.csv");
  REQUIRE(run("report --run-dir run1", dir.path()) == 0);
  const std::string after =
      read_file(dir.path() / "run1" / "reports" / "epoch_001" / "metrics.csv");
  CHECK(before == after);
}

TEST_CASE("cli: pca workflow with labelled-only dataset") {
  testutil::TempDir dir;
  REQUIRE(run("synth --out s --classes 2 --per-class 1 --seed 11", dir.path()) == 0);
  REQUIRE(run("augment --sources s/sources.csv --out ds --variants 5 --split-fraction 0.6",
              dir.path()) == 0);
  REQUIRE(run("train-pca --data ds --run-dir pca --k 2 --input-size 64 --dump-spectra 2",
              dir.path()) == 0);
  CHECK(std::filesystem::exists(dir.path() / "pca" / "model.ecpc"));
  CHECK(std::filesystem::exists(dir.path() / "pca" / "embeddings.ecem"));
  CHECK(std::filesystem::exists(dir.path() / "pca" / "classes.json"));
  CHECK(std::filesystem::exists(dir.path() / "pca" / "spectra"));

  REQUIRE(run("augment --sources s/sources.csv --out test_ds --originals", dir.path()) == 0);
  REQUIRE(run("eval-pca --model pca --data test_ds --thresholds 0:1:0.05 --run-dir pca_eval",
              dir.path()) == 0);
  const std::string sweep = read_file(dir.path() / "pca_eval" / "reports" / "sweep.csv");
  const auto rows = nightatlas::evalkit::parse_metrics_csv(sweep);
  CHECK(rows.size() == 21 * 2);  // 21 thresholds x 2 classes
}

TEST_CASE("cli: rerunning the same training command reproduces checkpoints bitwise") {
  testutil::TempDir dir;
  REQUIRE(run("synth --out s --classes 2 --per-class 2 --seed 21", dir.path()) == 0);
  REQUIRE(run("augment --sources s/sources.csv --out ds --variants 5 --other-variants 2 "
              "--seed 4 --split-fraction 0.6",
              dir.path()) == 0);
  const std::string train =
      "train-cnn --data ds --mode B --epochs 1 --batch 4 --lr 1e-3 --input-size 32 "
      "--map-divisor 16 --run-dir ";
  REQUIRE(run(train + "r1", dir.path()) == 0);
  REQUIRE(run(train + "r2", dir.path()) == 0);
  CHECK(read_file(dir.path() / "r1" / "checkpoints" / "epoch_001.nann") ==
        read_file(dir.path() / "r2" / "checkpoints" / "epoch_001.nann"));
  CHECK(read_file(dir.path() / "r1" / "curves" / "loss.csv") ==
        read_file(dir.path() / "r2" / "curves" / "loss.csv"));
}

TEST_CASE("cli: config file applies below flags") {
  testutil::TempDir dir;
  {
    std::ofstream cfg(dir.path() / "cfg.json");
    cfg << R"({"synth": {"classes": "3", "per-class": "2", "out": "from_config"}})";
  }
  REQUIRE(run("--config cfg.json synth --seed 3", dir.path()) == 0);
  CHECK(std::filesystem::exists(dir.path() / "from_config" / "sources.csv"));

  // a flag overrides the config value
  REQUIRE(run("--config cfg.json synth --seed 3 --out flagged", dir.path()) == 0);
  CHECK(std::filesystem::exists(dir.path() / "flagged" / "sources.csv"));
}
