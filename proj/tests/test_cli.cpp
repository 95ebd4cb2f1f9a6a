#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "cosgauss/checkpoint.hpp"
#include "cosgauss/dataset.hpp"

// Drives the installed binary end to end through std::system.

namespace {

namespace fs = std::filesystem;

const char* kCli = COSGAUSS_CLI_PATH;

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "cosgauss_cli_test";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  std::string cmd = std::string(kCli) + " " + args + " > " +
                    (work_dir() / "stdout.log").string() + " 2> " +
                    (work_dir() / "stderr.log").string();
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string stdout_log() { return slurp(work_dir() / "stdout.log"); }

const char* kTinyCfg =
    "seed = 7\n"
    "audio.frame_len = 160\n"
    "audio.hop = 80\n"
    "filters.F = 6\n"
    "filters.L = 33\n"
    "filters.f_min = 200\n"
    "filters.f_max = 6000\n"
    "relevance.hidden = 4\n"
    "backend.hidden = 4\n"
    "train.epochs = 2\n"
    "train.batch = 3\n"
    "synth.n_per_class = 4\n"
    "synth.duration_s = 0.06\n"
    "synth.folds = 2\n"
    "cpc.steps = 3\n"
    "cpc.batch = 2\n"
    "cpc.C = 5\n"
    "cpc.K = 2\n"
    "cpc.anchors = 3\n";

std::string cfg_path() {
  auto path = work_dir() / "tiny.cfg";
  std::ofstream f(path, std::ios::trunc);
  f << kTinyCfg;
  return path.string();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("unknown subcommands and flags exit 2, help exits 0") {
  CHECK(run("bogus") == 2);
  CHECK(run("train --train x --out y --bogus") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("synth --help") == 0);
}

TEST_CASE("config validation failures exit 1 naming the constraint") {
  auto cfg = cfg_path();
  CHECK(run("filters-dump --config " + cfg + " --out " +
            q(work_dir() / "f.csv") + " --set filters.mu_max=0.6") == 1);
  std::string err = slurp(work_dir() / "stderr.log");
  CHECK(err.find("mu_max") != std::string::npos);
}

TEST_CASE("synth is byte-deterministic and resolved config is logged") {
  auto cfg = cfg_path();
  auto a = work_dir() / "corpus_a";
  auto b = work_dir() / "corpus_b";
  REQUIRE(run("synth --config " + cfg + " --out " + q(a)) == 0);
  std::string log = stdout_log();
  CHECK(log.find("# resolved config") != std::string::npos);
  CHECK(log.find("filters.F = 6") != std::string::npos);
  CHECK(log.find("train.lr = 0.001") != std::string::npos);  // default included
  REQUIRE(run("synth --config " + cfg + " --out " + q(b)) == 0);
  for (const auto& entry : fs::directory_iterator(a)) {
    auto other = b / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
  }
  // fold manifests exist and are disjoint
  auto train0 = cosgauss::read_manifest((a / "fold0_train.csv").string());
  auto val0 = cosgauss::read_manifest((a / "fold0_val.csv").string());
  CHECK(train0.size() == 4);
  CHECK(val0.size() == 4);
  for (const auto& t : train0)
    for (const auto& v : val0) CHECK(t.path != v.path);
}

TEST_CASE("filters-dump emits strictly increasing mel centers") {
  auto cfg = cfg_path();
  auto out = work_dir() / "filters.csv";
  REQUIRE(run("filters-dump --config " + cfg + " --out " + q(out) +
              " --set filters.F=64 --set filters.L=257 --set "
              "audio.frame_len=640 --set audio.hop=160") == 0);
  std::ifstream f(out);
  std::string header;
  std::getline(f, header);
  CHECK(header == "filter,mu,mu_hz,bw3db,bw3db_hz");
  double prev = -1.0;
  int count = 0;
  std::string line;
  while (std::getline(f, line)) {
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 + 1);
    double mu = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(mu > prev);
    prev = mu;
    ++count;
  }
  CHECK(count == 64);
}

TEST_CASE("train, checkpoint transfer and freeze flow through the CLI") {
  auto cfg = cfg_path();
  auto corpus = work_dir() / "corpus_train";
  REQUIRE(run("synth --config " + cfg + " --out " + q(corpus)) == 0);
  auto manifest = q(corpus / "manifest.csv");

  auto run1 = work_dir() / "run1";
  REQUIRE(run("train --config " + cfg + " --train " + manifest + " --val " +
              manifest + " --out " + q(run1)) == 0);
  CHECK(fs::exists(run1 / "model.json"));
  CHECK(fs::exists(run1 / "history.csv"));

  // pretrain-supervised also emits the transferable filterbank checkpoint
  auto pre = work_dir() / "pre";
  REQUIRE(run("pretrain-supervised --config " + cfg + " --train " + manifest +
              " --val " + manifest + " --out " + q(pre)) == 0);
  REQUIRE(fs::exists(pre / "filterbank.json"));

  // freeze: final mu equals the checkpoint's mu bit for bit
  auto frozen = work_dir() / "frozen";
  REQUIRE(run("train --config " + cfg + " --train " + manifest + " --val " +
              manifest + " --out " + q(frozen) + " --init-from " +
              q(pre / "filterbank.json") + " --freeze-filters") == 0);
  auto src = cosgauss::load_checkpoint((pre / "filterbank.json").string());
  auto got = cosgauss::load_checkpoint((frozen / "model.json").string());
  CHECK(got.array("fb.mu").values == src.array("fb.mu").values);

  // filters-dump on the frozen model reports exactly the checkpoint's mu
  auto dumped = work_dir() / "frozen_filters.csv";
  REQUIRE(run("filters-dump --config " + cfg + " --ckpt " +
              q(frozen / "model.json") + " --out " + q(dumped)) == 0);
  std::ifstream df(dumped);
  std::string line;
  std::getline(df, line);  // header
  std::size_t idx = 0;
  while (std::getline(df, line)) {
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 + 1);
    double mu = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(mu == src.array("fb.mu").values[idx]);
    ++idx;
  }
  CHECK(idx == src.array("fb.mu").values.size());

  // fine-tune (default) moves at least one center
  auto tuned = work_dir() / "tuned";
  REQUIRE(run("train --config " + cfg + " --train " + manifest + " --val " +
              manifest + " --out " + q(tuned) + " --init-from " +
              q(pre / "filterbank.json") + " --fine-tune") == 0);
  auto moved = cosgauss::load_checkpoint((tuned / "model.json").string());
  CHECK(moved.array("fb.mu").values != src.array("fb.mu").values);

  // training runs are byte-reproducible
  auto run1b = work_dir() / "run1b";
  REQUIRE(run("train --config " + cfg + " --train " + manifest + " --val " +
              manifest + " --out " + q(run1b)) == 0);
  CHECK(slurp(run1 / "history.csv") == slurp(run1b / "history.csv"));
  CHECK(slurp(run1 / "model.json") == slurp(run1b / "model.json"));
}

TEST_CASE("extract writes matching I, M, J matrices") {
  auto cfg = cfg_path();
  auto corpus = work_dir() / "corpus_train";
  if (!fs::exists(corpus / "manifest.csv"))
    REQUIRE(run("synth --config " + cfg + " --out " + q(corpus)) == 0);
  auto out = work_dir() / "extract";
  REQUIRE(run("extract --config " + cfg + " --in " +
              q(corpus / "class1_000.wav") + " --out " + q(out)) == 0);
  std::string I = slurp(out / "I.csv");
  std::string M = slurp(out / "M.csv");
  std::string J = slurp(out / "J.csv");
  auto rows = [](const std::string& s) {
    return std::count(s.begin(), s.end(), '\n');
  };
  CHECK(rows(I) == 6);
  CHECK(rows(M) == 6);
  CHECK(rows(J) == 6);
  // every mask entry strictly inside (0,1)
  std::istringstream ms(M);
  std::string line;
  while (std::getline(ms, line)) {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      double v = std::stod(cell);
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("eval-folds writes the per-fold report with an avg row") {
  auto cfg = cfg_path();
  auto corpus = work_dir() / "corpus_folds";
  REQUIRE(run("synth --config " + cfg + " --out " + q(corpus)) == 0);
  auto folds = work_dir() / "folds.csv";
  {
    std::ofstream f(folds, std::ios::trunc);
    f << "1," << (corpus / "fold0_train.csv").string() << ","
      << (corpus / "fold0_val.csv").string() << "\n";
    f << "2," << (corpus / "fold1_train.csv").string() << ","
      << (corpus / "fold1_val.csv").string() << "\n";
  }
  auto out = work_dir() / "folds_out";
  REQUIRE(run("eval-folds --config " + cfg + " --folds " + q(folds) +
              " --out " + q(out)) == 0);
  std::string report = slurp(out / "report.csv");
  CHECK(report.find("fold,auc\n") == 0);
  CHECK(report.find("\navg,") != std::string::npos);
  CHECK(std::count(report.begin(), report.end(), '\n') == 4);

  // deterministic rerun
  auto out2 = work_dir() / "folds_out2";
  REQUIRE(run("eval-folds --config " + cfg + " --folds " + q(folds) +
              " --out " + q(out2)) == 0);
  CHECK(slurp(out2 / "report.csv") == report);
}

TEST_CASE("cpc pretraining via the CLI is byte-reproducible") {
  auto cfg = cfg_path();
  auto corpus = work_dir() / "corpus_cpc";
  REQUIRE(run("synth --config " + cfg + " --out " + q(corpus)) == 0);
  auto a = work_dir() / "cpc_a";
  auto b = work_dir() / "cpc_b";
  REQUIRE(run("pretrain-cpc --config " + cfg + " --manifest " +
              q(corpus / "manifest.csv") + " --out " + q(a)) == 0);
  REQUIRE(run("pretrain-cpc --config " + cfg + " --manifest " +
              q(corpus / "manifest.csv") + " --out " + q(b)) == 0);
  CHECK(slurp(a / "history.csv") == slurp(b / "history.csv"));
  CHECK(slurp(a / "model.json") == slurp(b / "model.json"));
  CHECK(slurp(a / "filterbank.json") == slurp(b / "filterbank.json"));
}
