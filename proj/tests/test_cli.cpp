#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "saa/metrics.hpp"

using namespace saa;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
  fs::path dir = fs::temp_directory_path() / "saa_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string scratch(const std::string& name) { return (scratch_root() / name).string(); }

struct RunOutput {
  int exit_code = -1;
  std::string out, err;
};

// Invokes the real binary the way a user would.
RunOutput run_cli(const std::string& args) {
  static int counter = 0;
  std::string out_path = scratch("stdout" + std::to_string(counter));
  std::string err_path = scratch("stderr" + std::to_string(counter));
  ++counter;
  std::string cmd = std::string(SAA_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
  int status = std::system(cmd.c_str());
  RunOutput r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text_file(out_path);
  r.err = read_text_file(err_path);
  return r;
}

std::string base_config_text() {
  return "dataset = synthetic\n"
         "synth_classes = 3\n"
         "synth_side = 8\n"
         "synth_train = 48\n"
         "synth_test = 30\n"
         "labels_per_class = 4\n"
         "batch_labeled = 4\n"
         "unlabeled_ratio = 3\n"
         "epochs = 2\n"
         "iters_per_epoch = 3\n"
         "warmup_epochs = 1\n"
         "policy = otsu\n"
         "confidence = 0.37\n"
         "threads = 1\n";
}

std::string write_base_config(const std::string& name) {
  std::string path = scratch(name);
  write_text_file(path, base_config_text());
  return path;
}

// First value after `key ` on its own line of stdout.
std::string stdout_field(const std::string& out, const std::string& key) {
  std::size_t pos = out.find(key + " ");
  if (pos == std::string::npos) return "";
  pos += key.size() + 1;
  std::size_t end = out.find('\n', pos);
  return out.substr(pos, end - pos);
}

std::string manifest_value(const std::string& run_dir, const std::string& key) {
  std::string text = read_text_file(run_dir + "/manifest.txt");
  std::size_t pos = text.find("\n" + key + " = ");
  if (pos == std::string::npos) return "";
  pos += key.size() + 4;  // the "\n<key> = " prefix
  std::size_t end = text.find('\n', pos);
  return text.substr(pos, end - pos);
}

} // namespace

TEST_CASE("usage errors exit with status 2") {
  CHECK(run_cli("").exit_code == 2);                       // missing subcommand
  CHECK(run_cli("train").exit_code == 2);                  // missing --config
  CHECK(run_cli("launch --config x").exit_code == 2);      // unknown subcommand
  CHECK(run_cli("train --config x --frobnicate").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("train --help").exit_code == 0);
}

TEST_CASE("configuration errors exit with status 2 and say so") {
  RunOutput missing = run_cli("train --config " + scratch("no_such.cfg"));
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.find("config error:") != std::string::npos);

  std::string cfg = write_base_config("bad_overrides.cfg");
  CHECK(run_cli("train --config " + cfg + " --set no_such_key=1").exit_code == 2);
  CHECK(run_cli("train --config " + cfg + " --set epochs=red").exit_code == 2);
  CHECK(run_cli("train --config " + cfg + " --policy sideways").exit_code == 2);
  CHECK(run_cli("train --config " + cfg + " --set confidence=-1").exit_code == 2);
  CHECK(run_cli("train --config " + cfg + " --set dataset=tarot").exit_code == 2);
}

TEST_CASE("a small training run produces the full run directory") {
  std::string cfg = write_base_config("smoke.cfg");
  std::string run_dir = scratch("smoke-run");
  fs::remove_all(run_dir);

  RunOutput r = run_cli("train --config " + cfg + " --out-dir " + run_dir);
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);

  CHECK(fs::exists(run_dir + "/manifest.txt"));
  CHECK(fs::exists(run_dir + "/metrics.csv"));
  CHECK(fs::exists(run_dir + "/ckpt-final.bin"));
  for (const char* p : {"/plots/test_acc.csv", "/plots/test_acc.ppm",
                        "/plots/naive_fraction.csv", "/plots/naive_fraction.ppm"})
    CHECK(fs::exists(run_dir + std::string(p)));

  std::vector<MetricsRow> rows = read_metrics(run_dir + "/metrics.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].epoch == 1);
  CHECK(rows[1].iteration == 6);

  // stdout reports the three summary fields plus per-epoch progress.
  CHECK(stdout_field(r.out, "run_dir") == run_dir);
  CHECK(stdout_field(r.out, "final_acc") != "");
  CHECK(std::stod(stdout_field(r.out, "final_acc")) == rows[1].test_acc);
  double best = std::max(rows[0].test_acc, rows[1].test_acc);
  CHECK(std::stod(stdout_field(r.out, "best_acc")) == best);
  CHECK(r.out.find("epoch 0/2") != std::string::npos);

  // The manifest is itself a loadable config recording the resolved run.
  CHECK(manifest_value(run_dir, "epochs") == "2");
  CHECK(manifest_value(run_dir, "out_dir") == run_dir);
}

TEST_CASE("named flags outrank --set, which outranks the file") {
  std::string cfg = write_base_config("precedence.cfg");  // file says epochs = 2
  std::string run_dir = scratch("precedence-run");
  fs::remove_all(run_dir);

  RunOutput r = run_cli("train --config " + cfg + " --out-dir " + run_dir +
                        " --set epochs=1 --set seed=9 --epochs 3");
  REQUIRE(r.exit_code == 0);
  CHECK(manifest_value(run_dir, "epochs") == "3");  // flag beat --set
  CHECK(manifest_value(run_dir, "seed") == "9");    // --set beat the file
  CHECK(read_metrics(run_dir + "/metrics.csv").size() == 3);
}

TEST_CASE("the default output directory honors SAA_OUT_DIR") {
  std::string cfg = write_base_config("envdir.cfg");
  std::string env_root = scratch("env-root");
  fs::remove_all(env_root);
  setenv("SAA_OUT_DIR", env_root.c_str(), 1);
  RunOutput r = run_cli("train --config " + cfg);
  unsetenv("SAA_OUT_DIR");
  REQUIRE(r.exit_code == 0);
  CHECK(stdout_field(r.out, "run_dir") == env_root + "/default");
  CHECK(fs::exists(env_root + "/default/metrics.csv"));
}

TEST_CASE("eval reloads the final checkpoint and reproduces the last accuracy") {
  std::string cfg = write_base_config("eval.cfg");
  std::string run_dir = scratch("eval-run");
  fs::remove_all(run_dir);
  RunOutput train = run_cli("train --config " + cfg + " --out-dir " + run_dir);
  REQUIRE(train.exit_code == 0);

  RunOutput eval = run_cli("eval --config " + cfg + " --checkpoint " + run_dir +
                           "/ckpt-final.bin");
  CAPTURE(eval.err);
  REQUIRE(eval.exit_code == 0);
  double acc = std::stod(stdout_field(eval.out, "accuracy"));
  CHECK(acc == std::stod(stdout_field(train.out, "final_acc")));

  RunOutput missing = run_cli("eval --config " + cfg + " --checkpoint " + run_dir +
                              "/nope.bin");
  CHECK(missing.exit_code == 1);  // runtime failure, not a config problem
}

TEST_CASE("inspect-history dumps one row per unlabeled sample") {
  std::string cfg = write_base_config("inspect.cfg");
  std::string run_dir = scratch("inspect-run");
  fs::remove_all(run_dir);
  REQUIRE(run_cli("train --config " + cfg + " --out-dir " + run_dir).exit_code == 0);

  RunOutput r = run_cli("inspect-history --run-dir " + run_dir);
  REQUIRE(r.exit_code == 0);
  std::string path = stdout_field(r.out, "history");
  CHECK(path == run_dir + "/history.csv");
  std::string text = read_text_file(path);
  CHECK(text.rfind("sample_id,h,f,observed\n", 0) == 0);
  std::size_t lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines == 1 + 48);  // header + one row per unlabeled sample

  RunOutput nodir = run_cli("inspect-history --run-dir " + scratch("not-a-run"));
  CHECK(nodir.exit_code == 2);  // manifest missing -> configuration problem
}

TEST_CASE("export-plots rebuilds curves from the metrics file alone") {
  std::string cfg = write_base_config("plots.cfg");
  std::string run_dir = scratch("plots-run");
  fs::remove_all(run_dir);
  REQUIRE(run_cli("train --config " + cfg + " --out-dir " + run_dir).exit_code == 0);

  fs::remove_all(run_dir + "/plots");
  RunOutput r = run_cli("export-plots --run-dir " + run_dir);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(run_dir + "/plots/test_acc.ppm"));
  CHECK(fs::exists(run_dir + "/plots/naive_fraction.csv"));

  RunOutput empty = run_cli("export-plots --run-dir " + scratch("not-a-run"));
  CHECK(empty.exit_code == 1);  // missing metrics.csv is an I/O failure
}

TEST_CASE("resume picks up at the checkpoint and reproduces the tail") {
  std::string cfg = write_base_config("resume.cfg");
  std::string full_dir = scratch("resume-full");
  std::string tail_dir = scratch("resume-tail");
  fs::remove_all(full_dir);
  fs::remove_all(tail_dir);

  RunOutput full = run_cli("train --config " + cfg + " --out-dir " + full_dir +
                           " --epochs 4 --set checkpoint_every=2");
  REQUIRE(full.exit_code == 0);
  REQUIRE(fs::exists(full_dir + "/ckpt-epoch1.bin"));

  RunOutput tail = run_cli("train --config " + cfg + " --out-dir " + tail_dir +
                           " --epochs 4 --resume " + full_dir + "/ckpt-epoch1.bin");
  REQUIRE(tail.exit_code == 0);

  std::vector<MetricsRow> all = read_metrics(full_dir + "/metrics.csv");
  std::vector<MetricsRow> cont = read_metrics(tail_dir + "/metrics.csv");
  REQUIRE(all.size() == 4);
  REQUIRE(cont.size() == 2);  // epochs 2 and 3 only
  for (std::size_t i = 0; i < 2; ++i) {
    const MetricsRow& a = all[2 + i];
    const MetricsRow& b = cont[i];
    CHECK(a.epoch == b.epoch);
    CHECK(a.iteration == b.iteration);
    CHECK(a.test_acc == b.test_acc);
    CHECK(a.sup_loss == b.sup_loss);
    CHECK(a.unsup_loss == b.unsup_loss);
    CHECK(a.mask_rate == b.mask_rate);
    CHECK(a.naive_fraction == b.naive_fraction);
    CHECK(a.lr == b.lr);
  }
  CHECK(std::stod(stdout_field(tail.out, "final_acc")) ==
        std::stod(stdout_field(full.out, "final_acc")));
}

TEST_CASE("ablate trains per policy and tabulates the outcomes") {
  std::string cfg = write_base_config("ablate.cfg");
  std::string out_root = scratch("ablate-root");
  fs::remove_all(out_root);

  RunOutput r = run_cli("ablate --config " + cfg + " --out-dir " + out_root +
                        " --policies otsu,none,otsu+patchwise");
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  std::string table_path = stdout_field(r.out, "table");
  CHECK(table_path == out_root + "/ablate.csv");

  std::string table = read_text_file(table_path);
  CHECK(table.rfind("policy,final_acc,best_acc\n", 0) == 0);
  CHECK(table.find("\notsu,") != std::string::npos);
  CHECK(table.find("\nnone,") != std::string::npos);
  CHECK(table.find("\notsu+patchwise,") != std::string::npos);

  for (const char* sub : {"/otsu", "/none", "/otsu_patchwise"}) {
    CHECK(fs::exists(out_root + std::string(sub) + "/metrics.csv"));
    CHECK(fs::exists(out_root + std::string(sub) + "/manifest.txt"));
  }
  // The patchwise leg recorded its mode in the manifest.
  CHECK(manifest_value(out_root + "/otsu_patchwise", "patchwise") == "true");
  CHECK(manifest_value(out_root + "/otsu", "patchwise") == "false");

  RunOutput bad = run_cli("ablate --config " + cfg + " --out-dir " + out_root +
                          " --policies otsu,wobble");
  CHECK(bad.exit_code == 2);
}
