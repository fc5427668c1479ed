#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "nlohmann/json.hpp"
#include "subprocess.hpp"

namespace fs = std::filesystem;
using testutil::read_file;
using testutil::run;
using testutil::RunResult;
using testutil::scratch_dir;
using testutil::write_file;

namespace {

std::string cli() {
  const std::string p = testutil::cli_path();
  REQUIRE_MESSAGE(!p.empty(), "IEQA_CLI must point at the CLI binary");
  return p;
}

// Generates a small dataset and returns its directory.
fs::path small_dataset(const std::string& hint, int train = 48, int val = 16) {
  const fs::path dir = scratch_dir(hint);
  const RunResult r = run(cli() + " gen-data --seed 5 --train " +
                          std::to_string(train) + " --val-in " + std::to_string(val) +
                          " --val-out " + std::to_string(val) + " --features 8 --out-dir " +
                          dir.string());
  REQUIRE(r.exit_code == 0);
  return dir;
}

// The effective-config echo: everything on stderr after the marker line.
std::string extract_config(const std::string& err) {
  const std::string marker = "# effective config";
  const auto pos = err.find(marker);
  REQUIRE(pos != std::string::npos);
  const auto nl = err.find('\n', pos);
  std::string block = err.substr(nl + 1);
  // Keep the [section] header and key=value lines (progress output may follow).
  std::ostringstream keep;
  std::istringstream in(block);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && (line.front() == '[' || line.find('=') != std::string::npos))
      keep << line << "\n";
  }
  return keep.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with code 2") {
  CHECK(run(cli()).exit_code == 2);                        // no subcommand
  CHECK(run(cli() + " frobnicate").exit_code == 2);        // unknown subcommand
  CHECK(run(cli() + " train --no-such-flag").exit_code == 2);
  CHECK(run(cli() + " gen-data --out-dir /no/such/dir").exit_code == 2);
  CHECK(run(cli() + " eval --data-dir /no/such/dir --ckpt visual=/none.json")
            .exit_code == 2);
  CHECK(run(cli() + " --help").exit_code == 0);
  CHECK(run(cli() + " train --help").exit_code == 0);
}

TEST_CASE("gen-data writes the three splits and echoes a reusable config") {
  const fs::path dir = scratch_dir("cli-gen");
  const RunResult r =
      run(cli() + " gen-data --seed 9 --train 20 --val-in 8 --val-out 8 --features 6 --out-dir " +
          dir.string());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::is_regular_file(dir / "train.jsonl"));
  CHECK(fs::is_regular_file(dir / "val_in.jsonl"));
  CHECK(fs::is_regular_file(dir / "val_out.jsonl"));
  CHECK(r.out.find("train.jsonl") != std::string::npos);

  // Re-running from the echoed config reproduces the dataset byte for byte.
  const fs::path dir2 = scratch_dir("cli-gen2");
  std::string cfg = extract_config(r.err);
  const std::string from = "\"" + dir.string() + "\"";
  const auto at = cfg.find(from);
  REQUIRE(at != std::string::npos);
  cfg.replace(at, from.size(), "\"" + dir2.string() + "\"");
  const fs::path cfg_path = dir2 / "gen.cfg";
  write_file(cfg_path, cfg);
  const RunResult r2 = run(cli() + " gen-data --config " + cfg_path.string());
  REQUIRE(r2.exit_code == 0);
  CHECK(read_file(dir / "train.jsonl") == read_file(dir2 / "train.jsonl"));
  CHECK(read_file(dir / "val_out.jsonl") == read_file(dir2 / "val_out.jsonl"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("train writes a checkpoint and reports heldout metrics") {
  const fs::path dir = small_dataset("cli-train");
  const fs::path ckpt = dir / "scorer.json";
  const fs::path report = dir / "report.json";
  const RunResult r = run(cli() + " train --data-dir " + dir.string() +
                          " --dimension editing --epochs 2 --batch 16 --lr 0.01" +
                          " --embed-dim 16 --hidden-dim 8 --out-ckpt " + ckpt.string() +
                          " --out-report " + report.string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  CHECK(r.out.find("checkpoint: ") != std::string::npos);
  CHECK(r.out.find("heldout mae=") != std::string::npos);

  const auto j = nlohmann::json::parse(read_file(ckpt));
  CHECK(j["format"] == "ieqa-scorer");
  CHECK(j["dimension"] == "editing");
  const auto rep = nlohmann::json::parse(read_file(report));
  CHECK(rep["config"]["loss"] == "tdrl");
  CHECK(rep["epochs"].size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("train rejects contradictory or missing definitions") {
  const fs::path dir = small_dataset("cli-train-bad");
  const RunResult r = run(cli() + " train --data-dir " + dir.string() +
                          " --definition-file /no/such/definition.txt --out-ckpt " +
                          (dir / "x.json").string());
  CHECK(r.exit_code == 2);
  fs::remove_all(dir);
}

TEST_CASE("eval emits a correlation report and honors ensembles") {
  const fs::path dir = small_dataset("cli-eval", 64, 24);
  for (const char* dim : {"visual", "editing", "preservation"}) {
    const RunResult t = run(cli() + " train --data-dir " + dir.string() +
                            " --dimension " + dim +
                            " --epochs 3 --batch 16 --lr 0.05 --embed-dim 16 --hidden-dim 8" +
                            " --out-ckpt " + (dir / (std::string(dim) + ".json")).string());
    REQUIRE_MESSAGE(t.exit_code == 0, t.err);
  }
  const std::string ckpts = " --ckpt visual=" + (dir / "visual.json").string() +
                            " --ckpt editing=" + (dir / "editing.json").string() +
                            " --ckpt preservation=" + (dir / "preservation.json").string();
  const RunResult r = run(cli() + " eval --data-dir " + dir.string() + ckpts);
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.contains("final"));
  CHECK(j.contains("s_in"));
  CHECK(j["dimensions"].size() == 3);
  CHECK(r.err.find("dimension") != std::string::npos);  // table on stderr

  // Same checkpoint twice as an ensemble: predictions average to themselves.
  const RunResult ens = run(cli() + " eval --data-dir " + dir.string() + ckpts +
                            " --ckpt2 visual=" + (dir / "visual.json").string());
  REQUIRE_MESSAGE(ens.exit_code == 0, ens.err);
  const auto je = nlohmann::json::parse(ens.out);
  CHECK(je["dimensions"] == j["dimensions"]);

  // Reserved flag is refused.
  const RunResult rf = run(cli() + " eval --data-dir " + dir.string() + ckpts +
                           " --logistic-fit");
  CHECK(rf.exit_code == 2);
  fs::remove_all(dir);
}

TEST_CASE("degenerate predictions exit with code 3") {
  const fs::path dir = small_dataset("cli-degen", 32, 8);
  // Constant labels on every dimension make the correlation cells undefined.
  std::ostringstream flat;
  for (int i = 0; i < 8; ++i)
    flat << R"({"id":"f)" << i
         << R"(","features":[0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8],"mos_visual":3.0,)"
         << R"("mos_edit":3.0,"mos_pres":3.0,"split":"in"})"
         << "\n";
  write_file(dir / "val_in.jsonl", flat.str());
  std::string flat_out = flat.str();
  // Same records, marked as the out split.
  std::string::size_type pos = 0;
  while ((pos = flat_out.find("\"in\"", pos)) != std::string::npos) {
    flat_out.replace(pos, 4, "\"out\"");
    pos += 5;
  }
  write_file(dir / "val_out.jsonl", flat_out);

  const RunResult t = run(cli() + " train --data-dir " + dir.string() +
                          " --dimension visual --epochs 2 --batch 16 --lr 0.01" +
                          " --embed-dim 16 --hidden-dim 8 --out-ckpt " +
                          (dir / "v.json").string());
  REQUIRE_MESSAGE(t.exit_code == 0, t.err);
  const RunResult r = run(cli() + " eval --data-dir " + dir.string() +
                          " --ckpt visual=" + (dir / "v.json").string());
  CHECK(r.exit_code == 3);
  const auto j = nlohmann::json::parse(r.out);  // partial report still emitted
  CHECK(j["final"].is_null());
  fs::remove_all(dir);
}

TEST_CASE("inspect-loss evaluates a handwritten distribution") {
  const std::string dists =
      R"([[0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1],)"
      R"([0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1],)"
      R"([0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1]])";
  const RunResult r =
      run(cli() + " inspect-loss --truth 4.20 --dists '" + dists + "'");
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["l_score"].get<double>() == doctest::Approx(2.855).epsilon(1e-12));
  CHECK(j["v_d"].get<double>() == doctest::Approx(0.111).epsilon(1e-12));
  REQUIRE(j["l_score_grad"].size() == 3);
  for (const auto& row : j["grad_row_sums"])
    CHECK(std::abs(row.get<double>()) < 1e-12);

  // Inline and file input are mutually exclusive; both missing is an error.
  CHECK(run(cli() + " inspect-loss --truth 4.20").exit_code == 2);
  const fs::path dir = scratch_dir("cli-inspect");
  write_file(dir / "d.json", dists);
  CHECK(run(cli() + " inspect-loss --truth 4.20 --dists '" + dists +
            "' --dists-file " + (dir / "d.json").string())
            .exit_code == 2);
  const RunResult file_r =
      run(cli() + " inspect-loss --truth 4.20 --dists-file " + (dir / "d.json").string());
  CHECK(file_r.exit_code == 0);
  // Malformed distributions are config errors.
  CHECK(run(cli() + " inspect-loss --truth 4.20 --dists '[[0.5],[1],[1]]'").exit_code == 2);
  CHECK(run(cli() + " inspect-loss --truth bad --dists '" + dists + "'").exit_code == 2);
  fs::remove_all(dir);
}

TEST_CASE("fdmpo mock runs end to end and writes its artifacts") {
  const fs::path dir = small_dataset("cli-fdmpo", 32, 16);
  const fs::path out = scratch_dir("cli-fdmpo-out");
  const RunResult r = run(cli() + " fdmpo --data-dir " + dir.string() +
                          " --optimizer mock --budget 2 --samples 8 --warmup-epochs 1" +
                          " --lr 0.01 --embed-dim 16 --hidden-dim 8 --out-dir " +
                          out.string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  CHECK(r.out.find("best iter=") != std::string::npos);
  CHECK(fs::is_regular_file(out / "history.jsonl"));
  CHECK(fs::is_regular_file(out / "trajectory.csv"));
  CHECK(fs::is_regular_file(out / "best_definition.txt"));
  int lines = 0;
  std::istringstream hist(read_file(out / "history.jsonl"));
  for (std::string line; std::getline(hist, line);)
    if (!line.empty()) ++lines;
  CHECK(lines == 3);  // budget 2 -> initial + two proposals
  const std::string traj = read_file(out / "trajectory.csv");
  CHECK(traj.rfind("iter,v_d\n", 0) == 0);
  fs::remove_all(dir);
  fs::remove_all(out);
}

TEST_CASE("fdmpo http requires the API key before any network use") {
  const fs::path dir = small_dataset("cli-fdmpo-key", 32, 16);
  const fs::path out = scratch_dir("cli-fdmpo-key-out");
  const RunResult r =
      run("env -u FDMPO_API_KEY " + cli() + " fdmpo --data-dir " + dir.string() +
          " --optimizer http --base-url http://127.0.0.1:9 --budget 1 --samples 8" +
          " --warmup-epochs 1 --out-dir " + out.string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("FDMPO_API_KEY") != std::string::npos);

  // With the key set but the endpoint unreachable, the run fails with the
  // endpoint exit code and never leaks the secret.
  const RunResult r2 =
      run("FDMPO_API_KEY=sekret-value-42 " + cli() + " fdmpo --data-dir " + dir.string() +
          " --optimizer http --base-url http://127.0.0.1:9 --budget 1 --samples 8" +
          " --warmup-epochs 1 --lr 0.01 --embed-dim 16 --hidden-dim 8" +
          " --timeout-ms 300 --max-retries 0 --out-dir " + out.string());
  CHECK(r2.exit_code == 4);
  CHECK(r2.out.find("sekret-value-42") == std::string::npos);
  CHECK(r2.err.find("sekret-value-42") == std::string::npos);
  fs::remove_all(dir);
  fs::remove_all(out);
}

TEST_CASE("every subcommand echoes its effective config to stderr") {
  const fs::path dir = small_dataset("cli-echo", 20, 8);
  const RunResult r = run(cli() + " train --data-dir " + dir.string() +
                          " --epochs 1 --batch 8 --embed-dim 16 --hidden-dim 8" +
                          " --out-ckpt " + (dir / "c.json").string());
  REQUIRE(r.exit_code == 0);
  const std::string cfg = extract_config(r.err);
  CHECK(cfg.find("epochs=1") != std::string::npos);
  CHECK(cfg.find("hidden-dim=8") != std::string::npos);
  fs::remove_all(dir);
}

}  // TEST_SUITE
