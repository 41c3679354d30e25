#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "../support/test_support.hpp"
#include "factgpt/io.hpp"
#include "factgpt/hashing.hpp"
#include "factgpt/synthgen.hpp"

using namespace factgpt;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

// Runs the CLI through the shell with stdout/stderr captured to files.
Result run(const testing::TempDir& dir, const std::string& args, const std::string& env = "") {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = "cd '" + dir.path().string() + "' && env -u FACTGPT_API_KEY -u FACTGPT_API_BASE " + env +
                          " '" + FACTGPT_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

void write_inputs(const testing::TempDir& dir) {
  write_file_atomic(dir / "claims.jsonl",
                    "{\"id\":\"c-bt\",\"text\":\"Vaccinated people emit Bluetooth signals.\"}\n"
                    "{\"id\":\"c-5g\",\"text\":\"5G towers spread the coronavirus.\"}\n");
  write_file_atomic(dir / "posts.jsonl",
                    "{\"id\":\"p1\",\"text\":\"my dad got vaccinated and I connected him to bluetooth\"}\n"
                    "{\"id\":\"p2\",\"text\":\"the new 5G tower near me made everyone cough\"}\n");
  write_file_atomic(dir / "votes.jsonl",
                    "{\"pair_id\":\"x\",\"votes\":[{\"annotator_id\":\"a\",\"label\":\"ENTAILMENT\"}]}\n");
}

}  // namespace

TEST_CASE("mock pipeline from the command line") {
  testing::TempDir dir("cli");
  write_inputs(dir);
  const std::string env = "SOURCE_DATE_EPOCH=1700000000";

  auto r = run(dir, "ingest-claims --in claims.jsonl --out claims.norm.jsonl", env);
  REQUIRE_MESSAGE(r.code == 0, r.err);

  r = run(dir, "pair --posts posts.jsonl --claims claims.norm.jsonl --out pairs.jsonl", env);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto pairs = decode_records_strict<PairCandidate>(read_file(dir / "pairs.jsonl"), "pairs");
  REQUIRE(pairs.size() == 2);
  for (const auto& p : pairs) CHECK(p.claim_id == (p.post_id == "p1" ? "c-bt" : "c-5g"));

  const auto manifest = Json::parse(read_file(dir / "pairs.jsonl.manifest.json"));
  CHECK(manifest["command"] == "pair");
  CHECK(manifest["config"]["top_k"] == 1);
  CHECK(manifest["config"]["alpha"] == 0.5);
  CHECK(manifest["inputs"].size() == 2);
  for (const auto& in : manifest["inputs"]) {
    CHECK(in["sha256"] == sha256_hex(read_file(dir / in["path"].get<std::string>())));
  }
  CHECK(manifest["inputs"][1]["name"] == "posts");
  CHECK(manifest["written_at"] == "2023-11-14T22:13:20Z");

  r = run(dir, "generate --claims claims.norm.jsonl --model gen --out synthetic.jsonl", env);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(lines(read_file(dir / "synthetic.jsonl")) == 6);
  const auto gen_manifest = Json::parse(read_file(dir / "synthetic.jsonl.manifest.json"));
  CHECK(gen_manifest["provider"] == "mock");
  CHECK(gen_manifest["config"]["gateway"].is_object());

  r = run(dir,
          "--seed 3 export-finetune --synthetic synthetic.jsonl --claims claims.norm.jsonl --split "
          "--out train.jsonl --validation-out validation.jsonl",
          env);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(lines(read_file(dir / "train.jsonl")) == 4);
  CHECK(lines(read_file(dir / "validation.jsonl")) == 2);
  CHECK_NOTHROW(validate_finetune_jsonl(read_file(dir / "train.jsonl")));

  r = run(dir, "finetune --file train.jsonl --base-model base --out job.json", env);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto job = Json::parse(read_file(dir / "job.json"));
  CHECK(job["status"] == "succeeded");
  const auto model = job["fine_tuned_model_id"].get<std::string>();

  r = run(dir,
          "classify --pairs pairs.jsonl --posts posts.jsonl --claims claims.norm.jsonl --model " + model +
              " --out preds.jsonl",
          env);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto preds = decode_records_strict<Prediction>(read_file(dir / "preds.jsonl"), "preds");
  REQUIRE(preds.size() == 2);
  CHECK(preds[0].model_id == model);

  // Gold for the two pairs, decided from single votes.
  std::string votes;
  for (const auto& p : preds) {
    votes += "{\"pair_id\":\"" + p.pair_id + "\",\"votes\":[{\"annotator_id\":\"a\",\"label\":\"NEUTRAL\"}]}\n";
  }
  write_file_atomic(dir / "votes.jsonl", votes);
  r = run(dir, "aggregate --votes votes.jsonl --out gold.jsonl --distribution dist.md", env);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(read_file(dir / "dist.md").find("| NEUTRAL | 2 | 100.0% |") != std::string::npos);

  r = run(dir,
          "evaluate --gold gold.jsonl --pred preds.jsonl --model-name ft --train-set-from gen --out eval.md "
          "--report-json eval.json",
          env);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(read_file(dir / "eval.md").find("| ft | gen |") != std::string::npos);

  r = run(dir, "report --in eval.json --in eval.json --out all.md", env);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(read_file(dir / "all.md").find("### Label-by-label performance") != std::string::npos);
}

TEST_CASE("validation failures exit 1 and provider failures exit 2") {
  testing::TempDir dir("cli-errors");
  write_inputs(dir);
  write_file_atomic(dir / "bad.jsonl", "{\"id\":\"a\",\"text\":\"ok\"}\nnot json\n");

  auto r = run(dir, "ingest-claims --in missing.jsonl --out x.jsonl");
  CHECK(r.code == 1);
  r = run(dir, "ingest-claims --in bad.jsonl --out x.jsonl");
  CHECK(r.code == 1);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "x.jsonl"));
  r = run(dir, "--json ingest-claims --in bad.jsonl --out x.jsonl");
  CHECK(r.code == 1);
  CHECK(Json::parse(r.err)["code"] == "ValidationError");
  r = run(dir, "no-such-command");
  CHECK(r.code == 1);
  r = run(dir, "pair --posts posts.jsonl --claims claims.jsonl --top-k nope --out p.jsonl");
  CHECK(r.code == 1);

  // A live provider nobody listens on.
  const std::string live = "--provider openai --api-base http://127.0.0.1:9 --max-retries 0 ";
  r = run(dir, live + "generate --claims claims.jsonl --model gen --out s.jsonl", "FACTGPT_API_KEY=k");
  CHECK(r.code == 2);
  r = run(dir, live + "generate --claims claims.jsonl --model gen --out s.jsonl");
  CHECK(r.code == 2);  // missing key is an auth failure
}

TEST_CASE("dry runs validate without writing") {
  testing::TempDir dir("cli-dry");
  write_inputs(dir);
  auto r = run(dir, "--dry-run pair --posts posts.jsonl --claims claims.jsonl --out pairs.jsonl");
  CHECK(r.code == 0);
  CHECK_FALSE(fs::exists(dir / "pairs.jsonl"));
  CHECK_FALSE(fs::exists(dir / "pairs.jsonl.manifest.json"));
}

TEST_CASE("settings precedence: flag over environment over config over default") {
  testing::TempDir dir("cli-settings");
  write_inputs(dir);
  write_file_atomic(dir / "config.json", R"({"matcher":{"top_k":2,"alpha":0.25}})");
  const auto resolved = [&](const std::string& flags, const std::string& env) {
    const auto r = run(dir, flags + " pair --posts posts.jsonl --claims claims.jsonl --out p.jsonl", env);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return Json::parse(read_file(dir / "p.jsonl.manifest.json"))["config"];
  };
  auto config = resolved("--config config.json", "");
  CHECK(config["top_k"] == 2);
  CHECK(config["alpha"] == 0.25);
  config = resolved("--config config.json", "FACTGPT_TOP_K=1");
  CHECK(config["top_k"] == 1);
  CHECK(config["alpha"] == 0.25);
  const auto r = run(dir, "--config config.json pair --posts posts.jsonl --claims claims.jsonl --top-k 2 --out p.jsonl",
                     "FACTGPT_TOP_K=1");
  REQUIRE(r.code == 0);
  CHECK(Json::parse(read_file(dir / "p.jsonl.manifest.json"))["config"]["top_k"] == 2);
  CHECK(lines(read_file(dir / "p.jsonl")) == 4);
}

TEST_CASE("version flag") {
  testing::TempDir dir("cli-version");
  const auto r = run(dir, "--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("0.1.0") != std::string::npos);
}
