#include <doctest.h>

#include <httplib.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <thread>

#include "dyscreen/dataset_io.hpp"
#include "dyscreen/features.hpp"
#include "dyscreen/model_io.hpp"
#include "dyscreen/service/screening_service.hpp"
#include "dyscreen/service/storage.hpp"
#include "dyscreen/session_io.hpp"
#include "support/session_gen.hpp"

using namespace dyscreen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(DYSCREEN_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dyscreen-cli-" + service::random_hex(8));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const QuestionManifest& manifest() {
  static const auto m = QuestionManifest::load(DYSCREEN_SOURCE_DIR "/data/manifest.json");
  return m;
}

}  // namespace

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(run("").code == 2);
  CHECK(run("evaluate").code == 2);
  CHECK(run("evaluate --data x.csv --k one").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("evaluate --data " + dir / "missing.csv").code == 3);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "id,label,gender\nx,dys,1\n";
  }
  CHECK(run("evaluate --data " + dir / "bad.csv").code == 3);
  CHECK(run("synth --n 3").code == 3);
  CHECK(run("--help").code == 0);
}

TEST_CASE("synth output is a readable dataset with the exact positive count") {
  TempDir dir;
  REQUIRE(run("synth --n 3644 --prevalence 0.108 --out " + dir / "a.csv").code == 0);
  const auto ds = read_dataset_csv(fs::path(dir / "a.csv"), AgeVariant::full());
  CHECK(ds.size() == 3644);
  CHECK(ds.count(Label::Dyslexia) == 394);
  const auto young = run("synth --n 50 --variant young7_8");
  REQUIRE(young.code == 0);
  CHECK(detect_variant(young.out.substr(0, young.out.find('\n'))) == AgeVariant::young7_8());
}

TEST_CASE("evaluate: fold sizes, determinism and curve output") {
  TempDir dir;
  REQUIRE(run("synth --n 3644 --out " + dir / "a.csv").code == 0);
  const auto a = run("evaluate --data " + dir / "a.csv" + " --k 10 --seed 7 --trees 3 --json");
  REQUIRE(a.code == 0);
  const auto report = json::parse(a.out);
  auto sizes = report["fold_sizes"].get<std::vector<std::size_t>>();
  CHECK(std::count(sizes.begin(), sizes.end(), 364) == 6);
  CHECK(std::count(sizes.begin(), sizes.end(), 365) == 4);
  const auto b = run("evaluate --data " + dir / "a.csv" + " --k 10 --seed 7 --trees 3 --json");
  CHECK(a.out == b.out);

  const auto table = run("evaluate --data " + dir / "a.csv" + " --k 3 --trees 3 --threshold 0.24 --curves " + dir / "c.csv");
  REQUIRE(table.code == 0);
  CHECK(table.out.find("threshold 0.24 (fixed)") != std::string::npos);
  const auto curves = service::read_lines(dir / "c.csv");
  CHECK(curves.front() == "curve,threshold,x,y");
  CHECK(curves.size() > 3);
}

TEST_CASE("synth piped into evaluate at zero separation is near chance") {
  const auto r = run("synth --n 2000 --prevalence 0.108 --separation 0 | " + std::string(DYSCREEN_CLI) +
                     " evaluate --data - --trees 40 --json");
  REQUIRE(r.code == 0);
  const double auc = json::parse(r.out)["roc_auc"].get<double>();
  CHECK(auc >= 0.43);
  CHECK(auc <= 0.57);
}

TEST_CASE("train, calibrate and sweep") {
  TempDir dir;
  REQUIRE(run("synth --n 300 --variant mid9_11 --out " + dir / "d.csv").code == 0);
  REQUIRE(run("train --data " + dir / "d.csv" + " --trees 10 --out " + dir / "m1.json").code == 0);
  REQUIRE(run("train --data " + dir / "d.csv" + " --trees 10 --out " + dir / "m2.json").code == 0);
  CHECK(service::read_file(dir / "m1.json") == service::read_file(dir / "m2.json"));
  const auto model = load_model(dir / "m1.json");
  CHECK(model.variant == AgeVariant::mid9_11());
  CHECK(model.trees.size() == 10);
  CHECK(model.threshold == 0.5);

  const auto cal = run("calibrate --data " + dir / "d.csv" + " --trees 10 --k 3 --json");
  REQUIRE(cal.code == 0);
  const double t = json::parse(cal.out)["threshold"].get<double>();
  REQUIRE(run("calibrate --data " + dir / "d.csv" + " --trees 10 --k 3 --model " + dir / "m1.json" + " --out " + dir / "m3.json").code == 0);
  CHECK(load_model(dir / "m3.json").threshold == t);
  REQUIRE(run("train --data " + dir / "d.csv" + " --trees 10 --calibrate --k 3 --out " + dir / "m4.json").code == 0);
  CHECK(load_model(dir / "m4.json").threshold == t);
  CHECK(run("train --data " + dir / "d.csv" + " --threshold 1").code == 3);

  const auto sw = run("sweep --data " + dir / "d.csv" + " --trees 5 --k 3 --depths 2,0 --mtrys 3,5 --json");
  REQUIRE(sw.code == 0);
  const auto cells = json::parse(sw.out);
  CHECK(cells.size() == 4);
  CHECK(cells[2]["max_depth"] == 0);
  CHECK(run("sweep --data " + dir / "d.csv" + " --trees 5 --k 3 --depths 2,0 --mtrys 3,5 --json").out == sw.out);

  const auto imp = run("importance --data " + dir / "d.csv" + " --json --top-eval 3 --trees 5 --k 3");
  REQUIRE(imp.code == 0);
  const auto j = json::parse(imp.out);
  CHECK(j["questions"].size() == 28);
  CHECK(j["questions"][0]["percent"] == 100.0);
  CHECK(j["types"].size() == 7);
  CHECK(j["top_eval"]["questions"].size() == 3);
}

TEST_CASE("extract and predict agree with the service finalize path") {
  TempDir dir;
  std::vector<std::string> paths;
  std::vector<SessionLog> logs;
  for (std::uint64_t s = 0; s < 5; ++s) {
    logs.push_back(testing_support::random_session(manifest(), AgeVariant::young7_8(), 900 + s));
    paths.push_back(dir / ("s" + std::to_string(s) + ".jsonl"));
    std::ofstream out(paths.back());
    write_session_log(out, logs.back());
  }
  std::string session_args;
  for (const auto& p : paths) session_args += " --session " + p;

  REQUIRE(run("synth --n 300 --variant young7_8 --out " + dir / "d.csv").code == 0);
  REQUIRE(run("train --data " + dir / "d.csv" + " --trees 12 --threshold 0.3 --out " + dir / "m.json").code == 0);
  REQUIRE(run("extract" + session_args + " --out " + dir / "x.csv").code == 0);
  const auto extracted = read_dataset_csv(fs::path(dir / "x.csv"), AgeVariant::young7_8(), LabelPolicy::Optional);
  REQUIRE(extracted.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(extracted.records[i].features == extract_features(logs[i], manifest()).values);

  const auto by_rows = run("predict --model " + dir / "m.json" + " --features " + dir / "x.csv" + " --json");
  const auto by_sessions = run("predict --model " + dir / "m.json" + session_args + " --json");
  REQUIRE(by_rows.code == 0);
  REQUIRE(by_sessions.code == 0);
  const auto rows = json::parse(by_rows.out);
  const auto sess = json::parse(by_sessions.out);

  service::ModelRegistry registry;
  registry.activate(service::read_file(dir / "m.json"));
  service::ScreeningService svc(manifest(), dir.path / "svc", registry);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto id = svc.create_session(logs[i].participant).session_id;
    svc.append_events(id, 0, logs[i].events);
    const auto r = svc.finalize(id);
    CHECK(rows[i]["score"].get<double>() == r.prediction.score);
    CHECK(sess[i]["score"].get<double>() == r.prediction.score);
    CHECK(rows[i]["flagged"].get<bool>() == r.prediction.flagged);
  }

  const auto csv = run("predict --model " + dir / "m.json" + " --features " + dir / "x.csv");
  CHECK(csv.out.rfind("id,score,flagged\n", 0) == 0);
  CHECK(run("predict --model " + dir / "m.json").code == 2);
}

TEST_CASE("serve answers over HTTP") {
  TempDir dir;
  REQUIRE(run("synth --n 200 --variant teen12_17 --out " + dir / "d.csv").code == 0);
  REQUIRE(run("train --data " + dir / "d.csv" + " --trees 5 --out " + dir / "m.json").code == 0);
  const int port = 20000 + static_cast<int>(getpid() % 20000);
  const std::string cmd = std::string(DYSCREEN_CLI) + " serve --listen 127.0.0.1:" + std::to_string(port) +
                          " --data-dir " + dir / "data" + " --model " + dir / "m.json" + " 2>/dev/null & echo $!";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  int pid = 0;
  REQUIRE(fscanf(pipe, "%d", &pid) == 1);
  pclose(pipe);

  httplib::Client cli("127.0.0.1", port);
  httplib::Result res;
  for (int i = 0; i < 100 && !(res = cli.Get("/v1/models/active")); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["teen12_17"]["n_trees"] == 5);
  kill(pid, SIGTERM);
  int status = 0;
  for (int i = 0; i < 100 && waitpid(pid, &status, WNOHANG) == 0; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(50));
}
