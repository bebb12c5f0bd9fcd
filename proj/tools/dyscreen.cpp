// dyscreen: train, evaluate and serve the dyslexia screening model.

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "dyscreen/dataset_io.hpp"
#include "dyscreen/error.hpp"
#include "dyscreen/evaluation.hpp"
#include "dyscreen/features.hpp"
#include "dyscreen/importance.hpp"
#include "dyscreen/model_io.hpp"
#include "dyscreen/session_io.hpp"
#include "dyscreen/service/errors.hpp"
#include "dyscreen/service/http_server.hpp"
#include "dyscreen/synth.hpp"

using namespace dyscreen;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct Common {
  std::string data;
  std::string variant;
  std::string out;
  bool json = false;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
};

struct ForestFlags {
  int trees = 200;
  int depth = 0;
  int mtry = 0;

  TrainConfig config(const Common& c) const {
    TrainConfig cfg;
    cfg.n_trees = trees;
    cfg.max_depth = depth;
    cfg.mtry = mtry;
    cfg.seed = c.seed;
    cfg.threads = c.threads;
    return cfg;
  }
};

struct CvFlags {
  std::size_t k = 10;
  double grid = kDefaultGridStep;
  std::optional<double> threshold;

  CvOptions options(const Common& c) const {
    CvOptions o;
    o.k = k;
    o.seed = c.seed;
    o.grid_step = grid;
    o.fixed_threshold = threshold;
    return o;
  }
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Dataset load_dataset(const Common& c, LabelPolicy policy = LabelPolicy::Required) {
  if (c.data.empty()) throw CLI::RequiredError("--data");
  const auto text = read_input(c.data);
  AgeVariant variant = AgeVariant::full();
  if (!c.variant.empty()) {
    variant = AgeVariant::parse(c.variant);
  } else {
    auto header = text.substr(0, text.find('\n'));
    if (!header.empty() && header.back() == '\r') header.pop_back();
    variant = detect_variant(header);
  }
  std::istringstream in(text);
  return read_dataset_csv(in, variant, policy);
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(c.out, std::ios::binary);
  if (!out) throw DataError("cannot write '" + c.out + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void add_common(CLI::App* cmd, Common& c, bool data = true) {
  if (data) cmd->add_option("--data", c.data, "dataset CSV, '-' for stdin")->required();
  cmd->add_option("--variant", c.variant, "full, young7_8, mid9_11, teen12_17 or custom:1,2,...; default from the header");
  cmd->add_option("--out", c.out, "write output here instead of stdout");
  cmd->add_flag("--json", c.json, "JSON output instead of a table");
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "worker threads, 0 = all cores");
}

void add_forest(CLI::App* cmd, ForestFlags& f) {
  cmd->add_option("--trees", f.trees, "trees per forest")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--depth", f.depth, "maximum tree depth, 0 = unlimited")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--mtry", f.mtry, "features drawn per node, 0 = floor(log2 F) + 1")->capture_default_str()->check(CLI::NonNegativeNumber);
}

void add_cv(CLI::App* cmd, CvFlags& v, bool fixed_threshold = true) {
  cmd->add_option("--k", v.k, "cross-validation folds")->capture_default_str()->check(CLI::Range(2, 1000000));
  cmd->add_option("--threshold-grid", v.grid, "calibration grid step")->capture_default_str()->check(CLI::Range(1e-6, 0.5));
  if (fixed_threshold)
    cmd->add_option("--threshold", v.threshold, "evaluate at this threshold instead of calibrating")->check(CLI::Range(0.0, 1.0));
}

std::string sweep_table(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  char buf[128];
  out << "depth  mtry   ROC AUC  accuracy  threshold\n";
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%5s %5d %9.3f %8.1f%% %10.3f\n",
                  c.max_depth == 0 ? "inf" : std::to_string(c.max_depth).c_str(), c.mtry, c.roc_auc,
                  100.0 * c.accuracy, c.threshold);
    out << buf;
  }
  return out.str();
}

std::string importance_table(const char* title, const std::vector<ImportanceEntry>& entries) {
  std::ostringstream out;
  char buf[128];
  out << title << '\n';
  for (const auto& e : ranked(entries)) {
    std::snprintf(buf, sizeof buf, "  %-12s %6.1f   (mean gain %.5f bits)\n", e.group.c_str(), e.percent, e.mean_gain);
    out << buf;
  }
  return out.str();
}

json importance_json(const std::vector<ImportanceEntry>& entries) {
  json out = json::array();
  for (const auto& e : ranked(entries)) out.push_back({{"group", e.group}, {"percent", e.percent}, {"mean_gain", e.mean_gain}});
  return out;
}

std::atomic<service::HttpServer*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyslexia risk screening: model training, evaluation and the screening service"};
  app.require_subcommand(1);
  Common c;
  ForestFlags forest;
  CvFlags cv;

  auto* train_cmd = app.add_subcommand("train", "train a forest on a labeled dataset and write the model artifact");
  add_common(train_cmd, c);
  add_forest(train_cmd, forest);
  std::optional<double> train_threshold;
  bool train_calibrate = false;
  train_cmd->add_option("--threshold", train_threshold, "decision threshold stored in the model")->check(CLI::Range(0.0, 1.0));
  train_cmd->add_flag("--calibrate", train_calibrate, "set the threshold by cross-validated calibration");
  train_cmd->add_option("--k", cv.k, "folds used by --calibrate")->capture_default_str();
  train_cmd->add_option("--threshold-grid", cv.grid, "calibration grid step")->capture_default_str();

  auto* eval_cmd = app.add_subcommand("evaluate", "k-fold cross-validation report");
  add_common(eval_cmd, c);
  add_forest(eval_cmd, forest);
  add_cv(eval_cmd, cv);
  std::string curves_path;
  eval_cmd->add_option("--curves", curves_path, "write PR and ROC curve points as CSV");

  auto* cal_cmd = app.add_subcommand("calibrate", "cross-validated threshold calibration");
  add_common(cal_cmd, c);
  add_forest(cal_cmd, forest);
  add_cv(cal_cmd, cv, false);
  std::string cal_model;
  cal_cmd->add_option("--model", cal_model, "model artifact whose threshold is replaced; the result goes to --out");

  auto* imp_cmd = app.add_subcommand("importance", "information-gain importance by question and by measure type");
  add_common(imp_cmd, c);
  add_forest(imp_cmd, forest);
  add_cv(imp_cmd, cv);
  std::size_t top_eval = 0;
  imp_cmd->add_option("--top-eval", top_eval, "also cross-validate on the N most important questions plus demographics");

  auto* sweep_cmd = app.add_subcommand("sweep", "cross-validated ROC over a depth by mtry grid");
  add_common(sweep_cmd, c);
  add_forest(sweep_cmd, forest);
  add_cv(sweep_cmd, cv, false);
  std::vector<int> depths{5, 10, 20, 50, 100}, mtrys{8};
  sweep_cmd->add_option("--depths", depths, "tree depths, 0 = unlimited")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--mtrys", mtrys, "features per node")->delimiter(',')->capture_default_str();

  auto* predict_cmd = app.add_subcommand("predict", "score feature rows or session logs with a model");
  add_common(predict_cmd, c, false);
  std::string model_path, features_path, manifest_path = DYSCREEN_DEFAULT_MANIFEST;
  std::vector<std::string> session_paths;
  predict_cmd->add_option("--model", model_path, "model artifact")->required();
  auto* feat_opt = predict_cmd->add_option("--features", features_path, "dataset CSV, labels optional, '-' for stdin");
  auto* sess_opt = predict_cmd->add_option("--session", session_paths, "session JSON-lines logs");
  feat_opt->excludes(sess_opt);
  predict_cmd->add_option("--manifest", manifest_path, "question manifest for --session")->capture_default_str();

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic labeled dataset");
  add_common(synth_cmd, c, false);
  SynthOptions synth;
  synth_cmd->add_option("--n", synth.n, "records")->capture_default_str();
  synth_cmd->add_option("--prevalence", synth.prevalence, "dyslexia share")->capture_default_str();
  synth_cmd->add_option("--separation", synth.separation, "hit-probability shift of the dyslexia class")->capture_default_str();

  auto* extract_cmd = app.add_subcommand("extract", "turn completed session logs into a dataset CSV");
  add_common(extract_cmd, c, false);
  extract_cmd->add_option("--session", session_paths, "session JSON-lines logs")->required();
  extract_cmd->add_option("--manifest", manifest_path, "question manifest")->capture_default_str();

  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP screening service");
  std::string listen = "127.0.0.1:8080", data_dir = "dyscreen-data", token;
  std::vector<std::string> preload;
  serve_cmd->add_option("--listen", listen, "host:port")->envname("DYSCREEN_LISTEN")->capture_default_str();
  serve_cmd->add_option("--data-dir", data_dir, "session and model storage")->envname("DYSCREEN_DATA_DIR")->capture_default_str();
  serve_cmd->add_option("--manifest", manifest_path, "question manifest")->envname("DYSCREEN_MANIFEST")->capture_default_str();
  serve_cmd->add_option("--token", token, "require this bearer token")->envname("DYSCREEN_TOKEN");
  serve_cmd->add_option("--model", preload, "activate these model artifacts at startup");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) {
      const auto ds = load_dataset(c);
      const auto cfg = forest.config(c);
      auto model = train(ds, cfg);
      if (train_calibrate) model.threshold = cross_validate(ds, cfg, cv.options(c)).threshold;
      if (train_threshold) {
        if (!(*train_threshold > 0.0 && *train_threshold < 1.0)) throw DataError("threshold must lie strictly between 0 and 1");
        model.threshold = *train_threshold;
      }
      emit(c, serialize_model(model));
    } else if (*eval_cmd) {
      const auto report = cross_validate(load_dataset(c), forest.config(c), cv.options(c));
      if (!curves_path.empty()) {
        std::ofstream out(curves_path);
        if (!out) throw DataError("cannot write '" + curves_path + "'");
        out << curves_csv(report);
      }
      emit(c, c.json ? dump(report_to_json(report, false)) : report_table(report));
    } else if (*cal_cmd) {
      const auto report = cross_validate(load_dataset(c), forest.config(c), cv.options(c));
      if (!cal_model.empty()) {
        auto model = load_model(cal_model);
        model.threshold = report.threshold;
        emit(c, serialize_model(model));
      } else if (c.json) {
        emit(c, dump({{"threshold", report.threshold},
                      {"fnr", 1.0 - report.weighted.recall_dys},
                      {"fpr", 1.0 - report.weighted.recall_nodys}}));
      } else {
        char buf[160];
        std::snprintf(buf, sizeof buf, "threshold %.4g  (recall dys %.1f%%, recall nodys %.1f%%)\n", report.threshold,
                      100.0 * report.weighted.recall_dys, 100.0 * report.weighted.recall_nodys);
        emit(c, buf);
      }
    } else if (*imp_cmd) {
      const auto ds = load_dataset(c);
      const auto questions = question_importance(ds);
      const auto types = type_importance(ds);
      json j = {{"questions", importance_json(questions)}, {"types", importance_json(types)}};
      std::string text = importance_table("question importance (%)", questions) + importance_table("type importance (%)", types);
      if (top_eval > 0) {
        const auto top = top_questions(questions, top_eval);
        const auto subset = ds.restricted_to(AgeVariant::custom(top));
        const auto report = cross_validate(subset, forest.config(c), cv.options(c));
        j["top_eval"] = {{"questions", top}, {"report", report_to_json(report, false)}};
        text += "\ncross-validation on " + subset.variant.label() + " plus demographics\n" + report_table(report);
      }
      emit(c, c.json ? dump(j) : text);
    } else if (*sweep_cmd) {
      const auto cells = sweep(load_dataset(c), depths, mtrys, forest.config(c), cv.options(c));
      if (c.json) {
        json j = json::array();
        for (const auto& s : cells)
          j.push_back({{"max_depth", s.max_depth}, {"mtry", s.mtry}, {"roc_auc", s.roc_auc}, {"accuracy", s.accuracy}, {"threshold", s.threshold}});
        emit(c, dump(j));
      } else {
        emit(c, sweep_table(cells));
      }
    } else if (*predict_cmd) {
      const auto model = load_model(model_path);
      std::vector<std::pair<std::string, std::vector<double>>> rows;
      if (!features_path.empty()) {
        Common in = c;
        in.data = features_path;
        if (in.variant.empty()) in.variant = model.variant.label();
        for (auto& r : load_dataset(in, LabelPolicy::Optional).records) rows.emplace_back(r.participant.id, std::move(r.features));
      } else if (!session_paths.empty()) {
        const auto manifest = QuestionManifest::load(manifest_path);
        for (const auto& p : session_paths) {
          const auto log = read_session_log(std::filesystem::path(p));
          auto fv = extract_features(log, manifest);
          if (!(fv.variant == model.variant)) fv = fv.restricted_to(model.variant);
          rows.emplace_back(log.session_id, std::move(fv.values));
        }
      } else {
        throw CLI::RequiredError("--features or --session");
      }
      json j = json::array();
      std::ostringstream text;
      text << "id,score,flagged\n";
      for (const auto& [id, x] : rows) {
        const double s = predict_score(model, x);
        const bool flagged = classify_score(s, model.threshold) == Label::Dyslexia;
        j.push_back({{"id", id}, {"score", s}, {"flagged", flagged}, {"threshold", model.threshold}});
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", s);
        text << id << ',' << buf << ',' << (flagged ? "yes" : "no") << '\n';
      }
      emit(c, c.json ? dump(j) : text.str());
    } else if (*synth_cmd) {
      synth.seed = c.seed;
      if (!c.variant.empty()) synth.variant = AgeVariant::parse(c.variant);
      std::ostringstream out;
      write_dataset_csv(out, synth_generate(synth));
      emit(c, out.str());
    } else if (*extract_cmd) {
      const auto manifest = QuestionManifest::load(manifest_path);
      std::optional<Dataset> ds;
      for (const auto& p : session_paths) {
        const auto log = read_session_log(std::filesystem::path(p));
        auto fv = extract_features(log, manifest);
        const AgeVariant target = c.variant.empty() ? (ds ? ds->variant : fv.variant) : AgeVariant::parse(c.variant);
        if (!(fv.variant == target)) fv = fv.restricted_to(target);
        if (!ds) ds = Dataset{target, {}};
        ds->records.push_back({log.participant, std::move(fv.values)});
      }
      std::ostringstream out;
      write_dataset_csv(out, *ds);
      emit(c, out.str());
    } else if (*serve_cmd) {
      const auto colon = listen.rfind(':');
      if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected host:port");
      const auto host = listen.substr(0, colon);
      const int port = std::stoi(listen.substr(colon + 1));
      service::ModelRegistry registry(data_dir);
      for (const auto& p : preload) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw DataError("cannot open '" + p + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        const auto entry = registry.activate(buf.str());
        std::cerr << "activated " << entry.model->variant.label() << " model " << entry.version << '\n';
      }
      service::ScreeningService sessions(QuestionManifest::load(manifest_path), data_dir, registry);
      service::HttpServer server(sessions, registry, {token});
      const int bound = server.bind(host, port);
      std::cerr << "listening on " << host << ':' << bound << '\n';
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.run();
      g_server = nullptr;
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what();
    if (e.line() != 0) std::cerr << " (line " << e.line() << ')';
    std::cerr << '\n';
    return kExitData;
  } catch (const service::ServiceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
