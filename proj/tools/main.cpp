// emobase command line: synth | ingest | features | train, plus eval, serve
// and validate-plan. Exit 1 on domain errors, 2 on bad arguments.
#include "emobase/errors.hpp"
#include "emobase/eval/experiments.hpp"
#include "emobase/eval/pipeline.hpp"
#include "emobase/eval/synthetic.hpp"
#include "emobase/features/dataset_io.hpp"
#include "emobase/learn/model_io.hpp"
#include "emobase/protocol/planner.hpp"
#include "emobase/protocol/protocol_io.hpp"
#include "emobase/service/api.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace emobase;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw FormatError((path == "-" ? std::string("stdin") : path) + ": " + e.what());
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StoreError("cannot write " + path);
  out << text;
}

features::FeatureMask parse_mask(const std::vector<std::string>& names, bool with_skt) {
  if (names.empty()) return with_skt ? features::full_mask() : features::default_mask();
  features::FeatureMask m;
  for (const auto& n : names) m.set(static_cast<std::size_t>(features::parse_feature(n)));
  return m;
}

features::Dataset load_dataset(const std::string& path, const features::FeatureMask& mask) {
  std::istringstream in(slurp(path));
  auto ds = features::read_dataset_csv(in);
  ds.mask = mask;
  return ds;
}

eval::EvalSetup make_setup(const std::string& clf, bool binary, std::size_t folds, std::size_t w,
                           std::optional<int> min_rank) {
  eval::EvalSetup s;
  s.classifier.kind = learn::parse_classifier(clf);
  s.binary = binary;
  s.folds = folds;
  s.window = w;
  s.min_rank = min_rank;
  return s;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoul(part, &used);
      if (used != part.size() || v == 0) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--sweep", "'" + part + "' is not a positive window size");
    }
  }
  return out;
}

service::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personalized emotion baselines from wearable biosignals"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string in = "-";
  std::string out = "-";
  std::string format = "json";

  auto common = [&](CLI::App* sub, bool has_in, bool has_out) {
    sub->add_option("--seed", seed, "Master seed (all commands are deterministic in it)");
    if (has_in) sub->add_option("--in", in, "Input file, - for stdin");
    if (has_out) sub->add_option("--out", out, "Output file, - for stdout");
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic subject (recordings bundle JSON)");
  common(synth, false, true);
  std::size_t synth_sessions = 9;
  double separability = 0.5;
  std::string skt_mode = "noise";
  std::string synth_dir;
  bool table_one = false;
  synth->add_option("--sessions", synth_sessions, "Number of sessions")->check(CLI::PositiveNumber);
  synth->add_option("--separability", separability, "Class separation, 0 = none")->check(CLI::NonNegativeNumber);
  synth->add_option("--skt-mode", skt_mode, "SKT model")->check(CLI::IsMember({"noise", "leak"}));
  synth->add_option("--dir", synth_dir, "Write the directory layout here instead of a bundle");
  synth->add_flag("--table-one", table_one, "Size segments to the reference per-label totals");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Recordings (bundle or directory) -> labeled signals JSON");
  common(ingest, true, true);
  std::string ingest_dir;
  double trim_s = 15.0;
  std::size_t median_order = 10;
  ingest->add_option("--dir", ingest_dir, "Read a recordings directory instead of a bundle");
  ingest->add_option("--trim", trim_s, "Seconds dropped at the start of each clip")->check(CLI::NonNegativeNumber);
  ingest->add_option("--median-order", median_order, "GSR median filter order")->check(CLI::PositiveNumber);

  // features
  auto* feats = app.add_subcommand("features", "Labeled signals -> dataset CSV");
  common(feats, true, true);
  std::size_t w = 32;
  std::optional<int> min_rank;
  feats->add_option("--w", w, "Window length in samples")->check(CLI::PositiveNumber);
  feats->add_option("--min-rank", min_rank, "Keep only clips ranked at least this")->check(CLI::Range(1, 10));

  // train
  auto* train = app.add_subcommand("train", "Dataset CSV -> model file and report");
  common(train, true, true);
  std::string clf = "rf";
  std::string model_path;
  bool binary = false;
  bool with_skt = false;
  std::vector<std::string> mask_names;
  std::size_t folds = 10;
  train->add_option("--clf", clf, "Classifier")->check(CLI::IsMember({"rf", "tree", "ann", "svm"}));
  train->add_option("--model", model_path, "Where to write the trained model");
  train->add_flag("--binary", binary, "Negative vs positive instead of six emotions");
  train->add_flag("--with-skt", with_skt, "Keep SKT_mean (leaks session position)");
  train->add_option("--mask", mask_names, "Explicit feature list");
  train->add_option("--w", w, "Window length the dataset was built with (descriptor only)");
  train->add_option("--min-rank", min_rank, "Rank filter the dataset was built with (descriptor only)");
  train->add_option("--folds", folds, "Folds for classifiers without out-of-bag estimates")
      ->check(CLI::Range(2, 1000));
  train->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

  // eval
  auto* ev = app.add_subcommand("eval", "Cross-validation, comparisons, ablations and window sweeps");
  common(ev, true, true);
  bool do_cv = false;
  bool do_compare = false;
  bool do_ablation = false;
  std::string sweep;
  std::vector<std::uint64_t> seeds;
  auto* cv_flag = ev->add_flag("--cv", do_cv, "k-fold cross-validation of one classifier");
  auto* cmp_flag = ev->add_flag("--compare", do_compare, "Binary k-fold error of all four classifiers");
  auto* abl_flag = ev->add_flag("--ablation-skt", do_ablation, "Error with and without SKT_mean");
  auto* sweep_opt = ev->add_option("--sweep", sweep, "Window sizes, e.g. 16,32,64 (input: signals JSON)");
  cv_flag->excludes(cmp_flag)->excludes(abl_flag)->excludes(sweep_opt);
  cmp_flag->excludes(abl_flag)->excludes(sweep_opt);
  abl_flag->excludes(sweep_opt);
  ev->add_option("--clf", clf, "Classifier")->check(CLI::IsMember({"rf", "tree", "ann", "svm"}));
  std::string method = "cv";
  ev->add_option("--method", method, "cv, or oob for random forests")->check(CLI::IsMember({"cv", "oob"}));
  ev->add_option("--folds", folds, "Number of folds")->check(CLI::Range(2, 1000));
  ev->add_flag("--binary", binary, "Negative vs positive");
  ev->add_flag("--with-skt", with_skt, "Keep SKT_mean");
  ev->add_option("--mask", mask_names, "Explicit feature list");
  ev->add_option("--min-rank", min_rank, "Rank filter (sweep only)")->check(CLI::Range(1, 10));
  ev->add_option("--seeds", seeds, "Repeat --cv over these seeds and summarize")->delimiter(',');
  ev->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  common(serve, false, false);
  service::ServiceConfig scfg;
  serve->add_option("--host", scfg.host, "Bind address");
  serve->add_option("--port", scfg.port, "Port, 0 for any free one")->check(CLI::Range(0, 65535));
  serve->add_option("--store", scfg.root, "Store root directory");
  serve->add_option("--cors-origin", scfg.cors_origin, "Allowed browser origin");

  // validate-plan
  auto* vplan = app.add_subcommand("validate-plan", "Check a session plan against a pool and history");
  common(vplan, true, false);
  std::string pool_path;
  std::string profile_path;
  vplan->add_option("--pool", pool_path, "Pool JSON array")->required();
  vplan->add_option("--profile", profile_path, "Subject profile with the session history");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) {
      auto spec = eval::default_synthetic_spec();
      spec.sessions = synth_sessions;
      spec.separability = separability;
      spec.skt_mode = skt_mode == "leak" ? eval::SktMode::Leak : eval::SktMode::Noise;
      if (table_one) spec.total_seconds = eval::reference_totals();
      const auto rec = eval::generate_synthetic_subject(spec, seed);
      if (!synth_dir.empty()) {
        eval::save_recordings(rec, synth_dir);
      } else {
        emit(out, eval::recordings_to_json(rec).dump() + "\n");
      }
    } else if (*ingest) {
      const auto rec = ingest_dir.empty() ? eval::recordings_from_json(read_json(in)) : eval::load_recordings(ingest_dir);
      signal::PreprocessOptions opt;
      opt.trim_s = trim_s;
      opt.gsr_median_order = median_order;
      const auto signals = eval::preprocess_subject(rec, opt);
      for (const auto& warn : signals.warnings) std::cerr << "warning: " << warn << "\n";
      emit(out, eval::signals_to_json(signals).dump() + "\n");
    } else if (*feats) {
      const auto signals = eval::signals_from_json(read_json(in));
      features::WindowConfig wc;
      wc.w = w;
      features::DatasetOptions opt;
      opt.mask = features::full_mask();
      opt.min_rank = min_rank;
      const auto ds = eval::dataset_from_signals(signals.sessions, wc, opt, signals.rankings);
      if (ds.size() == 0) throw DatasetError("no instances survive windowing and filtering");
      std::ostringstream csv;
      features::write_dataset_csv(csv, ds);
      emit(out, csv.str());
    } else if (*train) {
      const auto ds = load_dataset(in, parse_mask(mask_names, with_skt));
      service::RunParams params;
      params.classifier = clf;
      params.seed = seed;
      params.binary = binary;
      params.w = w;
      params.min_rank = min_rank;
      auto setup = make_setup(clf, binary, folds, w, min_rank);
      setup.method = setup.classifier.kind == learn::ClassifierKind::RandomForest ? eval::Method::OutOfBag
                                                                                  : eval::Method::CrossValidation;
      const auto report = eval::evaluate(ds, setup, seed);
      const auto model = learn::train(setup.classifier, eval::to_samples(ds, binary), seed);
      if (!model_path.empty()) learn::save_model(model_path, model);
      const auto* forest = std::get_if<learn::ForestModel>(&model);
      if (format == "text") {
        std::string text = eval::render_confusion(report);
        if (forest) text += "\n" + eval::render_importance(learn::variable_importance(*forest));
        emit(out, text);
      } else {
        auto j = eval::report_to_json(report, false);
        if (forest) {
          json imp = json::array();
          for (const auto& e : learn::variable_importance(*forest)) imp.push_back({{"feature", e.feature}, {"score", e.score}});
          j["importance"] = imp;
        }
        emit(out, j.dump(2) + "\n");
      }
    } else if (*ev) {
      auto setup = make_setup(clf, binary, folds, w, min_rank);
      if (method == "oob") setup.method = eval::Method::OutOfBag;
      const bool text = format == "text";
      if (!sweep.empty()) {
        const auto sizes = parse_sizes(sweep);
        const auto signals = eval::signals_from_json(read_json(in));
        features::DatasetOptions opt;
        opt.mask = parse_mask(mask_names, with_skt);
        opt.min_rank = min_rank;
        const auto points = eval::window_sweep(signals.sessions, sizes, setup, opt, signals.rankings, seed);
        emit(out, text ? eval::render_sweep(points) : eval::sweep_to_json(points, false).dump(2) + "\n");
      } else if (do_compare) {
        const auto ds = load_dataset(in, parse_mask(mask_names, with_skt));
        const auto configs = eval::default_comparison();
        const auto reports = eval::compare_classifiers(ds, configs, folds, seed);
        emit(out, text ? eval::render_comparison(reports) : eval::comparison_to_json(reports, false).dump(2) + "\n");
      } else if (do_ablation) {
        const auto ds = load_dataset(in, features::full_mask());
        const auto result = eval::ablation_skt(ds, setup, seed);
        emit(out, text ? eval::render_ablation(result) : eval::ablation_to_json(result, false).dump(2) + "\n");
      } else if (!seeds.empty()) {
        const auto ds = load_dataset(in, parse_mask(mask_names, with_skt));
        const auto summary = eval::across_seeds(ds, setup, seeds);
        const json j = {{"seeds", summary.seeds},
                        {"errors", summary.errors},
                        {"mean_error", summary.mean},
                        {"best_error", summary.best},
                        {"worst_error", summary.worst}};
        if (text) {
          std::ostringstream os;
          os.setf(std::ios::fixed);
          os.precision(1);
          os << "mean error " << 100 * summary.mean << "%  best " << 100 * summary.best << "%  worst "
             << 100 * summary.worst << "%  over " << seeds.size() << " seeds\n";
          emit(out, os.str());
        } else {
          emit(out, j.dump(2) + "\n");
        }
      } else {
        const auto ds = load_dataset(in, parse_mask(mask_names, with_skt));
        const auto report = eval::evaluate(ds, setup, seed);
        emit(out, text ? eval::render_confusion(report) : eval::report_to_json(report, false).dump(2) + "\n");
      }
    } else if (*serve) {
      service::Service svc(service::config_from_env(scfg));
      const int port = svc.bind();
      g_service = &svc;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << scfg.host << ":" << port << ", store " << scfg.root.string() << "\n";
      svc.listen();
      g_service = nullptr;
    } else if (*vplan) {
      const auto plan = protocol::plan_from_json(read_json(in));
      const auto pool = protocol::pool_from_json(read_json(pool_path));
      protocol::SubjectProfile history;
      if (!profile_path.empty()) history = protocol::profile_from_json(read_json(profile_path));
      history.sessions.erase(std::remove_if(history.sessions.begin(), history.sessions.end(),
                                            [&](const auto& s) { return s.session_id == plan.session_id; }),
                             history.sessions.end());
      const auto problems = protocol::validate_plan(plan, pool, history);
      for (const auto& p : problems) std::cout << "violation: " << p << "\n";
      if (!problems.empty()) return 1;
      std::cout << "ok: " << plan.session_id << "\n";
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
