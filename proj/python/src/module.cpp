#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "emobase/errors.hpp"
#include "emobase/eval/experiments.hpp"
#include "emobase/eval/pipeline.hpp"
#include "emobase/eval/synthetic.hpp"
#include "emobase/features/dataset_io.hpp"
#include "emobase/features/features.hpp"
#include "emobase/learn/model_io.hpp"
#include "emobase/protocol/planner.hpp"
#include "emobase/protocol/protocol_io.hpp"
#include "emobase/signal/signal.hpp"

#include <sstream>

namespace py = pybind11;
using namespace emobase;
using nlohmann::json;

// Structured values cross the boundary as JSON text; the Python package
// turns them into dicts.

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(e.what());
  }
}

features::FeatureMask mask_for(const std::vector<std::string>& names, bool with_skt) {
  if (names.empty()) return with_skt ? features::full_mask() : features::default_mask();
  features::FeatureMask m;
  for (const auto& n : names) m.set(static_cast<std::size_t>(features::parse_feature(n)));
  return m;
}

features::Dataset dataset_from_csv(const std::string& csv, const std::vector<std::string>& mask, bool with_skt) {
  std::istringstream in(csv);
  auto ds = features::read_dataset_csv(in);
  ds.mask = mask_for(mask, with_skt);
  return ds;
}

struct PyModel {
  learn::Model model;
};

}  // namespace

PYBIND11_MODULE(_emobase, m) {
  m.doc() = "Physiological emotion recognition: features, classifiers and stimulus protocol";

  auto base = py::register_exception<Error>(m, "EmobaseError", PyExc_ValueError);
  py::register_exception<protocol::PoolExhaustedError>(m, "PoolExhaustedError", base.ptr());
  py::register_exception<NotFoundError>(m, "NotFoundError", base.ptr());

  m.def("feature_names", [] {
    std::vector<std::string> out;
    for (auto f : features::all_features()) out.emplace_back(features::feature_name(f));
    return out;
  });

  m.def(
      "extract_features",
      [](const std::vector<std::vector<double>>& channels) {
        if (channels.size() != kChannelCount) throw FeatureError("expected 6 channels: HR, HRV, HRP, BR, GSR, SKT");
        features::Window win;
        for (std::size_t c = 0; c < kChannelCount; ++c) win.channels[c] = channels[c];
        const auto f = features::extract_features(win);
        return std::vector<double>(f.begin(), f.end());
      },
      py::arg("channels"));

  m.def(
      "median_filter",
      [](const std::vector<double>& values, std::size_t order) {
        signal::TimeSeries s;
        for (std::size_t i = 0; i < values.size(); ++i) s.samples.push_back({static_cast<std::int64_t>(i) * 1000, values[i]});
        return signal::median_filter(s, order).values();
      },
      py::arg("values"), py::arg("order"));

  m.def(
      "synthesize",
      [](std::uint64_t seed, std::size_t sessions, double separability) {
        auto spec = eval::default_synthetic_spec();
        spec.sessions = sessions;
        spec.separability = separability;
        return eval::recordings_to_json(eval::generate_synthetic_subject(spec, seed)).dump();
      },
      py::arg("seed"), py::arg("sessions") = 9, py::arg("separability") = 0.5);

  m.def(
      "preprocess",
      [](const std::string& recordings) {
        return eval::signals_to_json(eval::preprocess_subject(eval::recordings_from_json(parse(recordings)), {})).dump();
      },
      py::arg("recordings"));

  m.def(
      "build_dataset",
      [](const std::string& signals_text, std::size_t w, std::optional<int> min_rank) {
        const auto signals = eval::signals_from_json(parse(signals_text));
        features::WindowConfig wc;
        wc.w = w;
        features::DatasetOptions opt;
        opt.mask = features::full_mask();
        opt.min_rank = min_rank;
        std::ostringstream csv;
        features::write_dataset_csv(csv, eval::dataset_from_signals(signals.sessions, wc, opt, signals.rankings));
        return csv.str();
      },
      py::arg("signals"), py::arg("w") = 32, py::arg("min_rank") = py::none());

  m.def(
      "evaluate",
      [](const std::string& csv, const std::string& classifier, const std::string& method, std::size_t folds,
         bool binary, bool with_skt, const std::vector<std::string>& mask, std::uint64_t seed) {
        const auto ds = dataset_from_csv(csv, mask, with_skt);
        eval::EvalSetup setup;
        setup.classifier.kind = learn::parse_classifier(classifier);
        if (method == "oob") {
          setup.method = eval::Method::OutOfBag;
        } else if (method != "cv") {
          throw ConfigError("method must be cv or oob");
        }
        setup.folds = folds;
        setup.binary = binary;
        py::gil_scoped_release release;
        return eval::report_to_json(eval::evaluate(ds, setup, seed), false).dump();
      },
      py::arg("csv"), py::arg("classifier") = "rf", py::arg("method") = "cv", py::arg("folds") = 10,
      py::arg("binary") = false, py::arg("with_skt") = false, py::arg("mask") = std::vector<std::string>{},
      py::arg("seed") = 0);

  py::class_<PyModel>(m, "Model")
      .def_property_readonly("kind",
                             [](const PyModel& p) { return std::string(learn::classifier_name(learn::kind_of(p.model))); })
      .def_property_readonly("dimension", [](const PyModel& p) { return learn::input_dimension(p.model); })
      .def("predict", [](const PyModel& p, const std::vector<double>& x) { return learn::predict(p.model, x); })
      .def("importance",
           [](const PyModel& p) {
             const auto* forest = std::get_if<learn::ForestModel>(&p.model);
             if (!forest) throw ConfigError("importance is only defined for random forests");
             std::vector<std::pair<std::string, double>> out;
             for (const auto& e : learn::variable_importance(*forest)) out.emplace_back(e.feature, e.score);
             return out;
           })
      .def("to_json", [](const PyModel& p) { return learn::model_to_json(p.model).dump(); });

  m.def(
      "train",
      [](const std::string& csv, const std::string& classifier, bool binary, bool with_skt,
         const std::vector<std::string>& mask, std::uint64_t seed) {
        const auto ds = dataset_from_csv(csv, mask, with_skt);
        learn::ClassifierConfig config;
        config.kind = learn::parse_classifier(classifier);
        const auto samples = eval::to_samples(ds, binary);
        py::gil_scoped_release release;
        return PyModel{learn::train(config, samples, seed)};
      },
      py::arg("csv"), py::arg("classifier") = "rf", py::arg("binary") = false, py::arg("with_skt") = false,
      py::arg("mask") = std::vector<std::string>{}, py::arg("seed") = 0);

  m.def(
      "load_model", [](const std::string& text) { return PyModel{learn::model_from_json(parse(text))}; },
      py::arg("text"));

  m.def(
      "generate_session",
      [](const std::string& profile, const std::string& pool, const std::string& session_id, bool personalized,
         const std::string& config_text) {
        const auto config = protocol::config_from_json(parse(config_text));
        const auto prof = protocol::profile_from_json(parse(profile), config);
        const auto p = protocol::pool_from_json(parse(pool));
        return protocol::plan_to_json(protocol::generate_session(prof, p, {session_id, personalized}, config)).dump();
      },
      py::arg("profile"), py::arg("pool"), py::arg("session_id"), py::arg("personalized") = false,
      py::arg("config") = "{}");

  m.def(
      "validate_plan",
      [](const std::string& plan, const std::string& pool, const std::string& profile, const std::string& config_text) {
        const auto config = protocol::config_from_json(parse(config_text));
        return protocol::validate_plan(protocol::plan_from_json(parse(plan)), protocol::pool_from_json(parse(pool)),
                                       protocol::profile_from_json(parse(profile), config), config);
      },
      py::arg("plan"), py::arg("pool"), py::arg("profile"), py::arg("config") = "{}");
}
