#include "doctest.h"

#include "emobase/errors.hpp"
#include "emobase/eval/binary.hpp"
#include "emobase/eval/experiments.hpp"
#include "emobase/eval/pipeline.hpp"
#include "emobase/eval/report.hpp"
#include "emobase/eval/synthetic.hpp"
#include "emobase/rng.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace emobase;
using namespace emobase::eval;

namespace {

features::Dataset synthetic_dataset(SyntheticSpec spec, std::uint64_t seed,
                                    features::FeatureMask mask = features::default_mask()) {
  const auto rec = generate_synthetic_subject(spec, seed);
  const auto sig = preprocess_subject(rec);
  features::DatasetOptions opt;
  opt.mask = mask;
  return dataset_from_signals(sig.sessions, {32}, opt, sig.rankings);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("confusion matrix bookkeeping") {
  ConfusionMatrix m({1, 2, 3});
  m.add(1, 1, 8);
  m.add(2, 1, 2);
  m.add(2, 2, 5);
  m.add(3, 3, 4);
  m.add(1, 3, 1);
  CHECK(m.column_total(0) == 10);
  CHECK(m.row_total(1) == 7);
  CHECK(m.total() == 20);
  CHECK(m.correct() == 17);
  CHECK(m.class_error(0) == doctest::Approx(0.2));
  CHECK(m.class_error(1) == 0.0);
  CHECK(m.class_error(2) == doctest::Approx(0.2));
  CHECK(m.error() == doctest::Approx(0.15));
  CHECK_THROWS_AS(m.add(4, 1), ValueError);

  ConfusionMatrix empty({1, 2});
  CHECK(empty.error() == 0.0);
  CHECK(empty.class_error(0) == 0.0);
  ConfusionMatrix other({1, 2});
  other.add(2, 1, 3);
  empty.merge(other);
  CHECK(empty.count(1, 0) == 3);
}

TEST_CASE("confusion columns equal class counts") {
  Rng rng(4);
  std::vector<int> pred, actual;
  std::map<int, std::size_t> counts;
  for (int i = 0; i < 300; ++i) {
    actual.push_back(1 + static_cast<int>(rng.index(6)));
    pred.push_back(1 + static_cast<int>(rng.index(6)));
    ++counts[actual.back()];
  }
  const auto m = confusion_from(pred, actual);
  for (std::size_t a = 0; a < m.labels().size(); ++a) {
    CHECK(m.column_total(a) == counts[m.labels()[a]]);
    CHECK(m.class_error(a) == doctest::Approx(1.0 - double(m.count(a, a)) / double(counts[m.labels()[a]])));
  }
}

TEST_CASE("binary mapping") {
  CHECK(binary_code(Emotion::Disgust) == kBinaryNegative);
  CHECK(binary_code(Emotion::Fear) == kBinaryNegative);
  CHECK(binary_code(Emotion::SadAnger) == kBinaryNegative);
  CHECK(binary_code(Emotion::AweRev) == kBinaryPositive);
  CHECK(binary_code(Emotion::JoyAmus) == kBinaryPositive);
  CHECK(binary_code(Emotion::Content) == kBinaryPositive);
  CHECK_THROWS_AS(binary_code(Emotion::Rest), MappingError);
  CHECK_THROWS_AS(binary_code_of(9), MappingError);
  CHECK(binarize(std::vector<int>{1, 2, 3, 4, 5, 6}) == std::vector<int>{0, 0, 1, 0, 1, 1});
  CHECK(binary_name(0) == "Negative");

  // Fear predicted for a true SadAnger is a six-class error but binary-correct.
  const auto six = confusion_from(std::vector<int>{1}, std::vector<int>{2});
  CHECK(six.error() == 1.0);
  CHECK(collapse_binary(six).error() == 0.0);
}

TEST_CASE("collapsed binary error never exceeds six-class error") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> pred, actual;
    const std::size_t n = 1 + rng.index(200);
    for (std::size_t i = 0; i < n; ++i) {
      actual.push_back(1 + static_cast<int>(rng.index(6)));
      pred.push_back(rng.uniform() < 0.5 ? actual.back() : 1 + static_cast<int>(rng.index(6)));
    }
    const auto six = confusion_from(pred, actual);
    const auto two = collapse_binary(six);
    const auto direct = confusion_from(binarize(pred), binarize(actual));
    CHECK(two.counts() == direct.counts());
    CHECK(two.error() <= six.error());
    CHECK(two.total() == six.total());
  }
}

TEST_CASE("fold assignment") {
  for (std::size_t n : {10u, 11u, 97u}) {
    for (std::size_t k : {2u, 3u, 10u}) {
      const auto f = assign_folds(n, k, 5);
      std::vector<std::size_t> sizes(k, 0);
      for (int x : f) ++sizes[static_cast<std::size_t>(x)];
      const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      CHECK(*hi - *lo <= 1);
      CHECK(f == assign_folds(n, k, 5));
    }
  }
  const auto loo = assign_folds(7, 7, 1);
  std::vector<int> sorted = loo;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  CHECK_THROWS_AS(assign_folds(5, 6, 1), ConfigError);
  CHECK_THROWS_AS(assign_folds(5, 1, 1), ConfigError);
  CHECK(assign_folds(50, 5, 1) != assign_folds(50, 5, 2));
}

TEST_CASE("cross-validation tests each instance once") {
  learn::Samples s;
  s.x = learn::Matrix(0, 1);
  s.feature_names = {"x"};
  for (int i = 0; i < 40; ++i) {
    // Two clusters with a wide gap, so any held-out subset stays separable.
    s.x.append_row(std::vector<double>{static_cast<double>(i < 20 ? i : i + 100)});
    s.y.push_back(i < 20 ? 1 : 5);
  }
  learn::ClassifierConfig cfg;
  cfg.kind = learn::ClassifierKind::DecisionTree;
  cfg.tree.min_leaf = 1;
  const auto r = cross_validate(s, cfg, 10, 3);
  CHECK(r.mean_error == 0.0);
  CHECK(r.confusion.total() == 40);
  CHECK(r.fold_errors.size() == 10);
  for (int p : r.predictions) CHECK(p != -1);

  const auto loo = cross_validate(s, cfg, 40, 3);
  CHECK(loo.confusion.total() == 40);
  CHECK(loo.fold_errors.size() == 40);

  CHECK(report_to_json(r, false) == report_to_json(cross_validate(s, cfg, 10, 3), false));
  CHECK_THROWS_AS(cross_validate(s, cfg, 41, 3), ConfigError);
  CHECK_THROWS_AS(out_of_bag(s, cfg, 1), ConfigError);
}

TEST_CASE("synthetic generator") {
  auto spec = default_synthetic_spec();
  spec.sessions = 3;
  const auto a = generate_synthetic_subject(spec, 9);
  const auto b = generate_synthetic_subject(spec, 9);
  CHECK(recordings_to_json(a).dump() == recordings_to_json(b).dump());
  CHECK(recordings_to_json(a).dump() != recordings_to_json(generate_synthetic_subject(spec, 10)).dump());
  REQUIRE(a.sessions.size() == 3);
  for (const auto& s : a.sessions) {
    CHECK_NOTHROW(signal::validate(s.schedule));
    CHECK(s.streams.size() == 6);
    for (const auto& ts : s.streams) CHECK_NOTHROW(signal::validate(ts));
  }
  for (const auto& [clip, r] : a.rankings) CHECK((r >= spec.rank_min && r <= spec.rank_max));

  SUBCASE("same seed writes byte-identical files") {
    const auto base = std::filesystem::temp_directory_path() / "emobase_synth_test";
    std::filesystem::remove_all(base);
    save_recordings(a, base / "one");
    save_recordings(b, base / "two");
    for (const auto& s : a.sessions) {
      for (const char* f : {"chest.csv", "wrist.csv", "manifest.json"}) {
        const auto rel = std::filesystem::path("sessions") / s.schedule.session_id / f;
        CHECK(read_file(base / "one" / rel) == read_file(base / "two" / rel));
      }
    }
    const auto loaded = load_recordings(base / "one");
    CHECK(recordings_to_json(loaded) == recordings_to_json(a));
    std::filesystem::remove_all(base);
  }
  SUBCASE("invalid specs are rejected") {
    auto bad = spec;
    bad.baseline[2].stddev = 0.0;
    CHECK_THROWS_AS(generate_synthetic_subject(bad, 1), ConfigError);
    bad = spec;
    bad.session_emotions = {{Emotion::Rest}};
    CHECK_THROWS_AS(generate_synthetic_subject(bad, 1), ConfigError);
    bad = spec;
    bad.separability = -1;
    CHECK_THROWS_AS(generate_synthetic_subject(bad, 1), ConfigError);
    bad = spec;
    bad.total_seconds[Emotion::Fear] = 10.0;  // cannot fill even one window per clip
    CHECK_THROWS_AS(generate_synthetic_subject(bad, 1), ConfigError);
  }
}

TEST_CASE("reference-shaped subject reproduces the instance counts") {
  auto spec = default_synthetic_spec();
  spec.total_seconds = reference_totals();
  const auto rec = generate_synthetic_subject(spec, 1);
  signal::PreprocessOptions pre;
  pre.trim_s = 0.0;
  const auto sig = preprocess_subject(rec, pre);
  std::map<Emotion, std::size_t> counts;
  for (const auto& s : sig.sessions) {
    for (const auto& w : features::cut_windows(s, {32})) ++counts[w.label];
  }
  CHECK(counts[Emotion::Rest] == 240);
  CHECK(counts[Emotion::Fear] == 129);
  CHECK(counts[Emotion::SadAnger] == 122);
  CHECK(counts[Emotion::AweRev] == 158);
  CHECK(counts[Emotion::Disgust] == 109);
  CHECK(counts[Emotion::JoyAmus] == 149);
  CHECK(counts[Emotion::Content] == 120);
  const auto ds = dataset_from_signals(sig.sessions, {32}, {}, sig.rankings);
  CHECK(ds.size() == 787);
}

TEST_CASE("no-signal data sits near the majority baseline") {
  auto spec = default_synthetic_spec();
  spec.separability = 0.0;
  const auto ds = synthetic_dataset(spec, 2);
  std::map<Emotion, std::size_t> counts;
  for (const auto& i : ds.instances) ++counts[i.label];
  std::size_t top = 0;
  for (const auto& [e, c] : counts) top = std::max(top, c);
  const double baseline = 1.0 - double(top) / double(ds.size());
  EvalSetup setup;
  setup.method = Method::OutOfBag;
  const auto r = evaluate(ds, setup, 1);
  CHECK(std::abs(r.mean_error - baseline) <= 0.05);
}

TEST_CASE("experiments on a small synthetic subject") {
  auto spec = default_synthetic_spec();
  spec.sessions = 4;
  spec.skt_mode = SktMode::Leak;
  const auto ds = synthetic_dataset(spec, 3, features::full_mask());
  REQUIRE(ds.size() > 50);

  EvalSetup setup;
  setup.classifier.forest.n_trees = 50;

  SUBCASE("evaluate is reproducible and fills the descriptor") {
    setup.min_rank = 7;
    const auto a = evaluate(ds, setup, 11);
    const auto b = evaluate(ds, setup, 11);
    CHECK(report_to_json(a, false) == report_to_json(b, false));
    CHECK(a.setup.features.size() == 17);
    CHECK(a.setup.min_rank == 7);
    CHECK(a.instances == ds.size());
    const auto back = report_from_json(report_to_json(a));
    CHECK(report_to_json(back, false) == report_to_json(a, false));
    CHECK(render_confusion(a).find("Fear") != std::string::npos);
  }
  SUBCASE("binary evaluation has two classes") {
    setup.binary = true;
    const auto r = evaluate(ds, setup, 1);
    CHECK(r.confusion.labels() == std::vector<int>{0, 1});
    CHECK(render_confusion(r).find("Negative") != std::string::npos);
  }
  SUBCASE("ablation masks differ by exactly SKT_mean") {
    const auto r = ablation_skt(ds, setup, 4);
    CHECK(r.with_skt.setup.features.size() == 17);
    CHECK(r.without_skt.setup.features.size() == 16);
    CHECK(std::find(r.without_skt.setup.features.begin(), r.without_skt.setup.features.end(), "SKT_mean") ==
          r.without_skt.setup.features.end());
    CHECK(r.with_skt.fold_of == r.without_skt.fold_of);
    CHECK(ablation_to_json(r)["delta"].get<double>() == doctest::Approx(r.delta()));
    auto masked = ds;
    masked.mask = features::default_mask();
    CHECK_THROWS_AS(ablation_skt(masked, setup, 4), ConfigError);
  }
  SUBCASE("classifier comparison") {
    auto configs = default_comparison();
    for (auto& c : configs) {
      c.forest.n_trees = 50;
      c.ann.epochs = 30;
    }
    const auto rows = compare_classifiers(ds, configs, 5, 8);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].setup.classifier == "tree");
    CHECK(rows[3].setup.classifier == "svm");
    for (const auto& r : rows) {
      CHECK(r.setup.binary);
      CHECK(r.fold_of == rows[0].fold_of);
    }
    const auto table = render_comparison(rows);
    CHECK(table.find("Random Forests") != std::string::npos);
    CHECK(table.find("Support Vector Machines") != std::string::npos);
    CHECK(comparison_to_json(rows)["rows"].size() == 4);
  }
  SUBCASE("seed summary") {
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const auto s = across_seeds(ds, setup, seeds);
    CHECK(s.errors.size() == 3);
    CHECK(s.best <= s.mean);
    CHECK(s.mean <= s.worst);
  }
}

TEST_CASE("window sweep") {
  auto spec = default_synthetic_spec();
  spec.sessions = 3;
  const auto rec = generate_synthetic_subject(spec, 5);
  const auto sig = preprocess_subject(rec);
  EvalSetup setup;
  setup.method = Method::OutOfBag;
  setup.classifier.forest.n_trees = 30;
  const std::vector<std::size_t> sizes{16, 32, 64};
  const auto rows = window_sweep(sig.sessions, sizes, setup, {}, sig.rankings, 1);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].window == 16);
  CHECK(rows[0].six_class.setup.window == 16);
  CHECK(rows[1].binary.setup.binary);
  // Halving the window roughly doubles the instances.
  const double ratio = double(rows[0].six_class.instances) / double(rows[1].six_class.instances);
  CHECK(ratio >= 1.9);
  CHECK(ratio <= 2.2);
  CHECK(render_sweep(rows).find("64") != std::string::npos);

  const std::vector<std::size_t> huge{100000};
  CHECK_THROWS_AS(window_sweep(sig.sessions, huge, setup, {}, sig.rankings, 1), DatasetError);
  CHECK_THROWS_AS(window_sweep(sig.sessions, std::span<const std::size_t>{}, setup, {}, sig.rankings, 1),
                  ConfigError);
}

TEST_CASE("bundles round trip") {
  auto spec = default_synthetic_spec();
  spec.sessions = 2;
  const auto rec = generate_synthetic_subject(spec, 5);
  const auto rec2 = recordings_from_json(recordings_to_json(rec));
  CHECK(recordings_to_json(rec2) == recordings_to_json(rec));
  const auto sig = preprocess_subject(rec);
  const auto sig2 = signals_from_json(signals_to_json(sig));
  CHECK(signals_to_json(sig2) == signals_to_json(sig));
  CHECK_THROWS_AS(recordings_from_json(nlohmann::json{{"kind", "signals"}}), FormatError);
  CHECK_THROWS_AS(rankings_from_json(nlohmann::json{{"c", "high"}}), FormatError);
}
