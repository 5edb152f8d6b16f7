#include "emobase/features/dataset_io.hpp"

#include "emobase/errors.hpp"
#include "emobase/signal/recording_io.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace emobase::features {

using signal::format_double;
using signal::parse_double;

std::string dataset_csv_header() {
  std::string h = "session_id,window_start_s,label,clip_id";
  for (auto f : all_features()) {
    h += ',';
    h += feature_name(f);
  }
  return h;
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
  out << dataset_csv_header() << '\n';
  for (const auto& inst : dataset.instances) {
    out << inst.session_id << ',' << format_double(inst.window_start_s) << ','
        << code_of(inst.label) << ',' << inst.clip_id.value_or("");
    for (double v : inst.features) out << ',' << format_double(v);
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != dataset_csv_header()) throw FormatError("unexpected dataset CSV header");

  Dataset ds;
  ds.mask = full_mask();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 4 + kFeatureCount) {
      throw FormatError("dataset CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(4 + kFeatureCount) + " fields");
    }
    LabeledInstance inst;
    inst.session_id = fields[0];
    inst.window_start_s = parse_double(fields[1]);
    inst.label = parse_emotion(fields[2]);
    if (!fields[3].empty()) inst.clip_id = fields[3];
    for (std::size_t k = 0; k < kFeatureCount; ++k) inst.features[k] = parse_double(fields[4 + k]);
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

}  // namespace emobase::features
