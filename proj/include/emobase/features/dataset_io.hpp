#pragma once

#include "emobase/features/features.hpp"

#include <iosfwd>

namespace emobase::features {

// Header: session_id,window_start_s,label,clip_id,<17 feature columns>.
// All 17 features are always written; the mask is not part of the file and
// read_dataset_csv returns a dataset with the full mask.
void write_dataset_csv(std::ostream& out, const Dataset& dataset);
Dataset read_dataset_csv(std::istream& in);

std::string dataset_csv_header();

}  // namespace emobase::features
