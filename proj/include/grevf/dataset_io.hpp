#pragma once

#include <string>
#include <utility>
#include <vector>

#include "grevf/exact_gre.hpp"

namespace grevf {

/// Loads observations from a CSV whose header starts with "x," — the second
/// column supplies the targets and any further columns are ignored, so
/// predictions emitted by a run (x,mean,variance[,method]) re-ingest cleanly.
/// LF and CRLF both accepted.
Dataset load_dataset(const std::string& path, const Interval& domain,
                     double noise_variance);

/// Two-column table x,g sorted by x; linear interpolation between rows and
/// zero outside the tabulated range.
RealFn load_feature_table(const std::string& path);

/// Rows of the prediction table, one method label per row.
struct PredictionRow {
  double x;
  double mean;
  double variance;
  std::string method;
};

void write_predictions_csv(const std::vector<PredictionRow>& rows,
                           const std::string& path, bool include_method);

}  // namespace grevf
