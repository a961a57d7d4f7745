#pragma once

// SVG histogram overlaying two consumption samples.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fairsoc {

struct HistogramSeries {
  std::string label;
  std::vector<double> values;
};

struct HistogramOptions {
  /// Divide each sample by its own mean before binning (skipped when the
  /// mean is not positive). Skewness is unaffected.
  bool normalize_by_mean = true;
  std::string title = "Consumption in one generation";
};

/// Sturges' rule: ceil(log2 n) + 1. Throws StatisticError for n == 0.
int sturges_bins(std::size_t n);

struct HistogramLayout {
  double low = 0.0;
  double high = 0.0;
  int bins = 0;
  std::vector<std::vector<std::size_t>> counts;  // one row per series
  std::vector<std::optional<double>> skewness;   // nullopt when undefined
};

/// Shared bins over both series. Throws StatisticError for an empty series.
HistogramLayout layout_histogram(std::span<const HistogramSeries> series,
                                 const HistogramOptions& options = {});

/// Renders the SVG document.
std::string render_histogram_svg(std::span<const HistogramSeries> series,
                                 const HistogramOptions& options = {});

/// Writes render_histogram_svg() to `path`. Throws IoError on failure.
void emit_histogram(std::span<const HistogramSeries> series, const std::string& path,
                    const HistogramOptions& options = {});

}  // namespace fairsoc
