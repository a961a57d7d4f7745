#include "fairsoc/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fairsoc/errors.hpp"
#include "fairsoc/metrics.hpp"

namespace fairsoc {

namespace {

constexpr double kWidth = 820.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 30.0;
constexpr double kTop = 60.0;
constexpr double kBottom = 70.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v, int precision = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<double> prepared(const HistogramSeries& s, const HistogramOptions& options) {
  std::vector<double> v = s.values;
  if (!options.normalize_by_mean) return v;
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (mean > 0.0 && std::isfinite(mean)) {
    for (double& x : v) x /= mean;
  }
  return v;
}

}  // namespace

int sturges_bins(std::size_t n) {
  if (n == 0) throw StatisticError("sturges_bins: empty sample");
  return static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
}

HistogramLayout layout_histogram(std::span<const HistogramSeries> series,
                                 const HistogramOptions& options) {
  if (series.empty()) throw StatisticError("histogram: no samples");
  std::vector<std::vector<double>> data;
  std::size_t largest = 0;
  for (const HistogramSeries& s : series) {
    if (s.values.empty()) throw StatisticError("histogram: empty sample for '" + s.label + "'");
    for (double x : s.values) {
      if (!std::isfinite(x)) throw StatisticError("histogram: non-finite value in '" + s.label + "'");
    }
    data.push_back(prepared(s, options));
    largest = std::max(largest, s.values.size());
  }

  HistogramLayout out;
  out.bins = sturges_bins(largest);
  out.low = data.front().front();
  out.high = out.low;
  for (const auto& d : data) {
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    out.low = std::min(out.low, *lo);
    out.high = std::max(out.high, *hi);
  }
  if (!(out.high > out.low)) {
    const double pad = std::max(std::abs(out.low), 1.0) * 0.5;
    out.low -= pad;
    out.high += pad;
  }
  const double width = (out.high - out.low) / out.bins;
  for (std::size_t k = 0; k < data.size(); ++k) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(out.bins), 0);
    for (double x : data[k]) {
      auto b = static_cast<long>(std::floor((x - out.low) / width));
      b = std::clamp(b, 0L, static_cast<long>(out.bins) - 1);
      ++counts[static_cast<std::size_t>(b)];
    }
    out.counts.push_back(std::move(counts));
    try {
      out.skewness.emplace_back(skewness(series[k].values));
    } catch (const StatisticError&) {
      out.skewness.emplace_back(std::nullopt);
    }
  }
  return out;
}

std::string render_histogram_svg(std::span<const HistogramSeries> series,
                                 const HistogramOptions& options) {
  const HistogramLayout h = layout_histogram(series, options);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  // Bars show the fraction of each sample per bin so unequal sizes compare.
  std::vector<std::vector<double>> share(series.size());
  double top = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double n = static_cast<double>(series[k].values.size());
    for (std::size_t c : h.counts[k]) {
      share[k].push_back(static_cast<double>(c) / n);
      top = std::max(top, share[k].back());
    }
  }
  top = std::max(top, 1e-12) * 1.05;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth, 0) + "\" height=\"" +
         num(kHeight, 0) + "\" viewBox=\"0 0 " + num(kWidth, 0) + " " + num(kHeight, 0) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
         escape_xml(options.title) + "</text>\n";

  const double bar_w = plot_w / h.bins;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    svg += "<g class=\"series\" fill=\"" + std::string(color) + "\" fill-opacity=\"0.45\" stroke=\"" +
           color + "\">\n";
    for (int b = 0; b < h.bins; ++b) {
      const double v = share[k][static_cast<std::size_t>(b)];
      const double bh = plot_h * v / top;
      svg += "<rect x=\"" + num(kLeft + b * bar_w) + "\" y=\"" + num(kTop + plot_h - bh) +
             "\" width=\"" + num(bar_w) + "\" height=\"" + num(bh) + "\"/>\n";
    }
    svg += "</g>\n";
  }

  // Axes and ticks.
  svg += "<g stroke=\"black\" fill=\"none\">\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + plot_h) + "\" x2=\"" +
         num(kLeft + plot_w) + "\" y2=\"" + num(kTop + plot_h) + "\"/>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
         "\" y2=\"" + num(kTop + plot_h) + "\"/>\n";
  svg += "</g>\n";
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double fx = static_cast<double>(t) / ticks;
    const double x = kLeft + fx * plot_w;
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + plot_h + 18) +
           "\" text-anchor=\"middle\">" + tick_label(h.low + fx * (h.high - h.low)) + "</text>\n";
    const double y = kTop + plot_h - fx * plot_h;
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" +
           tick_label(fx * top) + "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(kHeight - 22) +
         "\" text-anchor=\"middle\">" +
         (options.normalize_by_mean ? "consumption / sample mean" : "consumption") + "</text>\n";
  svg += "<text transform=\"translate(18," + num(kTop + plot_h / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">fraction of agents</text>\n";

  // Legend with skewness annotations.
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(k);
    const double x = kLeft + plot_w - 250;
    const char* color = kColors[k % std::size(kColors)];
    const std::string skew = h.skewness[k] ? num(*h.skewness[k], 3) : std::string("undefined");
    svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y - 10) + "\" width=\"12\" height=\"12\" fill=\"" +
           color + "\" fill-opacity=\"0.45\" stroke=\"" + color + "\"/>\n";
    svg += "<text class=\"skewness\" x=\"" + num(x + 18) + "\" y=\"" + num(y) + "\">" +
           escape_xml(series[k].label) + " (n=" + std::to_string(series[k].values.size()) +
           ", skewness=" + skew + ")</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_histogram(std::span<const HistogramSeries> series, const std::string& path,
                    const HistogramOptions& options) {
  const std::string svg = render_histogram_svg(series, options);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << svg;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace fairsoc
