#include "sadq/diag/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "sadq/common/error.hpp"
#include "sadq/diag/metrics.hpp"

namespace sadq {

Band aggregate_band(const std::vector<std::string>& files, const std::string& key, const std::string& x_key) {
  if (files.empty()) fail(ErrorKind::kEmptyVector, "no metrics files for series");
  std::map<double, std::vector<double>> by_x;
  std::map<double, std::size_t> seen;
  for (const auto& f : files) {
    const CsvTable t = read_csv(f);
    const auto xs = t.values(x_key);
    const auto ys = t.values(key);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ++seen[xs[i]];
      if (std::isfinite(ys[i])) by_x[xs[i]].push_back(ys[i]);
    }
  }
  Band b;
  for (const auto& [x, ys] : by_x) {
    if (seen[x] != files.size() || ys.empty()) continue;
    double sum = 0.0;
    for (double y : ys) sum += y;
    b.x.push_back(x);
    b.mean.push_back(sum / static_cast<double>(ys.size()));
    b.lo.push_back(*std::min_element(ys.begin(), ys.end()));
    b.hi.push_back(*std::max_element(ys.begin(), ys.end()));
  }
  return b;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_plot(const std::vector<PlotSeries>& series, const std::vector<std::string>& keys,
                        const PlotOptions& opt) {
  if (series.empty() || keys.empty()) fail(ErrorKind::kEmptyVector, "plot needs at least one series and one key");
  const double left = 70, right = 160, top = 36, bottom = 40;
  const double w = opt.width;
  const double ph = opt.panel_height;
  const double total_h = ph * static_cast<double>(keys.size()) + (opt.title.empty() ? 0 : 24);
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(total_h) +
                    "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" "
                    "fill=\"white\"/>\n";
  double y0 = 0;
  if (!opt.title.empty()) {
    svg += "<text x=\"" + num(w / 2) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" + escape(opt.title) +
           "</text>\n";
    y0 = 24;
  }

  for (const auto& key : keys) {
    std::vector<Band> bands;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
      Band b = aggregate_band(s.files, key, opt.x_key);
      for (std::size_t i = 0; i < b.x.size(); ++i) {
        if (opt.log_scale) {
          if (!(b.lo[i] > 0.0)) continue;
        }
        xmin = std::min(xmin, b.x[i]);
        xmax = std::max(xmax, b.x[i]);
        ymin = std::min(ymin, b.lo[i]);
        ymax = std::max(ymax, b.hi[i]);
      }
      bands.push_back(std::move(b));
    }
    const double px0 = left, px1 = w - right, py0 = y0 + top, py1 = y0 + ph - bottom;
    svg += "<text x=\"" + num(px0) + "\" y=\"" + num(y0 + 22) + "\" font-size=\"13\">" + escape(key) +
           (opt.log_scale ? " (log scale)" : "") + "</text>\n";
    svg += "<rect x=\"" + num(px0) + "\" y=\"" + num(py0) + "\" width=\"" + num(px1 - px0) + "\" height=\"" +
           num(py1 - py0) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    if (!std::isfinite(xmin)) {
      svg += "<text x=\"" + num((px0 + px1) / 2) + "\" y=\"" + num((py0 + py1) / 2) +
             "\" text-anchor=\"middle\">no data</text>\n";
      y0 += ph;
      continue;
    }
    const auto ty = [&](double v) { return opt.log_scale ? std::log10(v) : v; };
    double lo = ty(ymin), hi = ty(ymax);
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    const auto sx = [&](double x) { return px0 + (x - xmin) / (xmax - xmin) * (px1 - px0); };
    const auto sy = [&](double v) { return py1 - (ty(v) - lo) / (hi - lo) * (py1 - py0); };

    for (int i = 0; i <= 4; ++i) {
      const double f = i / 4.0;
      const double yv = opt.log_scale ? std::pow(10.0, lo + f * (hi - lo)) : lo + f * (hi - lo);
      const double yp = py1 - f * (py1 - py0);
      svg += "<line x1=\"" + num(px0 - 4) + "\" x2=\"" + num(px0) + "\" y1=\"" + num(yp) + "\" y2=\"" + num(yp) +
             "\" stroke=\"#444\"/><text x=\"" + num(px0 - 6) + "\" y=\"" + num(yp + 4) +
             "\" text-anchor=\"end\">" + tick_label(yv) + "</text>\n";
      const double xv = xmin + f * (xmax - xmin);
      const double xp = sx(xv);
      svg += "<line x1=\"" + num(xp) + "\" x2=\"" + num(xp) + "\" y1=\"" + num(py1) + "\" y2=\"" + num(py1 + 4) +
             "\" stroke=\"#444\"/><text x=\"" + num(xp) + "\" y=\"" + num(py1 + 16) +
             "\" text-anchor=\"middle\">" + tick_label(xv) + "</text>\n";
    }
    svg += "<text x=\"" + num((px0 + px1) / 2) + "\" y=\"" + num(py1 + 32) + "\" text-anchor=\"middle\">" +
           escape(opt.x_key) + "</text>\n";

    for (std::size_t k = 0; k < bands.size(); ++k) {
      const Band& b = bands[k];
      const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < b.x.size(); ++i) {
        if (!opt.log_scale || b.lo[i] > 0.0) idx.push_back(i);
      }
      if (idx.empty()) continue;
      if (series[k].files.size() > 1) {
        std::string poly;
        for (auto i : idx) poly += num(sx(b.x[i])) + "," + num(sy(b.hi[i])) + " ";
        for (auto it = idx.rbegin(); it != idx.rend(); ++it) poly += num(sx(b.x[*it])) + "," + num(sy(b.lo[*it])) + " ";
        svg += "<polygon points=\"" + poly + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
      }
      std::string line;
      for (auto i : idx) line += num(sx(b.x[i])) + "," + num(sy(b.mean[i])) + " ";
      svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.6\"/>\n";
      const double ly = py0 + 14 + 16 * static_cast<double>(k);
      svg += "<line x1=\"" + num(px1 + 10) + "\" x2=\"" + num(px1 + 28) + "\" y1=\"" + num(ly - 4) + "\" y2=\"" +
             num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/><text x=\"" + num(px1 + 32) + "\" y=\"" +
             num(ly) + "\">" + escape(series[k].label) + "</text>\n";
    }
    y0 += ph;
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const std::vector<PlotSeries>& series, const std::vector<std::string>& keys, const std::string& path,
               const PlotOptions& options) {
  const std::string svg = render_plot(series, keys, options);
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write plot " + path);
  out << svg;
  if (!out) fail(ErrorKind::kIoError, "write failed on plot " + path);
}

}  // namespace sadq
