#include "am2r/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace am2r {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
                          "#bcbd22", "#e377c2"};
constexpr int kPaletteSize = 10;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

struct Frame {
  int width, height;
  int ml = 62, mr = 16, mt = 34, mb = 46;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;  // data range (already log10 if log)
  bool logx = false, logy = false;

  double tx(double x) const {
    if (logx) x = std::log10(x);
    const double t = (x - x0) / (x1 - x0);
    return ml + t * (width - ml - mr);
  }
  double ty(double y) const {
    if (logy) y = std::log10(y);
    const double t = (y - y0) / (y1 - y0);
    return height - mb - t * (height - mt - mb);
  }
};

bool usable(double v, bool log) {
  return std::isfinite(v) && (!log || v > 0.0);
}

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double c = std::isfinite(lo) ? lo : 0.0;
    lo = c - 1.0;
    hi = c + 1.0;
    return;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step;
       t += step)
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  for (int e = static_cast<int>(std::ceil(lo)); e <= std::floor(hi); ++e)
    ticks.push_back(static_cast<double>(e));
  if (ticks.empty()) return linear_ticks(lo, hi);
  return ticks;
}

void open_doc(std::ostringstream& os, const PlotOptions& opt,
              const Frame& fr) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
     << "\" height=\"" << opt.height << "\" viewBox=\"0 0 " << opt.width
     << ' ' << opt.height << "\">\n";
  os << "<desc>xrange [" << fmt(fr.x0) << ", " << fmt(fr.x1) << "]"
     << (fr.logx ? " log10" : "") << "; yrange [" << fmt(fr.y0) << ", "
     << fmt(fr.y1) << "]" << (fr.logy ? " log10" : "") << "</desc>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    os << "<text x=\"" << opt.width / 2
       << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"14\">"
       << escape(opt.title) << "</text>\n";
}

void draw_axes(std::ostringstream& os, const PlotOptions& opt,
               const Frame& fr) {
  const double px0 = fr.ml, px1 = opt.width - fr.mr;
  const double py0 = opt.height - fr.mb, py1 = fr.mt;
  os << "<rect x=\"" << px0 << "\" y=\"" << py1 << "\" width=\"" << px1 - px0
     << "\" height=\"" << py0 - py1
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  const auto xticks = fr.logx ? log_ticks(fr.x0, fr.x1)
                              : linear_ticks(fr.x0, fr.x1);
  for (double t : xticks) {
    const double data = fr.logx ? std::pow(10.0, t) : t;
    const double x = fr.tx(data);
    if (x < px0 - 0.5 || x > px1 + 0.5) continue;
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << py0 << "\" x2=\"" << fmt(x)
       << "\" y2=\"" << py0 + 5
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << fmt(x) << "\" y=\"" << py0 + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << (fr.logx ? ("1e" + fmt(t)) : fmt(t)) << "</text>\n";
  }
  const auto yticks = fr.logy ? log_ticks(fr.y0, fr.y1)
                              : linear_ticks(fr.y0, fr.y1);
  for (double t : yticks) {
    const double data = fr.logy ? std::pow(10.0, t) : t;
    const double y = fr.ty(data);
    if (y < py1 - 0.5 || y > py0 + 0.5) continue;
    os << "<line x1=\"" << px0 - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << px0
       << "\" y2=\"" << fmt(y) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << px0 - 8 << "\" y=\"" << fmt(y + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << (fr.logy ? ("1e" + fmt(t)) : fmt(t)) << "</text>\n";
  }
  if (!opt.xlabel.empty())
    os << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << opt.height - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"12\">"
       << escape(opt.xlabel) << "</text>\n";
  if (!opt.ylabel.empty())
    os << "<text x=\"16\" y=\"" << (py0 + py1) / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"12\" transform=\"rotate(-90 16 "
       << (py0 + py1) / 2 << ")\">" << escape(opt.ylabel) << "</text>\n";
}

}  // namespace

double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty())
    throw std::invalid_argument("quantile: empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double pos = p * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

std::string line_plot_svg(const std::vector<Series>& series,
                          const PlotOptions& opt) {
  Frame fr;
  fr.width = opt.width;
  fr.height = opt.height;
  fr.logx = opt.logx;
  fr.logy = opt.logy;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], opt.logx) || !usable(s.y[i], opt.logy)) continue;
      const double px = opt.logx ? std::log10(s.x[i]) : s.x[i];
      const double py = opt.logy ? std::log10(s.y[i]) : s.y[i];
      x0 = std::min(x0, px);
      x1 = std::max(x1, px);
      y0 = std::min(y0, py);
      y1 = std::max(y1, py);
    }
  }
  if (x0 > x1) {
    x0 = y0 = 0.0;
    x1 = y1 = 1.0;
  }
  pad_range(x0, x1);
  pad_range(y0, y1);
  fr.x0 = x0;
  fr.x1 = x1;
  fr.y0 = y0;
  fr.y1 = y1;

  std::ostringstream os;
  open_doc(os, opt, fr);
  draw_axes(os, opt, fr);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % kPaletteSize];
    std::ostringstream pts;
    bool open = false;
    auto flush = [&]() {
      const std::string p = pts.str();
      if (open && !p.empty())
        os << "<polyline points=\"" << p
           << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.6\"/>\n";
      pts.str("");
      open = false;
    };
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], opt.logx) || !usable(s.y[i], opt.logy)) {
        flush();
        continue;
      }
      pts << fmt(fr.tx(s.x[i])) << ',' << fmt(fr.ty(s.y[i])) << ' ';
      open = true;
      os << "<circle cx=\"" << fmt(fr.tx(s.x[i])) << "\" cy=\""
         << fmt(fr.ty(s.y[i])) << "\" r=\"2.2\" fill=\"" << color << "\"/>\n";
    }
    flush();
    if (!s.label.empty()) {
      const double lx = opt.width - fr.mr - 8;
      const double ly = fr.mt + 16 + 15.0 * static_cast<double>(k);
      os << "<text x=\"" << fmt(lx) << "\" y=\"" << fmt(ly)
         << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
            "font-size=\"11\" fill=\""
         << color << "\">" << escape(s.label) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string heat_grid_svg(const std::vector<double>& xs,
                          const std::vector<double>& ys,
                          const std::vector<double>& values,
                          const PlotOptions& opt) {
  if (xs.empty() || ys.empty() || values.size() != xs.size() * ys.size())
    throw std::invalid_argument("heat grid: shape mismatch");
  double lo = 1e300, hi = -1e300;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo > hi) {
    lo = 0.0;
    hi = 1.0;
  }
  Frame fr;
  fr.width = opt.width;
  fr.height = opt.height;
  fr.x0 = -0.5;
  fr.x1 = static_cast<double>(xs.size()) - 0.5;
  fr.y0 = -0.5;
  fr.y1 = static_cast<double>(ys.size()) - 0.5;

  std::ostringstream os;
  open_doc(os, opt, fr);
  const double cw = (opt.width - fr.ml - fr.mr) / static_cast<double>(xs.size());
  const double ch =
      (opt.height - fr.mt - fr.mb) / static_cast<double>(ys.size());
  for (std::size_t j = 0; j < ys.size(); ++j) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double v = values[j * xs.size() + i];
      std::string fill = "#cccccc";
      if (std::isfinite(v)) {
        const double t = (hi > lo) ? (v - lo) / (hi - lo) : 0.5;
        const int r = static_cast<int>(68 + t * (253 - 68));
        const int g = static_cast<int>(1 + t * (231 - 1));
        const int b = static_cast<int>(84 + t * (37 - 84));
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
        fill = buf;
      }
      const double x = fr.ml + static_cast<double>(i) * cw;
      const double y =
          opt.height - fr.mb - static_cast<double>(j + 1) * ch;
      os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
         << fmt(cw) << "\" height=\"" << fmt(ch) << "\" fill=\"" << fill
         << "\" stroke=\"white\" stroke-width=\"0.5\"><title>"
         << fmt(xs[i]) << ", " << fmt(ys[j]) << ": " << fmt(v)
         << "</title></rect>\n";
    }
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
    os << "<text x=\"" << fmt(fr.ml + (static_cast<double>(i) + 0.5) * cw)
       << "\" y=\"" << opt.height - fr.mb + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"10\">"
       << fmt(xs[i]) << "</text>\n";
  for (std::size_t j = 0; j < ys.size(); ++j)
    os << "<text x=\"" << fr.ml - 6 << "\" y=\""
       << fmt(opt.height - fr.mb - (static_cast<double>(j) + 0.5) * ch + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"10\">"
       << fmt(ys[j]) << "</text>\n";
  os << "<text x=\"" << fr.ml << "\" y=\"" << opt.height - 8
     << "\" font-family=\"sans-serif\" font-size=\"11\">min " << fmt(lo)
     << "  max " << fmt(hi) << "</text>\n";
  if (!opt.xlabel.empty())
    os << "<text x=\"" << opt.width / 2 << "\" y=\"" << opt.height - 8
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"12\">"
       << escape(opt.xlabel) << "</text>\n";
  if (!opt.ylabel.empty())
    os << "<text x=\"14\" y=\"" << opt.height / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"12\" transform=\"rotate(-90 14 "
       << opt.height / 2 << ")\">" << escape(opt.ylabel) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string letter_value_svg(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups,
    const PlotOptions& opt) {
  if (groups.empty())
    throw std::invalid_argument("letter values: no groups");
  double lo = 1e300, hi = -1e300;
  std::vector<std::vector<double>> sorted;
  for (const auto& [label, data] : groups) {
    (void)label;
    std::vector<double> s;
    for (double v : data)
      if (std::isfinite(v)) s.push_back(v);
    std::sort(s.begin(), s.end());
    if (!s.empty()) {
      lo = std::min(lo, s.front());
      hi = std::max(hi, s.back());
    }
    sorted.push_back(std::move(s));
  }
  if (lo > hi) {
    lo = 0.0;
    hi = 1.0;
  }
  pad_range(lo, hi);
  Frame fr;
  fr.width = opt.width;
  fr.height = opt.height;
  fr.x0 = -0.5;
  fr.x1 = static_cast<double>(groups.size()) - 0.5;
  fr.y0 = lo;
  fr.y1 = hi;

  std::ostringstream os;
  open_doc(os, opt, fr);
  const double px0 = fr.ml, px1 = opt.width - fr.mr;
  const double py0 = opt.height - fr.mb, py1 = fr.mt;
  os << "<rect x=\"" << px0 << "\" y=\"" << py1 << "\" width=\"" << px1 - px0
     << "\" height=\"" << py0 - py1
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (double t : linear_ticks(lo, hi)) {
    const double y = fr.ty(t);
    if (y < py1 - 0.5 || y > py0 + 0.5) continue;
    os << "<line x1=\"" << px0 - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << px0
       << "\" y2=\"" << fmt(y) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << px0 - 8 << "\" y=\"" << fmt(y + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt(t) << "</text>\n";
  }
  const double slot = (px1 - px0) / static_cast<double>(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& data = sorted[g];
    const double cx = px0 + (static_cast<double>(g) + 0.5) * slot;
    os << "<text x=\"" << fmt(cx) << "\" y=\"" << py0 + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"10\">"
       << escape(groups[g].first) << "</text>\n";
    if (data.empty()) continue;
    const char* color = kPalette[g % kPaletteSize];
    double w = slot * 0.8;
    double depth = 0.25;
    int level = 0;
    while (static_cast<double>(data.size()) * depth >= 1.0 && level < 8) {
      const double qlo = sorted_quantile(data, depth);
      const double qhi = sorted_quantile(data, 1.0 - depth);
      const double ytop = fr.ty(qhi), ybot = fr.ty(qlo);
      os << "<rect x=\"" << fmt(cx - w / 2) << "\" y=\"" << fmt(ytop)
         << "\" width=\"" << fmt(w) << "\" height=\""
         << fmt(std::max(1.0, ybot - ytop)) << "\" fill=\"" << color
         << "\" fill-opacity=\"" << fmt(0.25 + 0.12 * level)
         << "\" stroke=\"" << color << "\" stroke-width=\"0.6\"/>\n";
      w *= 0.72;
      depth *= 0.5;
      ++level;
    }
    const double med = fr.ty(sorted_quantile(data, 0.5));
    os << "<line x1=\"" << fmt(cx - slot * 0.4) << "\" y1=\"" << fmt(med)
       << "\" x2=\"" << fmt(cx + slot * 0.4) << "\" y2=\"" << fmt(med)
       << "\" stroke=\"black\" stroke-width=\"1.8\"/>\n";
  }
  if (!opt.ylabel.empty())
    os << "<text x=\"16\" y=\"" << (py0 + py1) / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"12\" transform=\"rotate(-90 16 "
       << (py0 + py1) / 2 << ")\">" << escape(opt.ylabel) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_svg_file(const std::string& path, const std::string& svg) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("svg: cannot open " + path);
  os << svg;
  if (!os) throw std::runtime_error("svg: write failed: " + path);
}

}  // namespace am2r
