#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jointspar/bench.hpp"

namespace jointspar {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

double log_err(double rel_error) {
  return std::log10(std::max(rel_error, 1e-16));
}

// Affine map from data coordinates to one panel's pixel box (SVG y grows
// downward, data y grows upward).
struct PanelMap {
  double x0, x1, y_top, y_bot;       // pixel box
  double kmin, kmax, vmin, vmax;     // data ranges
  double px(double k) const {
    if (kmax == kmin) return 0.5 * (x0 + x1);
    return x0 + (k - kmin) / (kmax - kmin) * (x1 - x0);
  }
  double py(double v) const {
    if (vmax == vmin) return 0.5 * (y_top + y_bot);
    return y_bot - (v - vmin) / (vmax - vmin) * (y_bot - y_top);
  }
};

void draw_frame(std::ostringstream& os, const PanelMap& p,
                const std::vector<int>& k_ticks, const std::string& title) {
  os << "<rect x=\"" << num(p.x0) << "\" y=\"" << num(p.y_top) << "\" width=\""
     << num(p.x1 - p.x0) << "\" height=\"" << num(p.y_bot - p.y_top)
     << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  os << "<text x=\"" << num(0.5 * (p.x0 + p.x1)) << "\" y=\""
     << num(p.y_top - 12) << "\" text-anchor=\"middle\" font-size=\"14\">"
     << title << "</text>\n";

  const size_t stride = k_ticks.size() > 12 ? 2 : 1;
  for (size_t i = 0; i < k_ticks.size(); i += stride) {
    const double x = p.px(k_ticks[i]);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(p.y_bot) << "\" x2=\""
       << num(x) << "\" y2=\"" << num(p.y_bot + 4)
       << "\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << num(p.y_bot + 17)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << k_ticks[i]
       << "</text>\n";
  }
  os << "<text x=\"" << num(0.5 * (p.x0 + p.x1)) << "\" y=\""
     << num(p.y_bot + 34)
     << "\" text-anchor=\"middle\" font-size=\"12\">rows kept k</text>\n";

  const int dec_lo = static_cast<int>(std::ceil(p.vmin));
  const int dec_hi = static_cast<int>(std::floor(p.vmax));
  int dec_stride = 1;
  while ((dec_hi - dec_lo) / dec_stride > 8) ++dec_stride;
  for (int d = dec_lo; d <= dec_hi; d += dec_stride) {
    const double y = p.py(d);
    os << "<line x1=\"" << num(p.x0) << "\" y1=\"" << num(y) << "\" x2=\""
       << num(p.x1) << "\" y2=\"" << num(y)
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << num(p.x0 - 6) << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">1e" << d << "</text>\n";
  }
  os << "<text x=\"" << num(p.x0 - 48) << "\" y=\""
     << num(0.5 * (p.y_top + p.y_bot))
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 "
     << num(p.x0 - 48) << " " << num(0.5 * (p.y_top + p.y_bot))
     << ")\">relative error</text>\n";
}

void draw_marker(std::ostringstream& os, const std::string& method, double x,
                 double y) {
  if (method == "manifold") {
    os << "<path d=\"M " << num(x) << " " << num(y - 4.2) << " L "
       << num(x - 3.8) << " " << num(y + 2.6) << " L " << num(x + 3.8) << " "
       << num(y + 2.6)
       << " Z\" fill=\"#ff7f0e\" fill-opacity=\"0.7\" stroke=\"none\"/>\n";
  } else {
    os << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y)
       << "\" r=\"3\" fill=\"none\" stroke=\"#1f77b4\"/>\n";
  }
}

}  // namespace

void emit_plot(const std::vector<SummaryRow>& summary,
               const std::vector<SweepRecord>& records,
               const std::string& path) {
  require(!summary.empty(), "emit_plot: summary is empty");

  std::set<int> kset;
  std::set<std::string> methods;
  double vmin = 1e300, vmax = -1e300;
  for (const auto& s : summary) {
    kset.insert(s.k);
    methods.insert(s.method);
    vmin = std::min(vmin, log_err(s.median_rel_error));
    vmax = std::max(vmax, log_err(s.median_rel_error));
  }
  for (const auto& r : records) {
    kset.insert(r.k);
    vmin = std::min(vmin, log_err(r.rel_error));
    vmax = std::max(vmax, log_err(r.rel_error));
  }
  const std::vector<int> k_ticks(kset.begin(), kset.end());
  vmin = std::floor(vmin) - 0.3;
  vmax = std::ceil(vmax) + 0.3;
  if (vmax - vmin < 1.0) vmax = vmin + 1.0;

  const double kmin = k_ticks.front(), kmax = k_ticks.back();
  PanelMap left{70, 450, 50, 370, kmin, kmax, vmin, vmax};
  PanelMap right{560, 940, 50, 370, kmin, kmax, vmin, vmax};

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
        "width=\"980\" height=\"430\" viewBox=\"0 0 980 430\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"980\" height=\"430\" "
        "fill=\"#ffffff\"/>\n";

  draw_frame(os, left, k_ticks, "per-trial relative error");
  for (const auto& r : records)
    draw_marker(os, r.method, left.px(r.k), left.py(log_err(r.rel_error)));

  draw_frame(os, right, k_ticks, "median relative error");
  for (const auto& m : methods) {
    std::map<int, double> med;
    for (const auto& s : summary)
      if (s.method == m) med[s.k] = log_err(s.median_rel_error);
    os << "<polyline fill=\"none\" stroke=\""
       << (m == "manifold" ? "#ff7f0e" : "#1f77b4")
       << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [k, v] : med) {
      os << (first ? "" : " ") << num(right.px(k)) << ',' << num(right.py(v));
      first = false;
    }
    os << "\"/>\n";
    for (const auto& [k, v] : med)
      draw_marker(os, m, right.px(k), right.py(v));
  }

  double ly = left.y_top + 16;
  for (const auto& m : methods) {
    draw_marker(os, m, left.x1 - 80, ly - 4);
    os << "<text x=\"" << num(left.x1 - 70) << "\" y=\"" << num(ly)
       << "\" font-size=\"12\">" << m << "</text>\n";
    ly += 18;
  }

  os << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << os.str();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace jointspar
