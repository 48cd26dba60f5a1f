#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace dirp {

// Small hand-rolled SVG writer; enough for line charts and step plots.
class SvgCanvas {
 public:
  SvgCanvas(double width, double height) : w_(width), h_(height) {}

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0) {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
          << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << num(width) << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double width = 1.5) {
    if (pts.empty()) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
          << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) body_ << ' ';
      body_ << num(pts[i].first) << ',' << num(pts[i].second);
    }
    body_ << "\"/>\n";
  }

  void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill,
               double opacity = 1.0) {
    if (pts.empty()) return;
    body_ << "<polygon fill=\"" << fill << "\" fill-opacity=\"" << num(opacity)
          << "\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) body_ << ' ';
      body_ << num(pts[i].first) << ',' << num(pts[i].second);
    }
    body_ << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            double opacity = 1.0) {
    body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
          << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\" fill-opacity=\""
          << num(opacity) << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, double size = 11.0,
            const std::string& anchor = "start") {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << escape(s)
          << "</text>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\""
        << num(h_) << "\" viewBox=\"0 0 " << num(w_) << ' ' << num(h_) << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << num(w_) << "\" height=\"" << num(h_)
        << "\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

  double width() const { return w_; }
  double height() const { return h_; }

  static std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
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

 private:
  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  double w_, h_;
  std::ostringstream body_;
};

// Maps data coordinates into a margin-inset plot area (y axis flipped).
struct PlotFrame {
  double width = 640, height = 400;
  double ml = 56, mr = 16, mt = 28, mb = 42;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const {
    const double span = x1 - x0 == 0 ? 1 : x1 - x0;
    return ml + (x - x0) / span * (width - ml - mr);
  }
  double py(double y) const {
    const double span = y1 - y0 == 0 ? 1 : y1 - y0;
    return height - mb - (y - y0) / span * (height - mt - mb);
  }

  void axes(SvgCanvas& svg, const std::string& xlabel, const std::string& ylabel,
            const std::string& title) const {
    svg.line(ml, height - mb, width - mr, height - mb, "#333");
    svg.line(ml, mt, ml, height - mb, "#333");
    for (int i = 0; i <= 4; ++i) {
      const double fx = x0 + (x1 - x0) * i / 4.0;
      const double fy = y0 + (y1 - y0) * i / 4.0;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", fx);
      svg.line(px(fx), height - mb, px(fx), height - mb + 4, "#333");
      svg.text(px(fx), height - mb + 16, buf, 10, "middle");
      std::snprintf(buf, sizeof buf, "%g", fy);
      svg.line(ml - 4, py(fy), ml, py(fy), "#333");
      svg.text(ml - 6, py(fy) + 3, buf, 10, "end");
    }
    svg.text((ml + width - mr) / 2, height - 8, xlabel, 11, "middle");
    svg.text(14, mt - 8, ylabel, 11, "start");
    svg.text((ml + width - mr) / 2, 16, title, 13, "middle");
  }
};

inline const std::vector<std::string>& plot_palette() {
  static const std::vector<std::string> v = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  return v;
}

}  // namespace dirp
