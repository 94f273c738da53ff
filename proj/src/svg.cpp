#include "ctgca/svg.hpp"

#include <cstdio>

namespace ctgca {

namespace {

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c; break;
    }
  }
  return out;
}

SvgCanvas::SvgCanvas() = default;

void SvgCanvas::line(double x1, double y1, double x2, double y2,
                     const std::string& stroke, double width,
                     const std::string& dash) {
  body_ += "  <line x1=\"" + fmt2(x1) + "\" y1=\"" + fmt2(y1) + "\" x2=\"" +
           fmt2(x2) + "\" y2=\"" + fmt2(y2) + "\" stroke=\"" + stroke +
           "\" stroke-width=\"" + fmt2(width) + "\"";
  if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
  body_ += "/>\n";
}

void SvgCanvas::rect(double x, double y, double w, double h,
                     const std::string& fill, const std::string& stroke,
                     double stroke_width) {
  body_ += "  <rect x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" width=\"" +
           fmt2(w) + "\" height=\"" + fmt2(h) + "\" fill=\"" + fill + "\"";
  if (stroke != "none")
    body_ += " stroke=\"" + stroke + "\" stroke-width=\"" + fmt2(stroke_width) +
             "\"";
  body_ += "/>\n";
}

void SvgCanvas::circle(double cx, double cy, double r, const std::string& fill,
                       double opacity) {
  body_ += "  <circle cx=\"" + fmt2(cx) + "\" cy=\"" + fmt2(cy) + "\" r=\"" +
           fmt2(r) + "\" fill=\"" + fill + "\"";
  if (opacity < 1.0) body_ += " fill-opacity=\"" + fmt2(opacity) + "\"";
  body_ += "/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& s, double size,
                     const std::string& anchor, const std::string& fill,
                     double rotate_deg) {
  body_ += "  <text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) +
           "\" font-family=\"sans-serif\" font-size=\"" + fmt2(size) +
           "\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\"";
  if (rotate_deg != 0.0)
    body_ += " transform=\"rotate(" + fmt2(rotate_deg) + " " + fmt2(x) + " " +
             fmt2(y) + ")\"";
  body_ += ">" + xml_escape(s) + "</text>\n";
}

std::string SvgCanvas::finish() const {
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) +
         "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " +
         std::to_string(kHeight) + "\">\n";
  out += "  <rect x=\"0.00\" y=\"0.00\" width=\"" + fmt2(kWidth) +
         "\" height=\"" + fmt2(kHeight) + "\" fill=\"#ffffff\"/>\n";
  out += body_;
  out += "</svg>\n";
  return out;
}

}  // namespace ctgca
