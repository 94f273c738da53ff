#pragma once

#include <string>

namespace ctgca {

// Minimal deterministic SVG writer for the report figures. Every coordinate
// is emitted with two decimals so identical inputs give identical bytes; text
// is XML-escaped. The canvas is fixed at 800x600 for all figures.
class SvgCanvas {
 public:
  static constexpr int kWidth = 800;
  static constexpr int kHeight = 600;

  SvgCanvas();

  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke, double width = 1.0,
            const std::string& dash = "");
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "none", double stroke_width = 1.0);
  void circle(double cx, double cy, double r, const std::string& fill,
              double opacity = 1.0);
  // anchor: "start", "middle" or "end"; rotate_deg spins around (x, y).
  void text(double x, double y, const std::string& s, double size = 12.0,
            const std::string& anchor = "start",
            const std::string& fill = "#000000", double rotate_deg = 0.0);

  // Complete document (XML declaration, white background, all elements).
  std::string finish() const;

 private:
  std::string body_;
};

std::string xml_escape(const std::string& s);

}  // namespace ctgca
