#include "deid/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace deid::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Canvas {
 public:
  Canvas(double width, double height) : width_(width), height_(height) {}

  void line(double x1, double y1, double x2, double y2, const std::string& style) {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
          << "\" y2=\"" << num(y2) << "\" " << style << "/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& style) {
    body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
          << "\" height=\"" << num(h) << "\" " << style << "/>\n";
  }
  void circle(double cx, double cy, double r, const std::string& style) {
    body_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r) << "\" "
          << style << "/>\n";
  }
  void text(double x, double y, const std::string& s, const std::string& style = "") {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" "
          << "font-size=\"11\"" << (style.empty() ? "" : " " + style) << ">" << escape(s)
          << "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& style) {
    body_ << "<polyline points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      body_ << (i ? " " : "") << num(pts[i].first) << "," << num(pts[i].second);
    body_ << "\" fill=\"none\" " << style << "/>\n";
  }
  void open_group(const std::string& attrs) { body_ << "<g " << attrs << ">\n"; }
  void close_group() { body_ << "</g>\n"; }

  std::string str() const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\""
        << num(height_) << "\" viewBox=\"0 0 " << num(width_) << " " << num(height_) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double width_, height_;
  std::ostringstream body_;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

// Bar chart of a 100-bin histogram in the box (x, y, w, h), heights scaled to
// the panel's own maximum.
void histogram_panel(Canvas& c, const Histogram& hist, double x, double y, double w, double h,
                     const std::string& color) {
  c.rect(x, y, w, h, "fill=\"none\" stroke=\"#888\"");
  const std::size_t peak = *std::max_element(hist.counts.begin(), hist.counts.end());
  if (peak == 0) return;
  const double bar = w / Histogram::kBins;
  for (std::size_t i = 0; i < Histogram::kBins; ++i) {
    if (hist.counts[i] == 0) continue;
    const double bh = h * static_cast<double>(hist.counts[i]) / static_cast<double>(peak);
    c.rect(x + i * bar, y + h - bh, bar, bh, "fill=\"" + color + "\"");
  }
}

}  // namespace

std::string roc_curve(const RocCurve& roc) {
  constexpr double kSize = 300, kMargin = 50;
  Canvas c(kSize + 2 * kMargin, kSize + 2 * kMargin);
  auto px = [&](double far) { return kMargin + far * kSize; };
  auto py = [&](double tar) { return kMargin + (1.0 - tar) * kSize; };
  c.rect(kMargin, kMargin, kSize, kSize, "fill=\"none\" stroke=\"black\"");
  c.line(px(0), py(0), px(1), py(1), "stroke=\"#bbb\" stroke-dasharray=\"4 4\"");
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    c.text(px(t) - 8, py(0) + 16, num(t));
    c.text(px(0) - 34, py(t) + 4, num(t));
  }
  c.text(kMargin + kSize / 2 - 60, kSize + 2 * kMargin - 8, "false acceptance rate");
  c.text(12, kMargin - 12, "true acceptance rate");
  std::vector<std::pair<double, double>> pts;
  for (const RocPoint& p : roc.points) pts.emplace_back(px(p.far), py(p.tar));
  c.polyline(pts, "class=\"roc\" stroke=\"#1f77b4\" stroke-width=\"2\"");
  char label[64];
  std::snprintf(label, sizeof label, "AUC = %.6f", roc.auc);
  c.text(px(0.45), py(0.1), label, "class=\"auc\"");
  return c.str();
}

std::string oks_histograms(const std::vector<MethodEval>& methods) {
  constexpr double kW = 300, kH = 140, kMargin = 40;
  const double height = kMargin + methods.size() * (kH + kMargin);
  Canvas c(kW + 2 * kMargin, std::max(height, 2 * kMargin));
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const double y = kMargin + m * (kH + kMargin);
    c.open_group("class=\"panel\"");
    c.text(kMargin, y - 8, "image OKS: " + methods[m].method);
    histogram_panel(c, methods[m].summary.oks_histogram, kMargin, y, kW, kH,
                    kPalette[m % std::size(kPalette)]);
    c.text(kMargin - 4, y + kH + 14, "0");
    c.text(kMargin + kW - 8, y + kH + 14, "1");
    c.close_group();
  }
  return c.str();
}

std::string keypoint_histograms(const std::string& method, const KeypointHistograms& hist) {
  constexpr int kCols = 5;
  constexpr double kW = 160, kH = 90, kGap = 30, kTop = 40;
  const int rows = static_cast<int>((kCocoKeypoints + kCols - 1) / kCols);
  Canvas c(kCols * (kW + kGap) + kGap, kTop + rows * (kH + kGap) + kGap);
  c.text(kGap, 20, "keypoint similarity: " + method);
  for (std::size_t i = 0; i < kCocoKeypoints; ++i) {
    const double x = kGap + (i % kCols) * (kW + kGap);
    const double y = kTop + (i / kCols) * (kH + kGap);
    c.open_group("class=\"panel\"");
    c.text(x, y - 6, std::string(kCocoKeypointNames[i]) + " (n=" +
                         std::to_string(hist[i].total()) + ")");
    histogram_panel(c, hist[i], x, y, kW, kH, is_head_keypoint(i) ? "#d62728" : "#1f77b4");
    c.close_group();
  }
  return c.str();
}

std::string embedding(const std::vector<EmbeddedDescriptor>& points) {
  constexpr double kSize = 360, kMargin = 40, kLegend = 140;
  Canvas c(kSize + 2 * kMargin + kLegend, kSize + 2 * kMargin);
  if (points.empty()) return c.str();
  double min_x = points[0].point[0], max_x = min_x, min_y = points[0].point[1], max_y = min_y;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.point[0]);
    max_x = std::max(max_x, p.point[0]);
    min_y = std::min(min_y, p.point[1]);
    max_y = std::max(max_y, p.point[1]);
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
  std::map<std::string, std::string> colors;
  for (const auto& p : points)
    if (!colors.count(p.subset)) colors[p.subset] = "";
  std::size_t k = 0;
  for (auto& [subset, color] : colors) color = kPalette[k++ % std::size(kPalette)];

  c.rect(kMargin, kMargin, kSize, kSize, "fill=\"none\" stroke=\"black\"");
  for (const auto& p : points) {
    const double x = kMargin + (p.point[0] - min_x) / span * kSize;
    const double y = kMargin + kSize - (p.point[1] - min_y) / span * kSize;
    c.circle(x, y, 2.0, "fill=\"" + colors[p.subset] + "\" fill-opacity=\"0.6\"");
  }
  double ly = kMargin + 10;
  for (const auto& [subset, color] : colors) {
    c.circle(kSize + 2 * kMargin + 8, ly - 4, 4.0, "fill=\"" + color + "\"");
    c.text(kSize + 2 * kMargin + 18, ly, subset);
    ly += 18;
  }
  c.text(kMargin, kMargin - 12, "descriptor embedding (first two principal components)");
  return c.str();
}

}  // namespace deid::svg
