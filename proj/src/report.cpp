#include "pinn/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace pinn {

void write_history_csv(const std::string& path, const RunHistory& history,
                       size_t term_count, bool with_error_bounds) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "iter,wall_s,loss,rel_l2";
  for (size_t i = 0; i < term_count; ++i) f << ",term" << i << "_loss";
  for (size_t i = 0; i < term_count; ++i) f << ",term" << i << "_weight";
  if (with_error_bounds)
    for (size_t i = 0; i < term_count; ++i) f << ",term" << i << "_errbound";
  f << "\n";
  char buf[48];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    f << buf;
  };
  for (const auto& row : history.rows) {
    f << row.iter;
    std::snprintf(buf, sizeof buf, ",%.6f", row.wall_s);
    f << buf;
    num(row.loss);
    num(row.rel_l2);
    for (double v : row.term_losses) num(v);
    for (double v : row.term_weights) num(v);
    if (with_error_bounds)
      for (double v : row.error_bounds) num(v);
    f << "\n";
  }
}

namespace {

struct Series {
  std::vector<double> x, y;
};

// One panel: polyline over the data with axis lines and a title.
void emit_panel(std::ofstream& f, const Series& s, double ox, const char* title,
                bool logy) {
  const double W = 360, H = 260, pad = 40;
  f << "<g transform=\"translate(" << ox << ",0)\">\n";
  f << "<text x=\"" << W / 2 << "\" y=\"16\" text-anchor=\"middle\" "
       "font-size=\"13\">" << title << "</text>\n";
  f << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - 10
    << "\" y2=\"" << H - pad << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << pad << "\" y1=\"20\" x2=\"" << pad << "\" y2=\"" << H - pad
    << "\" stroke=\"black\"/>\n";
  if (s.x.empty()) {
    f << "</g>\n";
    return;
  }
  std::vector<double> ys = s.y;
  if (logy)
    for (auto& v : ys) v = std::log10(std::max(v, 1e-300));
  double xmin = *std::min_element(s.x.begin(), s.x.end());
  double xmax = *std::max_element(s.x.begin(), s.x.end());
  double ymin = *std::min_element(ys.begin(), ys.end());
  double ymax = *std::max_element(ys.begin(), ys.end());
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  f << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.2\" points=\"";
  for (size_t i = 0; i < s.x.size(); ++i) {
    double px = pad + (s.x[i] - xmin) / (xmax - xmin) * (W - 10 - pad);
    double py = (H - pad) - (ys[i] - ymin) / (ymax - ymin) * (H - pad - 20);
    f << px << ',' << py << ' ';
  }
  f << "\"/>\n";
  char lab[64];
  std::snprintf(lab, sizeof lab, "%.3g", logy ? std::pow(10.0, ymin) : ymin);
  f << "<text x=\"4\" y=\"" << H - pad << "\" font-size=\"10\">" << lab << "</text>\n";
  std::snprintf(lab, sizeof lab, "%.3g", logy ? std::pow(10.0, ymax) : ymax);
  f << "<text x=\"4\" y=\"28\" font-size=\"10\">" << lab << "</text>\n";
  f << "</g>\n";
}

}  // namespace

void write_history_svg(const std::string& path, const RunHistory& history) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  Series loss_iter, loss_wall, err_iter;
  for (const auto& row : history.rows) {
    loss_iter.x.push_back(row.iter);
    loss_iter.y.push_back(row.loss);
    loss_wall.x.push_back(row.wall_s);
    loss_wall.y.push_back(row.loss);
    if (std::isfinite(row.rel_l2)) {
      err_iter.x.push_back(row.iter);
      err_iter.y.push_back(row.rel_l2);
    }
  }
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1100\" height=\"260\">\n";
  emit_panel(f, loss_iter, 0, "log10 loss vs iteration", true);
  emit_panel(f, loss_wall, 370, "log10 loss vs wall seconds", true);
  emit_panel(f, err_iter, 740, "log10 error vs iteration", true);
  f << "</svg>\n";
}

}  // namespace pinn
