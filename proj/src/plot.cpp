#include "vbrl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace vbrl::harness {
namespace {

constexpr double kLeft = 60.0, kRight = 140.0, kTop = 40.0, kBottom = 50.0;

const char* colour(LossKind k) {
  switch (k) {
    case LossKind::sq: return "#1f77b4";
    case LossKind::log: return "#d62728";
    case LossKind::cat: return "#2ca02c";
  }
  return "#000000";
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
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

template <class F>
std::string join(const std::vector<CiSummary>& series, F&& field) {
  std::string out;
  for (std::size_t i = 0; i < series.size(); ++i) out += (i ? "," : "") + num(field(series[i]));
  return out;
}

}  // namespace

void emit_plot(std::span<const CiSummary> summaries, std::ostream& os, const PlotOptions& opt) {
  if (summaries.empty()) throw std::invalid_argument("emit_plot: no summaries to plot");
  const double pw = opt.width - kLeft - kRight;
  const double ph = opt.height - kTop - kBottom;
  if (!(pw > 0.0 && ph > 0.0)) throw std::invalid_argument("emit_plot: canvas too small");

  std::map<LossKind, std::vector<CiSummary>> series;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : summaries) {
    if (s.n_episodes < 1) throw std::invalid_argument("emit_plot: dataset sizes must be positive");
    series[s.loss].push_back(s);
    lo = std::min(lo, std::log10(s.n_episodes));
    hi = std::max(hi, std::log10(s.n_episodes));
  }
  for (auto& [loss, v] : series) {
    std::sort(v.begin(), v.end(), [](const CiSummary& a, const CiSummary& b) { return a.n_episodes < b.n_episodes; });
  }
  const double span = hi > lo ? hi - lo : 1.0;
  const double base = hi > lo ? lo : lo - 0.5;
  auto x_of = [&](int n) { return (std::log10(n) - base) / span * pw; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kTop / 2 + 5
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << escape(opt.title)
     << "</text>\n";

  // Axes and ticks in ordinary SVG coordinates.
  const double x0 = kLeft, y0 = kTop + ph;
  os << "<g class=\"axes\" stroke=\"black\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 + pw << "\" y2=\"" << y0 << "\"/>\n";
  os << "<line x1=\"" << x0 << "\" y1=\"" << kTop << "\" x2=\"" << x0 << "\" y2=\"" << y0 << "\"/>\n";
  std::vector<int> sizes;
  for (const auto& s : summaries) sizes.push_back(s.n_episodes);
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  for (int n : sizes) {
    const double x = x0 + x_of(n);
    os << "<line x1=\"" << x << "\" y1=\"" << y0 << "\" x2=\"" << x << "\" y2=\"" << y0 + 5 << "\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\" stroke=\"none\">" << n
       << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    const double y = y0 - v * ph;
    os << "<line x1=\"" << x0 - 5 << "\" y1=\"" << y << "\" x2=\"" << x0 << "\" y2=\"" << y << "\"/>\n";
    os << "<text x=\"" << x0 - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\" stroke=\"none\">" << v
       << "</text>\n";
  }
  os << "<text x=\"" << x0 + pw / 2 << "\" y=\"" << y0 + 38
     << "\" text-anchor=\"middle\" stroke=\"none\">dataset size (episodes, log scale)</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\" stroke=\"none\">failure rate</text>\n";
  os << "</g>\n";

  // Data: y axis flipped so that y / height is the failure rate.
  os << "<g class=\"plot-area\" transform=\"translate(" << x0 << ',' << y0 << ") scale(1,-1)\" data-width=\""
     << num(pw) << "\" data-height=\"" << num(ph) << "\">\n";
  for (const auto& [loss, v] : series) {
    os << "<polygon class=\"band\" data-loss=\"" << loss_label(loss) << "\" data-n=\""
       << join(v, [](const CiSummary& s) { return s.n_episodes; }) << "\" data-lower=\""
       << join(v, [](const CiSummary& s) { return s.lower; }) << "\" data-upper=\""
       << join(v, [](const CiSummary& s) { return s.upper; }) << "\" fill=\"" << colour(loss)
       << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (const auto& s : v) os << num(x_of(s.n_episodes)) << ',' << num(s.upper * ph) << ' ';
    for (auto it = v.rbegin(); it != v.rend(); ++it) {
      os << num(x_of(it->n_episodes)) << ',' << num(it->lower * ph) << ' ';
    }
    os << "\"/>\n";
  }
  for (const auto& [loss, v] : series) {
    os << "<polyline class=\"series\" data-loss=\"" << loss_label(loss) << "\" data-n=\""
       << join(v, [](const CiSummary& s) { return s.n_episodes; }) << "\" data-mean=\""
       << join(v, [](const CiSummary& s) { return s.mean; }) << "\" fill=\"none\" stroke=\"" << colour(loss)
       << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < v.size(); ++i) {
      os << (i ? " " : "") << num(x_of(v[i].n_episodes)) << ',' << num(v[i].mean * ph);
    }
    os << "\"/>\n";
  }
  os << "</g>\n";

  // Legend.
  os << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  double ly = kTop + 10;
  for (const auto& [loss, v] : series) {
    os << "<line x1=\"" << x0 + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << x0 + pw + 40 << "\" y2=\"" << ly
       << "\" stroke=\"" << colour(loss) << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << x0 + pw + 46 << "\" y=\"" << ly + 4 << "\">" << loss_label(loss) << "</text>\n";
    ly += 20;
  }
  os << "<text x=\"" << x0 + pw + 15 << "\" y=\"" << ly + 4 << "\" font-size=\"10\">bands: 90% CI</text>\n";
  os << "</g>\n</svg>\n";
}

void emit_plot(std::span<const CiSummary> summaries, const std::filesystem::path& path,
               const PlotOptions& options) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  emit_plot(summaries, out, options);
}

}  // namespace vbrl::harness
