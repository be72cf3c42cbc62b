#include "homog/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace homog {

std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

void write_report_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "epsilon,h,err_h1,err_l2,energy_fine,energy_hom,energy_gap,weak_gap,newton_iters,seconds\n";
  for (const auto& r : report.records) {
    os << fmt_double(r.epsilon) << ',' << fmt_double(r.h) << ',' << fmt_double(r.err_h1) << ','
       << fmt_double(r.err_l2) << ',' << fmt_double(r.energy_fine) << ','
       << fmt_double(r.energy_hom) << ',' << fmt_double(r.energy_gap) << ','
       << fmt_double(r.weak_gap) << ',' << r.newton_iters << ','
       << fmt_double(r.seconds_estimate) << '\n';
  }
}

ConvergenceReport read_report_csv(std::istream& in) {
  ConvergenceReport report;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream iss(line);
    SweepRecord r;
    iss >> r.epsilon >> r.h >> r.err_h1 >> r.err_l2 >> r.energy_fine >> r.energy_hom >>
        r.energy_gap >> r.weak_gap >> r.newton_iters >> r.seconds_estimate;
    if (!iss) throw std::runtime_error("malformed csv row: " + line);
    report.records.push_back(r);
  }
  return report;
}

namespace {

struct PlotSeries {
  std::vector<std::pair<double, double>> points;  // (eps, value)
  const RateFit* fit;
  const char* color;
  const char* label;
};

}  // namespace

void write_report_svg(std::ostream& os, const ConvergenceReport& report) {
  const int width = 640, height = 480;
  const int ml = 70, mr = 20, mt = 30, mb = 50;

  std::vector<PlotSeries> series;
  PlotSeries h1{{}, report.h1_fit ? &*report.h1_fit : nullptr, "#1f77b4", "H1 error"};
  PlotSeries en{{}, report.energy_fit ? &*report.energy_fit : nullptr, "#d62728", "energy gap"};
  for (const auto& r : report.records) {
    if (r.err_h1 > 0.0) h1.points.emplace_back(r.epsilon, r.err_h1);
    if (r.energy_gap > 0.0) en.points.emplace_back(r.epsilon, r.energy_gap);
  }
  if (!h1.points.empty()) series.push_back(h1);
  if (!en.points.empty()) series.push_back(en);

  double lx0 = 0.0, lx1 = 0.0, ly0 = 0.0, ly1 = 0.0;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      const double lx = std::log10(x), ly = std::log10(y);
      if (first) {
        lx0 = lx1 = lx;
        ly0 = ly1 = ly;
        first = false;
      }
      lx0 = std::min(lx0, lx); lx1 = std::max(lx1, lx);
      ly0 = std::min(ly0, ly); ly1 = std::max(ly1, ly);
    }
  }
  if (first) {  // nothing to plot
    lx0 = -2.0; lx1 = 0.0; ly0 = -2.0; ly1 = 0.0;
  }
  lx0 -= 0.1; lx1 += 0.1;
  ly0 -= 0.2; ly1 += 0.2;

  auto px = [&](double lx) { return ml + (lx - lx0) / (lx1 - lx0) * (width - ml - mr); };
  auto py = [&](double ly) { return height - mb - (ly - ly0) / (ly1 - ly0) * (height - mt - mb); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
     << "corrector errors vs epsilon (log-log)</text>\n";

  // Axes with decade ticks.
  os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
     << height - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
     << "\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(lx0)); d <= static_cast<int>(std::floor(lx1)); ++d) {
    const double x = px(d);
    os << "<line x1=\"" << fmt_double(x) << "\" y1=\"" << height - mb << "\" x2=\"" << fmt_double(x)
       << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt_double(x) << "\" y=\"" << height - mb + 20
       << "\" text-anchor=\"middle\" font-size=\"11\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ly0)); d <= static_cast<int>(std::floor(ly1)); ++d) {
    const double y = py(d);
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt_double(y) << "\" x2=\"" << ml << "\" y2=\""
       << fmt_double(y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << fmt_double(y + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">1e" << d << "</text>\n";
  }
  os << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">epsilon</text>\n";

  int legend_y = mt + 10;
  for (const auto& s : series) {
    if (s.fit) {
      const double yl0 = s.fit->rate * std::log(std::pow(10.0, lx0 + 0.05)) + s.fit->intercept;
      const double yl1 = s.fit->rate * std::log(std::pow(10.0, lx1 - 0.05)) + s.fit->intercept;
      os << "<line x1=\"" << fmt_double(px(lx0 + 0.05)) << "\" y1=\""
         << fmt_double(py(yl0 / std::log(10.0))) << "\" x2=\"" << fmt_double(px(lx1 - 0.05))
         << "\" y2=\"" << fmt_double(py(yl1 / std::log(10.0))) << "\" stroke=\"" << s.color
         << "\" stroke-dasharray=\"5 3\"/>\n";
    }
    for (const auto& [x, y] : s.points) {
      os << "<circle cx=\"" << fmt_double(px(std::log10(x))) << "\" cy=\""
         << fmt_double(py(std::log10(y))) << "\" r=\"4\" fill=\"" << s.color << "\"/>\n";
    }
    os << "<circle cx=\"" << width - 180 << "\" cy=\"" << legend_y << "\" r=\"4\" fill=\""
       << s.color << "\"/>\n";
    os << "<text x=\"" << width - 170 << "\" y=\"" << legend_y + 4 << "\" font-size=\"12\">"
       << s.label;
    if (s.fit) os << " (rate " << fmt_double(std::round(s.fit->rate * 1000.0) / 1000.0) << ")";
    os << "</text>\n";
    legend_y += 18;
  }
  os << "</svg>\n";
}

}  // namespace homog
