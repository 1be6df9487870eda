#include "bootroute/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bootroute {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
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

struct Range {
  double lo, hi;
  double span() const { return hi - lo; }
};

Range padded_range(double lo, double hi) {
  if (lo == hi) {
    double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    return {lo - pad, hi + pad};
  }
  double pad = (hi - lo) * 0.08;
  return {lo - pad, hi + pad};
}

std::string render_svg(const std::vector<ParetoPoint>& points,
                       const std::vector<ParetoPoint>& frontier) {
  constexpr int kWidth = 640;
  constexpr int kHeight = 440;
  constexpr int kLeft = 70;
  constexpr int kRight = 20;
  constexpr int kTop = 30;
  constexpr int kBottom = 55;

  double cost_lo = points[0].cost, cost_hi = points[0].cost;
  double score_lo = points[0].score, score_hi = points[0].score;
  for (const auto& p : points) {
    cost_lo = std::min(cost_lo, p.cost);
    cost_hi = std::max(cost_hi, p.cost);
    score_lo = std::min(score_lo, p.score);
    score_hi = std::max(score_hi, p.score);
  }
  Range x = padded_range(cost_lo, cost_hi);
  Range y = padded_range(score_lo, score_hi);

  auto px = [&](double cost) {
    return kLeft + (cost - x.lo) / x.span() * (kWidth - kLeft - kRight);
  };
  auto py = [&](double score) {
    return kHeight - kBottom - (score - y.lo) / y.span() * (kHeight - kTop - kBottom);
  };

  std::set<std::string> frontier_labels;
  for (const auto& p : frontier) frontier_labels.insert(p.label);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "  <text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">score vs cost</text>\n";

  // axes with 5 ticks each
  svg << "  <g stroke=\"#444\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg << "    <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kHeight - kBottom << "\"/>\n";
  svg << "    <line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << kHeight - kBottom << "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double cost = x.lo + x.span() * i / 4.0;
    double score = y.lo + y.span() * i / 4.0;
    svg << "    <line x1=\"" << fmt(px(cost)) << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
        << fmt(px(cost)) << "\" y2=\"" << kHeight - kBottom + 5 << "\"/>\n";
    svg << "    <text x=\"" << fmt(px(cost)) << "\" y=\"" << kHeight - kBottom + 18
        << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#444\">" << fmt(cost)
        << "</text>\n";
    svg << "    <line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(py(score)) << "\" x2=\"" << kLeft
        << "\" y2=\"" << fmt(py(score)) << "\"/>\n";
    svg << "    <text x=\"" << kLeft - 8 << "\" y=\"" << fmt(py(score) + 3)
        << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#444\">" << fmt(score) << "</text>\n";
  }
  svg << "    <text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#444\">cost per query</text>\n";
  svg << "    <text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#444\" transform=\"rotate(-90 16 "
      << (kTop + kHeight - kBottom) / 2 << ")\">score</text>\n";
  svg << "  </g>\n";

  // frontier polyline, cost ascending
  if (frontier.size() > 1) {
    svg << "  <polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : frontier) svg << fmt(px(p.cost)) << ',' << fmt(py(p.score)) << ' ';
    svg << "\"/>\n";
  }

  for (const auto& p : points) {
    bool on_frontier = frontier_labels.count(p.label) > 0;
    svg << "  <circle cx=\"" << fmt(px(p.cost)) << "\" cy=\"" << fmt(py(p.score)) << "\" r=\"4\""
        << " fill=\"" << (on_frontier ? "#d62728" : "#1f77b4") << "\"/>\n";
    svg << "  <text x=\"" << fmt(px(p.cost) + 6) << "\" y=\"" << fmt(py(p.score) - 6)
        << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#222\">"
        << escape_xml(p.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

ParetoArtifacts emit_pareto(const std::vector<ParetoPoint>& points) {
  if (points.empty()) throw std::invalid_argument("emit_pareto needs at least one point");
  ParetoArtifacts out;
  out.frontier = pareto_frontier(points);

  std::set<std::string> frontier_labels;
  for (const auto& p : out.frontier) frontier_labels.insert(p.label);
  std::ostringstream csv;
  csv << "label,score,cost,on_frontier\n";
  csv.precision(9);
  for (const auto& p : points) {
    csv << p.label << ',' << p.score << ',' << p.cost << ','
        << (frontier_labels.count(p.label) ? 1 : 0) << '\n';
  }
  out.csv = csv.str();
  out.svg = render_svg(points, out.frontier);
  return out;
}

}  // namespace bootroute
