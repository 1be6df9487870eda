#pragma once

#include <string>
#include <vector>

#include "bootroute/cost.hpp"

namespace bootroute {

struct ParetoArtifacts {
  std::vector<ParetoPoint> frontier;  // cost ascending
  std::string csv;                    // label,score,cost,on_frontier
  std::string svg;                    // scatter with frontier polyline
};

// Computes the frontier over labeled (score, cost) points and renders the
// CSV table and a static SVG chart.
ParetoArtifacts emit_pareto(const std::vector<ParetoPoint>& points);

}  // namespace bootroute
