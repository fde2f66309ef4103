#pragma once

#include "lmcf/geometry.hpp"

#include <iosfwd>
#include <string>

namespace lmcf {

// Text format (one record per vertex):
//   # lmcf-curve v1
//   # component <id> closed=<0|1>      (one line per component, in order)
//   component_id,x,y
//   <id>,<x>,<y>                        (%.17g, vertices of each component contiguous)
void write_curve(std::ostream& out, const DiscreteCurve& curve);
DiscreteCurve read_curve(std::istream& in);

void save_curve(const std::string& path, const DiscreteCurve& curve);
DiscreteCurve load_curve(const std::string& path);

std::string format_double(double v);

}  // namespace lmcf
