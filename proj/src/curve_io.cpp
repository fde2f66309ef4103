#include "lmcf/curve_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace lmcf {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_curve(std::ostream& out, const DiscreteCurve& curve) {
  out << "# lmcf-curve v1\n";
  for (const auto& c : curve.components)
    out << "# component " << c.component_id << " closed=" << (c.closed ? 1 : 0) << "\n";
  out << "component_id,x,y\n";
  for (const auto& c : curve.components)
    for (const auto& v : c.vertices)
      out << c.component_id << ',' << format_double(v.x()) << ',' << format_double(v.y()) << '\n';
}

DiscreteCurve read_curve(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# lmcf-curve v1", 0) != 0)
    throw Error(ErrorCode::IoError, "missing lmcf-curve header");
  DiscreteCurve curve;
  std::map<int, std::size_t> index;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# component", 0) == 0) {
      int id = 0, closed = 0;
      if (std::sscanf(line.c_str(), "# component %d closed=%d", &id, &closed) != 2)
        throw Error(ErrorCode::IoError, "bad component line: " + line);
      Polyline p;
      p.component_id = id;
      p.closed = closed != 0;
      index[id] = curve.components.size();
      curve.components.push_back(p);
      continue;
    }
    if (line[0] == '#') continue;
    if (!header_seen) {
      if (line != "component_id,x,y") throw Error(ErrorCode::IoError, "bad column header: " + line);
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      throw Error(ErrorCode::IoError, "bad record: " + line);
    const int id = std::stoi(a);
    auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorCode::IoError, "undeclared component " + a);
    curve.components[it->second].vertices.emplace_back(std::stod(b), std::stod(c));
  }
  validate(curve);
  return curve;
}

void save_curve(const std::string& path, const DiscreteCurve& curve) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_curve(f, curve);
}

DiscreteCurve load_curve(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot read " + path);
  return read_curve(f);
}

}  // namespace lmcf
