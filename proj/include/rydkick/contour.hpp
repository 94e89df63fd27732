#ifndef RYDKICK_CONTOUR_HPP
#define RYDKICK_CONTOUR_HPP

// Marching-squares iso-lines on a rectilinear grid, joined into polylines.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rydkick {

struct ContourPoint {
  double x = 0.0;
  double y = 0.0;
};

using Polyline = std::vector<ContourPoint>;

/// values[i * ys.size() + j] is the field at (xs[i], ys[j]). Cells touching a
/// NaN are skipped. Saddle cells are resolved with the cell-centre average.
inline std::vector<Polyline> contour_lines(const std::vector<double>& xs,
                                           const std::vector<double>& ys,
                                           const std::vector<double>& values, double level) {
  const std::size_t nx = xs.size(), ny = ys.size();
  if (values.size() != nx * ny) throw std::invalid_argument("contour_lines: size mismatch");
  if (nx < 2 || ny < 2) return {};

  // Edge ids: horizontal edge (i,j)-(i+1,j) -> 2*(i*ny+j); vertical (i,j)-(i,j+1) -> +1.
  auto value = [&](std::size_t i, std::size_t j) { return values[i * ny + j]; };
  auto h_edge = [&](std::size_t i, std::size_t j) { return 2 * (i * ny + j); };
  auto v_edge = [&](std::size_t i, std::size_t j) { return 2 * (i * ny + j) + 1; };
  std::map<std::size_t, ContourPoint> crossing;
  auto point_on = [&](std::size_t edge) -> ContourPoint {
    if (auto it = crossing.find(edge); it != crossing.end()) return it->second;
    const std::size_t node = edge / 2;
    const std::size_t i = node / ny, j = node % ny;
    const std::size_t i2 = (edge % 2 == 0) ? i + 1 : i;
    const std::size_t j2 = (edge % 2 == 0) ? j : j + 1;
    const double a = value(i, j), b = value(i2, j2);
    const double t = (a == b) ? 0.5 : (level - a) / (b - a);
    ContourPoint p{xs[i] + t * (xs[i2] - xs[i]), ys[j] + t * (ys[j2] - ys[j])};
    crossing[edge] = p;
    return p;
  };

  std::vector<std::pair<std::size_t, std::size_t>> segments;
  for (std::size_t i = 0; i + 1 < nx; ++i)
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const std::array<double, 4> c{value(i, j), value(i + 1, j), value(i + 1, j + 1),
                                    value(i, j + 1)};
      bool bad = false;
      for (double v : c) bad = bad || std::isnan(v);
      if (bad) continue;
      int idx = 0;
      for (int k = 0; k < 4; ++k)
        if (c[k] >= level) idx |= 1 << k;
      if (idx == 0 || idx == 15) continue;
      // Cell edges in corner order: bottom, right, top, left.
      const std::array<std::size_t, 4> e{h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1),
                                         v_edge(i, j)};
      auto seg = [&](int a, int b) { segments.emplace_back(e[a], e[b]); };
      switch (idx) {
        case 1: case 14: seg(3, 0); break;
        case 2: case 13: seg(0, 1); break;
        case 3: case 12: seg(3, 1); break;
        case 4: case 11: seg(1, 2); break;
        case 6: case 9: seg(0, 2); break;
        case 7: case 8: seg(3, 2); break;
        case 5: case 10: {
          const double centre = 0.25 * (c[0] + c[1] + c[2] + c[3]);
          const bool centre_high = centre >= level;
          if ((idx == 5) == centre_high) {
            seg(3, 2);
            seg(0, 1);
          } else {
            seg(3, 0);
            seg(1, 2);
          }
          break;
        }
        default: break;
      }
    }

  // Join segments sharing an edge crossing into polylines.
  std::map<std::size_t, std::vector<std::size_t>> at;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    at[segments[s].first].push_back(s);
    at[segments[s].second].push_back(s);
  }
  std::vector<char> used(segments.size(), 0);
  auto next_segment = [&](std::size_t edge) -> std::ptrdiff_t {
    for (std::size_t s : at[edge])
      if (!used[s]) return static_cast<std::ptrdiff_t>(s);
    return -1;
  };
  auto walk = [&](std::size_t edge, std::vector<std::size_t>& chain) {
    for (std::ptrdiff_t s = next_segment(edge); s >= 0; s = next_segment(edge)) {
      used[static_cast<std::size_t>(s)] = 1;
      const auto& sg = segments[static_cast<std::size_t>(s)];
      edge = sg.first == edge ? sg.second : sg.first;
      chain.push_back(edge);
    }
  };

  std::vector<Polyline> lines;
  // Open chains first (start at an end with a single segment), then loops.
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (used[s]) continue;
      std::size_t start = segments[s].first;
      if (pass == 0) {
        if (at[segments[s].first].size() == 1)
          start = segments[s].first;
        else if (at[segments[s].second].size() == 1)
          start = segments[s].second;
        else
          continue;
      }
      std::vector<std::size_t> chain{start};
      walk(start, chain);
      Polyline line;
      for (std::size_t edge : chain) line.push_back(point_on(edge));
      lines.push_back(std::move(line));
    }
  return lines;
}

}  // namespace rydkick

#endif  // RYDKICK_CONTOUR_HPP
