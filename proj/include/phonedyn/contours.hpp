#pragma once

// Marching-squares level sets on a regular grid, with linear interpolation
// along cell edges. Saddle cells are resolved by the cell-center average.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "decoding.hpp"
#include "error.hpp"

namespace phonedyn {

struct ContourPoint {
  double row = 0.0;  // train axis (ms for TG matrices)
  double col = 0.0;  // test axis
};

struct Polyline {
  std::vector<ContourPoint> vertices;  // closed polylines repeat the first vertex at the end
  bool closed = false;
};

/// Level set {z = threshold} of `grid`, where row i sits at row_coords[i]
/// and column j at col_coords[j]. Cells at or above the threshold count as
/// inside. Output order is deterministic: open polylines first (by their
/// starting edge), then closed ones.
inline std::vector<Polyline> extract_contours(const Eigen::MatrixXd& grid, double threshold,
                                              std::span<const double> row_coords, std::span<const double> col_coords) {
  const Eigen::Index nr = grid.rows(), nc = grid.cols();
  if (static_cast<std::size_t>(nr) != row_coords.size() || static_cast<std::size_t>(nc) != col_coords.size())
    throw DimensionError("extract_contours: coordinate vectors do not match the grid shape");

  // Crossing points are keyed by edge: 2*(i*nc + j) for the horizontal edge
  // (i,j)-(i,j+1), 2*(i*nc + j) + 1 for the vertical edge (i,j)-(i+1,j).
  using Node = std::int64_t;
  auto h_edge = [&](Eigen::Index i, Eigen::Index j) { return Node{2 * (i * nc + j)}; };
  auto v_edge = [&](Eigen::Index i, Eigen::Index j) { return Node{2 * (i * nc + j) + 1}; };

  auto crossing = [&](Node id) {
    const Eigen::Index cell = id / 2;
    const Eigen::Index i = cell / nc, j = cell % nc;
    const Eigen::Index i2 = (id % 2) ? i + 1 : i;
    const Eigen::Index j2 = (id % 2) ? j : j + 1;
    const double a = grid(i, j), b = grid(i2, j2);
    const double t = (threshold - a) / (b - a);
    const auto ri = static_cast<std::size_t>(i), ri2 = static_cast<std::size_t>(i2);
    const auto cj = static_cast<std::size_t>(j), cj2 = static_cast<std::size_t>(j2);
    return ContourPoint{row_coords[ri] + t * (row_coords[ri2] - row_coords[ri]),
                        col_coords[cj] + t * (col_coords[cj2] - col_coords[cj])};
  };

  std::map<Node, std::vector<Node>> adjacency;
  auto link = [&](Node a, Node b) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  };

  for (Eigen::Index i = 0; i + 1 < nr; ++i) {
    for (Eigen::Index j = 0; j + 1 < nc; ++j) {
      const bool tl = grid(i, j) >= threshold, tr = grid(i, j + 1) >= threshold;
      const bool br = grid(i + 1, j + 1) >= threshold, bl = grid(i + 1, j) >= threshold;
      const Node top = h_edge(i, j), bottom = h_edge(i + 1, j);
      const Node left = v_edge(i, j), right = v_edge(i, j + 1);

      std::vector<Node> cut;
      if (tl != tr) cut.push_back(top);
      if (tr != br) cut.push_back(right);
      if (bl != br) cut.push_back(bottom);
      if (tl != bl) cut.push_back(left);

      if (cut.size() == 2) {
        link(cut[0], cut[1]);
      } else if (cut.size() == 4) {
        const double center = 0.25 * (grid(i, j) + grid(i, j + 1) + grid(i + 1, j + 1) + grid(i + 1, j));
        const bool inside = center >= threshold;
        // Corners whose state differs from the center get cut off.
        if (tl != inside) link(top, left);
        if (tr != inside) link(top, right);
        if (br != inside) link(right, bottom);
        if (bl != inside) link(bottom, left);
      }
    }
  }

  std::vector<Polyline> out;
  std::map<Node, bool> visited;
  auto walk = [&](Node start) {
    Polyline line;
    Node prev = -1, cur = start;
    while (true) {
      visited[cur] = true;
      line.vertices.push_back(crossing(cur));
      Node next = -1;
      for (const Node nb : adjacency[cur])
        if (nb != prev && !visited[nb]) {
          next = nb;
          break;
        }
      if (next < 0) {
        for (const Node nb : adjacency[cur])
          if (nb == start && nb != prev && line.vertices.size() > 2) line.closed = true;
        break;
      }
      prev = cur;
      cur = next;
    }
    if (line.closed) line.vertices.push_back(line.vertices.front());
    out.push_back(std::move(line));
  };

  for (const auto& [node, nbs] : adjacency)
    if (nbs.size() == 1 && !visited[node]) walk(node);
  for (const auto& [node, nbs] : adjacency)
    if (!visited[node]) walk(node);
  return out;
}

/// Contours of a TG matrix in millisecond coordinates (row = train offset,
/// column = test offset).
inline std::vector<Polyline> extract_contours(const TGMatrix& tg, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DataError("extract_contours: threshold must lie in (0, 1)");
  std::vector<double> ms(tg.offsets.size());
  for (std::size_t i = 0; i < ms.size(); ++i) ms[i] = tg.offsets[i] * tg.frame_period_ms;
  return extract_contours(tg.accuracy, threshold, ms, ms);
}

}  // namespace phonedyn
