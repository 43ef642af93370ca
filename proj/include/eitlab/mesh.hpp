#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace eitlab {

using Index = std::ptrdiff_t;

/// Structured triangulation of the unit square.
///
/// Node (i, j) sits at (i/n, j/n) and has index j*(n+1) + i. Every grid cell
/// is split along its lower-left to upper-right diagonal into two
/// counterclockwise triangles. Boundary nodes are listed counterclockwise
/// starting at the origin. Instances are immutable after construction.
class Mesh {
 public:
  /// Throws InvalidArgument for n == 0.
  static Mesh structured(int n);

  int subdivisions() const { return n_; }
  Index num_nodes() const { return static_cast<Index>(nodes_.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles_.size()); }
  Index num_boundary_nodes() const { return static_cast<Index>(boundary_nodes_.size()); }
  Index num_interior_nodes() const { return static_cast<Index>(interior_nodes_.size()); }

  const std::vector<Eigen::Vector2d>& nodes() const { return nodes_; }
  const std::vector<std::array<Index, 3>>& triangles() const { return triangles_; }
  const std::vector<Index>& boundary_nodes() const { return boundary_nodes_; }
  const std::vector<Index>& interior_nodes() const { return interior_nodes_; }
  const Eigen::VectorXd& element_areas() const { return areas_; }

  Eigen::Vector2d centroid(Index t) const;
  bool is_boundary(Index node) const { return boundary_slot_[node] >= 0; }
  /// Position of a node within boundary_nodes(), or -1 for interior nodes.
  Index boundary_slot(Index node) const { return boundary_slot_[node]; }
  /// Position of a node within interior_nodes(), or -1 for boundary nodes.
  Index interior_slot(Index node) const { return interior_slot_[node]; }

  /// JSON debugging dump: nodes, triangles and boundary order.
  std::string to_json() const;

 private:
  Mesh() = default;

  int n_ = 0;
  std::vector<Eigen::Vector2d> nodes_;
  std::vector<std::array<Index, 3>> triangles_;
  std::vector<Index> boundary_nodes_;
  std::vector<Index> interior_nodes_;
  std::vector<Index> boundary_slot_;
  std::vector<Index> interior_slot_;
  Eigen::VectorXd areas_;
};

/// Arclength parameter s in [0, 4) of every boundary node, in boundary order.
Eigen::VectorXd boundary_arclength(const Mesh& mesh);

/// Signed area of triangle t (positive for counterclockwise orientation).
double signed_area(const Mesh& mesh, Index t);

}  // namespace eitlab
