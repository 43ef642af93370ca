#include "eitlab/mesh.hpp"

#include <cmath>

#include <json.hpp>

#include "eitlab/errors.hpp"

namespace eitlab {

Mesh Mesh::structured(int n) {
  if (n < 1) throw InvalidArgument("mesh subdivisions must be >= 1");

  Mesh mesh;
  mesh.n_ = n;
  const Index stride = n + 1;
  auto id = [stride](Index i, Index j) { return j * stride + i; };

  mesh.nodes_.reserve(stride * stride);
  for (Index j = 0; j <= n; ++j)
    for (Index i = 0; i <= n; ++i)
      mesh.nodes_.emplace_back(double(i) / n, double(j) / n);

  mesh.triangles_.reserve(2 * n * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const Index ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
      mesh.triangles_.push_back({ll, lr, ur});
      mesh.triangles_.push_back({ll, ur, ul});
    }
  }

  // counterclockwise from (0,0): bottom, right, top, left
  for (Index i = 0; i <= n; ++i) mesh.boundary_nodes_.push_back(id(i, 0));
  for (Index j = 1; j <= n; ++j) mesh.boundary_nodes_.push_back(id(n, j));
  for (Index i = n - 1; i >= 0; --i) mesh.boundary_nodes_.push_back(id(i, n));
  for (Index j = n - 1; j >= 1; --j) mesh.boundary_nodes_.push_back(id(0, j));

  mesh.boundary_slot_.assign(mesh.nodes_.size(), -1);
  mesh.interior_slot_.assign(mesh.nodes_.size(), -1);
  for (std::size_t k = 0; k < mesh.boundary_nodes_.size(); ++k)
    mesh.boundary_slot_[mesh.boundary_nodes_[k]] = static_cast<Index>(k);
  for (Index v = 0; v < mesh.num_nodes(); ++v) {
    if (mesh.boundary_slot_[v] < 0) {
      mesh.interior_slot_[v] = static_cast<Index>(mesh.interior_nodes_.size());
      mesh.interior_nodes_.push_back(v);
    }
  }

  mesh.areas_.resize(mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) mesh.areas_[t] = signed_area(mesh, t);
  return mesh;
}

Eigen::Vector2d Mesh::centroid(Index t) const {
  const auto& tri = triangles_[t];
  return (nodes_[tri[0]] + nodes_[tri[1]] + nodes_[tri[2]]) / 3.0;
}

std::string Mesh::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& p : nodes_) nodes.push_back({p.x(), p.y()});
  auto& tris = j["triangles"] = nlohmann::json::array();
  for (const auto& t : triangles_) tris.push_back({t[0], t[1], t[2]});
  j["boundary_nodes"] = boundary_nodes_;
  return j.dump();
}

double signed_area(const Mesh& mesh, Index t) {
  const auto& tri = mesh.triangles()[t];
  const auto& a = mesh.nodes()[tri[0]];
  const auto& b = mesh.nodes()[tri[1]];
  const auto& c = mesh.nodes()[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

Eigen::VectorXd boundary_arclength(const Mesh& mesh) {
  // uniform spacing 1/n along the perimeter; exact for every node
  const Index nb = mesh.num_boundary_nodes();
  Eigen::VectorXd s(nb);
  for (Index k = 0; k < nb; ++k) s[k] = double(k) / mesh.subdivisions();
  return s;
}

}  // namespace eitlab
