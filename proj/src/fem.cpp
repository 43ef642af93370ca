#include "eitlab/fem.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "eitlab/errors.hpp"

namespace eitlab {

Conductivity::Conductivity(Eigen::VectorXd values, double lower, double upper)
    : values_(std::move(values)), lower_(lower), upper_(upper) {
  if (!(lower_ > 0.0) || !(upper_ >= lower_) || !std::isfinite(upper_)) {
    std::ostringstream msg;
    msg << "invalid ellipticity bounds [" << lower_ << ", " << upper_ << "]";
    throw EllipticityViolation(msg.str());
  }
  for (Index t = 0; t < values_.size(); ++t) {
    const double v = values_[t];
    if (!std::isfinite(v) || v < lower_ || v > upper_) {
      std::ostringstream msg;
      msg << "conductivity " << v << " on element " << t << " outside [" << lower_ << ", "
          << upper_ << "]";
      throw EllipticityViolation(msg.str());
    }
  }
}

Conductivity Conductivity::uniform(const Mesh& mesh, double value, double lower, double upper) {
  return Conductivity(Eigen::VectorXd::Constant(mesh.num_triangles(), value), lower, upper);
}

Eigen::VectorXd repeat_per_component(const Eigen::VectorXd& per_element) {
  Eigen::VectorXd out(2 * per_element.size());
  for (Index t = 0; t < per_element.size(); ++t) out[2 * t] = out[2 * t + 1] = per_element[t];
  return out;
}

namespace {

// Gradients of the three barycentric hat functions on triangle t.
std::array<Eigen::Vector2d, 3> hat_gradients(const Mesh& mesh, Index t) {
  const auto& tri = mesh.triangles()[t];
  const double two_area = 2.0 * mesh.element_areas()[t];
  std::array<Eigen::Vector2d, 3> g;
  for (int a = 0; a < 3; ++a) {
    const auto& p = mesh.nodes()[tri[(a + 1) % 3]];
    const auto& q = mesh.nodes()[tri[(a + 2) % 3]];
    g[a] = Eigen::Vector2d(p.y() - q.y(), q.x() - p.x()) / two_area;
  }
  return g;
}

void check_sizes(const Mesh& mesh, const Conductivity& gamma) {
  if (gamma.size() != mesh.num_triangles())
    throw InvalidArgument("conductivity size does not match the mesh");
}

}  // namespace

DiscreteOperators DiscreteOperators::build(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> full, interior;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = hat_gradients(mesh, t);
    const auto& tri = mesh.triangles()[t];
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 2; ++c) {
        full.emplace_back(2 * t + c, tri[a], g[a][c]);
        if (const Index slot = mesh.interior_slot(tri[a]); slot >= 0)
          interior.emplace_back(2 * t + c, slot, g[a][c]);
      }
    }
  }
  DiscreteOperators ops;
  ops.gradient.resize(2 * mesh.num_triangles(), mesh.num_nodes());
  ops.gradient.setFromTriplets(full.begin(), full.end());
  ops.gradient_interior.resize(2 * mesh.num_triangles(), mesh.num_interior_nodes());
  ops.gradient_interior.setFromTriplets(interior.begin(), interior.end());
  ops.weights = repeat_per_component(mesh.element_areas());
  return ops;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const Conductivity& gamma) {
  check_sizes(mesh, gamma);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(9 * mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = hat_gradients(mesh, t);
    const auto& tri = mesh.triangles()[t];
    const double scale = gamma[t] * mesh.element_areas()[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) entries.emplace_back(tri[a], tri[b], scale * g[a].dot(g[b]));
  }
  SparseMatrix k(mesh.num_nodes(), mesh.num_nodes());
  k.setFromTriplets(entries.begin(), entries.end());
  return k;
}

DirichletSolver::DirichletSolver(const Mesh& mesh, const Conductivity& gamma) : mesh_(&mesh) {
  const SparseMatrix k = assemble_stiffness(mesh, gamma);
  std::vector<Eigen::Triplet<double>> ii, ib;
  for (int col = 0; col < k.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
      const Index r = mesh.interior_slot(it.row());
      if (r < 0) continue;
      if (const Index c = mesh.interior_slot(it.col()); c >= 0)
        ii.emplace_back(r, c, it.value());
      else
        ib.emplace_back(r, mesh.boundary_slot(it.col()), it.value());
    }
  }
  a_ii_.resize(mesh.num_interior_nodes(), mesh.num_interior_nodes());
  a_ii_.setFromTriplets(ii.begin(), ii.end());
  a_ib_.resize(mesh.num_interior_nodes(), mesh.num_boundary_nodes());
  a_ib_.setFromTriplets(ib.begin(), ib.end());
  if (a_ii_.rows() > 0) {
    llt_.compute(a_ii_);
    if (llt_.info() != Eigen::Success) throw SolverFailure("interior stiffness factorization failed");
  }
}

Eigen::VectorXd DirichletSolver::solve_interior(const Eigen::VectorXd& rhs) const {
  if (a_ii_.rows() == 0) return Eigen::VectorXd();
  Eigen::VectorXd x = llt_.solve(rhs);
  if (llt_.info() != Eigen::Success) throw SolverFailure("interior solve failed");
  const double rhs_norm = rhs.norm();
  if (rhs_norm > 0.0) {
    const double residual = (a_ii_ * x - rhs).norm() / rhs_norm;
    if (!(residual <= 1e3 * kSolverTolerance))
      throw SolverFailure("interior solve residual " + std::to_string(residual));
  }
  return x;
}

Eigen::VectorXd DirichletSolver::solve(const Eigen::VectorXd& boundary_values) const {
  const Mesh& mesh = *mesh_;
  if (boundary_values.size() != mesh.num_boundary_nodes())
    throw InvalidArgument("boundary data size does not match the boundary node count");
  Eigen::VectorXd u(mesh.num_nodes());
  for (Index k = 0; k < mesh.num_boundary_nodes(); ++k) u[mesh.boundary_nodes()[k]] = boundary_values[k];
  if (mesh.num_interior_nodes() > 0) {
    const Eigen::VectorXd interior = solve_interior(-(a_ib_ * boundary_values));
    for (Index k = 0; k < mesh.num_interior_nodes(); ++k) u[mesh.interior_nodes()[k]] = interior[k];
  }
  return u;
}

Eigen::VectorXd solve_dirichlet(const Mesh& mesh, const Conductivity& gamma,
                                const Eigen::VectorXd& boundary_values) {
  return DirichletSolver(mesh, gamma).solve(boundary_values);
}

GradientField element_gradients(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (u.size() != mesh.num_nodes()) throw InvalidArgument("nodal vector size mismatch");
  GradientField out(2 * mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = hat_gradients(mesh, t);
    const auto& tri = mesh.triangles()[t];
    const Eigen::Vector2d grad = u[tri[0]] * g[0] + u[tri[1]] * g[1] + u[tri[2]] * g[2];
    out[2 * t] = grad.x();
    out[2 * t + 1] = grad.y();
  }
  return out;
}

double energy(const Mesh& mesh, const Conductivity& gamma, const Eigen::VectorXd& u) {
  check_sizes(mesh, gamma);
  const GradientField g = element_gradients(mesh, u);
  double e = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t)
    e += gamma[t] * mesh.element_areas()[t] * (g[2 * t] * g[2 * t] + g[2 * t + 1] * g[2 * t + 1]);
  return e;
}

}  // namespace eitlab
