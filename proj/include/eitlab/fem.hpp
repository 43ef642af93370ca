#pragma once

#include <memory>
#include <utility>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "eitlab/mesh.hpp"

namespace eitlab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Piecewise-constant conductivity with ellipticity bounds.
///
/// Construction enforces 0 < lower <= values[t] <= upper for every element
/// and throws EllipticityViolation otherwise.
class Conductivity {
 public:
  Conductivity(Eigen::VectorXd values, double lower, double upper);

  static Conductivity uniform(const Mesh& mesh, double value, double lower, double upper);

  const Eigen::VectorXd& values() const { return values_; }
  double lower_bound() const { return lower_; }
  double upper_bound() const { return upper_; }
  Index size() const { return values_.size(); }
  double operator[](Index t) const { return values_[t]; }

  /// Same bounds, new values (validated).
  Conductivity with_values(Eigen::VectorXd values) const {
    return Conductivity(std::move(values), lower_, upper_);
  }

 private:
  Eigen::VectorXd values_;
  double lower_;
  double upper_;
};

/// Per-element gradient fields are stored as length-2T vectors, entries
/// (2t, 2t+1) holding the x and y component on triangle t.
using GradientField = Eigen::VectorXd;

/// Expand a per-element function to the component layout of GradientField.
Eigen::VectorXd repeat_per_component(const Eigen::VectorXd& per_element);

/// The discrete gradient and weight operators of the P1 space.
struct DiscreteOperators {
  SparseMatrix gradient;           ///< 2T x N, nodal values -> GradientField
  SparseMatrix gradient_interior;  ///< 2T x N_I, columns of interior nodes
  Eigen::VectorXd weights;         ///< element areas, repeated per component

  static DiscreteOperators build(const Mesh& mesh);
};

/// Stiffness matrix of div(gamma grad u) over all nodes (symmetric, zero row sums).
SparseMatrix assemble_stiffness(const Mesh& mesh, const Conductivity& gamma);

/// Factorized Dirichlet problem for a fixed conductivity.
///
/// The interior block is factorized once; solves are const and may run
/// concurrently.
class DirichletSolver {
 public:
  DirichletSolver(const Mesh& mesh, const Conductivity& gamma);

  /// Solution on all nodes with the given values on boundary_nodes() (in
  /// boundary order).
  Eigen::VectorXd solve(const Eigen::VectorXd& boundary_values) const;

  /// Interior solution of A_II x = rhs.
  Eigen::VectorXd solve_interior(const Eigen::VectorXd& rhs) const;

  const SparseMatrix& interior_block() const { return a_ii_; }
  const Mesh& mesh() const { return *mesh_; }

 private:
  const Mesh* mesh_;
  SparseMatrix a_ii_;
  SparseMatrix a_ib_;
  Eigen::SimplicialLLT<SparseMatrix> llt_;
};

Eigen::VectorXd solve_dirichlet(const Mesh& mesh, const Conductivity& gamma,
                                const Eigen::VectorXd& boundary_values);

/// Per-element constant gradient of the P1 interpolant of nodal values u.
GradientField element_gradients(const Mesh& mesh, const Eigen::VectorXd& u);

/// sum_T gamma_T |T| |grad u|_T^2
double energy(const Mesh& mesh, const Conductivity& gamma, const Eigen::VectorXd& u);

/// Relative residual tolerance accepted from the linear solver.
inline constexpr double kSolverTolerance = 1e-12;

}  // namespace eitlab
