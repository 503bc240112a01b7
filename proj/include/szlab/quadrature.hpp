#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "szlab/model.hpp"

namespace szlab {

/// Largest number of nodes a grid may have.
inline constexpr std::size_t kMaxQuadratureNodes = 4'000'000;

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Quadrature for integrals over CP^m against omega^m / m!.
///
/// Nodes are stored as unit homogeneous vectors (columns of `nodes`), so that
/// grids reach the hyperplane at infinity of the standard chart without
/// overflow. The rule works in moment coordinates t_j = |Z_j|^2 with angles
/// arg Z_j (j >= 1): Gauss-Legendre in t (through a Duffy map on the simplex
/// when m = 2) times uniform angles.
///
/// Exactness: Z^alpha conj(Z^beta) for homogeneous multi-indices with
/// |alpha| = |beta| <= bound / 2, against the Fubini-Study volume.
struct QuadratureGrid {
  int m = 1;
  int bound = 0;
  Eigen::MatrixXcd nodes;        // (m+1) x n
  std::vector<double> weights;   // size n, positive

  std::size_t size() const { return weights.size(); }
  /// Affine coordinates Z_j / Z_0 of node i (may be large near infinity).
  Eigen::VectorXcd affine(std::size_t i) const;
  double total_weight() const;
};

/// Fubini-Study grid. Throws DomainError for bound < 0 and ResourceCapError
/// when the grid would exceed kMaxQuadratureNodes.
QuadratureGrid build_quadrature(int m, int bound);

/// Grid for the model's volume form omega_phi^m / m!. Requires bound >= 2N + 4.
/// Perturbed models get extra nodes (2 N max|phi| plus a fixed margin);
/// the weights carry det(omega_phi) / det(omega_FS) and are checked to sum to
/// the model volume.
QuadratureGrid build_quadrature(const ProjectiveModel& model, int bound);

}  // namespace szlab
