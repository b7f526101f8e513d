#pragma once

// Radial elliptic side problems: the scalar-flat gauge near N, the lowest
// Dirichlet eigenvalue of a tube, and the complete constant negative
// curvature profile on M \ N.

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "yamabe/model_geometry.hpp"

namespace yamabe {

struct BoundaryData {
  std::string inner;
  std::string outer;
  double inner_value = 0.0;
  double outer_value = 0.0;
};

/// u ~ coefficient * r^exponent, least squares in log-log coordinates.
struct AsymptoteFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
};

struct EllipticSolution {
  RadialField field;
  double residual_norm = 0.0;
  BoundaryData boundary;
  std::optional<AsymptoteFit> asymptote;
};

struct EllipticOptions {
  Eigen::Index nodes = 400;
  double tol = 1e-12;
  int max_iter = 100;
};

/// U > 0 on (0, eps] with -Delta U + (m-2)/(4(m-1)) R_g0 U = 0, U(eps) = 1 and
/// U bounded at N (cell-centred grid, even reflection about r = 0). The
/// metric U^{4/(m-2)} g0 is scalar flat near N.
EllipticSolution scalar_flat_gauge(const ModelGeometry& geom, double eps, const EllipticOptions& options = {});

/// The gauge extended by the constant 1 beyond eps, sampled on grid.
RadialField extend_scalar_flat_gauge(const EllipticSolution& gauge, const GridPtr& grid);

struct EigenResult {
  double value = 0.0;
  /// Positive, normalised to max 1, on the cell centres.
  RadialField eigenfunction;
  /// Weighted Rayleigh quotient of the returned eigenfunction.
  double rayleigh = 0.0;
  int iterations = 0;
};

/// Smallest eigenvalue of -Delta on radial functions on (0, eps) with the
/// Dirichlet condition at eps, by inverse iteration on a symmetric finite
/// volume discretisation with the tube's volume weight.
EigenResult lowest_dirichlet_eigenvalue(const ModelGeometry& geom, double eps,
                                        const EllipticOptions& options = {});

/// Leading coefficient k with u ~ k r^{-2} for the complete metric of scalar
/// curvature -m(m-1) on M \ N: (2n+2-m)/m. Throws WrongRegime unless
/// n > (m-2)/2.
double singular_profile_coefficient(const ModelGeometry& geom);

struct SingularProfileOptions {
  Eigen::Index nodes = 800;
  double tol = 1e-11;
  int max_iter = 200;
};

/// u > 0 with R(u g0) = -m(m-1): solves
///   -4(m-1)/(m-2) Delta U + R_g0 U + m(m-1) U^{(m+2)/(m-2)} = 0,  U = u^eta,
/// on a geometric grid [r_min, r_max] with u(r_min) = k r_min^{-2}, pole
/// regularity at the outer end of a sphere and zero flux at the end of a flat
/// tube. Damped Newton from the seed u = k r^{-2}. The field holds u.
EllipticSolution singular_yamabe_profile(const ModelGeometry& geom, double r_min,
                                         const SingularProfileOptions& options = {});

/// Log-log least squares fit of u over the nodes in [r_lo, r_hi].
AsymptoteFit fit_asymptote(const RadialField& u, double r_lo, double r_hi);

}  // namespace yamabe
