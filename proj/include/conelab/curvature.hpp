#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace conelab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Position and first/second partial derivatives of a parametrization at one
/// parameter point. `d2[i * k + j]` is the ambient vector d^2F/du^i du^j.
struct SurfaceJet {
    VectorXd x;
    MatrixXd d1;
    std::vector<VectorXd> d2;
};

/// A parametrized hypersurface piece F: U in R^k -> R^{k+1}. `jet` supplies
/// closed-form derivatives when available; otherwise they are taken by finite
/// differences of `map`. `orientation(u)` is any vector having positive inner
/// product with the chosen unit normal.
struct SurfacePatch {
    int dim = 0;
    std::function<VectorXd(const VectorXd&)> map;
    std::function<SurfaceJet(const VectorXd&)> jet;
    std::function<VectorXd(const VectorXd&)> orientation;
};

/// Geometry at a point under the convention h_ij = -d^2_ij F . nu.
struct PointGeometry {
    VectorXd x;
    VectorXd normal;
    MatrixXd metric;
    MatrixXd sff;
    double mean_curvature = 0.0;
};

SurfaceJet finite_difference_jet(const SurfacePatch& patch, const VectorXd& u, double step);
/// Per-coordinate steps.
SurfaceJet finite_difference_jet(const SurfacePatch& patch, const VectorXd& u,
                                 const VectorXd& steps);

PointGeometry point_geometry(const SurfaceJet& jet, const VectorXd& orientation);

/// Closed-form jet when the patch has one, finite differences otherwise.
PointGeometry patch_geometry(const SurfacePatch& patch, const VectorXd& u);

/// Default finite-difference step of the curvature oracle.
inline constexpr double kOracleStep = 1e-3;

/// Mean curvature from five-point central differences of the parametrization.
/// Throws StepUnderflow when the differenced tangent frame is degenerate.
double fd_mean_curvature(const SurfacePatch& patch, const VectorXd& u, double step = kOracleStep);
double fd_mean_curvature(const SurfacePatch& patch, const VectorXd& u, const VectorXd& steps);

/// A positive C^2 function of y in R^l with its derivatives.
struct WarpFunction {
    std::function<double(const VectorXd&)> value;
    std::function<VectorXd(const VectorXd&)> gradient;
    std::function<MatrixXd(const VectorXd&)> hessian;
};

/// S~ = union over y of (f(y) S) x {y}.
struct WarpSpec {
    int l = 1;
    WarpFunction f;
    SurfacePatch patch;
};

/// The warped mean-curvature formula: with E = 1 + |Df|^2 (x.nu)^2,
///   M = E^{-1/2} [ M_S / f + |Df|^2 h_S(x^T, x^T) / (f E)
///                  + (x.nu) (-delta_ab + (x.nu)^2 D_a f D_b f / E) D^2_ab f ].
/// Evaluated at the point (f(y) F(u), y) with the normal following nu.
double warped_mean_curvature(const WarpSpec& spec, const VectorXd& u, const VectorXd& y);

/// The warped hypersurface as a patch in R^{n+1+l} with parameters (u, y),
/// for the finite-difference oracle.
SurfacePatch warped_patch(const WarpSpec& spec);

// Closed-form patches used by tests and the verification suite.

/// Round sphere of radius R in R^{k+1} through a gnomonic chart centred at `pole`.
SurfacePatch sphere_patch(int k, double radius, bool outward = true);

/// Graph of w over R^k with the normal having positive last component.
/// `w` returns (value, gradient, hessian).
struct GraphFunction {
    std::function<double(const VectorXd&)> value;
    std::function<VectorXd(const VectorXd&)> gradient;
    std::function<MatrixXd(const VectorXd&)> hessian;
};
SurfacePatch graph_patch(int k, GraphFunction w);

/// The cone C_{p,q} parametrized by (r, gnomonic chart of S^p, gnomonic chart of S^q),
/// normal pointing to the side of the first factor.
SurfacePatch simons_cone_patch(int p, int q);

} // namespace conelab
