#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conelab/cone_spectrum.hpp"
#include "conelab/foliation.hpp"

namespace conelab {

/// g(r) with its first two derivatives.
struct RadialFunction {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
};

/// c r^a.
RadialFunction power_profile(double coeff, double a_exp);

/// Base T for normal graphs of G = g(r) psi_1: the cone C_0, or a computed leaf.
/// On the cone the graph direction points to the side of the first factor; on a leaf
/// it points away from the cone.
class GraphBase {
public:
    static GraphBase on_cone(const ConeSpec& cone);
    static GraphBase on_leaf(const ProfileCurve& leaf);
    /// H(lambda) = |lambda|^{1/(1-gamma)} H_{sign lambda}; lambda = 0 gives the cone.
    static GraphBase on_leaf(const Foliation& foliation, double lambda);

    bool is_cone() const { return !leaf_; }
    const ConeSpec& cone() const { return cone_; }
    const ProfileCurve& leaf() const { return *leaf_; }

private:
    ConeSpec cone_;
    std::optional<ProfileCurve> leaf_;
};

/// Mean curvature along the profile. On a leaf the evaluation points are the leaf
/// samples nearest the requested radii, and r holds their actual radii.
struct CurvatureTrace {
    std::vector<double> r;
    std::vector<double> value;
    std::vector<double> oracle_value;
    std::vector<double> abs_err;
};

/// Mean curvature of graph_T(g(r) psi_1) from the exact profile formula; with `oracle`
/// also by finite differences of the generated hypersurface, with steps proportional to r
/// (resolves profiles varying on the scale of r). Throws GraphFailure.
CurvatureTrace graphical_mc(const GraphBase& base, const RadialFunction& g,
                            std::span<const double> radii, bool oracle = true);

/// Coefficient c(r) with L_T(r^a psi_j) = c(r) psi_j at the given radii. Exact on the
/// cone; on a leaf by central differences of the profile formula at 0.
std::vector<double> linearized_mc_mode(const GraphBase& base, const SpectralTable& table, int j,
                                       double a_exp, std::span<const double> radii);

/// Always by central differences, also on the cone.
std::vector<double> linearized_mc_numeric(const GraphBase& base, const SpectralTable& table, int j,
                                          double a_exp, std::span<const double> radii);

/// The leaf as a normal graph over the cone: g = height / psi_1 against foot radius,
/// defined beyond the graphability radius. Throws GraphFailure outside.
RadialFunction leaf_graph_profile(const ProfileCurve& leaf);

struct SupersolutionReport {
    /// min of r^{2-a} L(r^a psi_1)/psi_1 over samples with r >= r_min.
    double margin = 0.0;
    /// Radius beyond which every sample is positive.
    double inner_radius = 0.0;
    std::vector<double> r;
    std::vector<double> scaled_value;
};

/// Supersolution margin of F_a = r^a psi_1 on a leaf. Requires gamma < a < 0.
SupersolutionReport supersolution_check_Fa(const ProfileCurve& leaf, double a_exp, double r_min = 0.0);

/// Columns r,value,oracle_value,abs_err.
std::string to_csv(const CurvatureTrace& trace);

} // namespace conelab
