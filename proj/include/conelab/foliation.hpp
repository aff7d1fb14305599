#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conelab/cone_spectrum.hpp"
#include "json.hpp"

namespace conelab {

/// One exported sample of a leaf profile in the (u, v) quadrant, u = |x_1|,
/// v = |x_2| for x = (x_1, x_2) in R^{p+1} x R^{q+1}.
struct ProfileSample {
    double s = 0.0;
    double u = 0.0;
    double v = 0.0;
    double theta = 0.0;
    double residual = 0.0;
};

/// Integration state in the frame where the leaf caps on the first axis.
/// sigma is scale-invariant arclength (d sigma = ds / r), t = log r,
/// delta = (polar angle) - (cone ray angle) < 0, psi = (tangent angle) - (polar angle).
/// `area` is the area of the leaf inside the sphere of radius e^t.
struct ProfileState {
    double sigma = 0.0;
    double t = 0.0;
    double delta = 0.0;
    double psi = 0.0;
    double s = 0.0;
    double area = 0.0;
};

/// Sign of the curvature term in theta' = g (q cos(theta)/v - p sin(theta)/u),
/// fixed against the finite-difference mean-curvature oracle and cached per (p, q).
int profile_ode_sign(int p, int q);

/// Power series of the leaf profile at its regular axis point (u, v, theta) = (1, 0, pi/2),
/// solved order by order in arclength.
class AxisSeries {
public:
    static constexpr int kOrder = 41;

    AxisSeries(int p, int q, int ode_sign);

    /// Coefficient of s^k in theta(s) - pi/2.
    double theta_coefficient(int k) const { return theta_[k]; }
    double theta(double s) const;
    std::pair<double, double> position(double s) const;
    /// Area swept by the profile over [0, s].
    double cap_area(double s) const;

private:
    std::vector<double> theta_, u_, v_, area_;
};

/// Arclength-sampled leaf profile of the foliation. Immutable once built.
class ProfileCurve {
public:
    const ConeSpec& cone() const { return cone_; }
    int sign() const { return sign_; }
    /// Axis-crossing radius; 1 for the leaves returned by solve_profile.
    double u0() const { return u0_; }
    double gamma() const { return gamma_; }
    double gamma_minus() const { return gamma_minus_; }
    int ode_sign() const { return ode_sign_; }
    double sigma_step() const { return step_; }

    std::size_t size() const { return states_.size(); }
    const std::vector<ProfileState>& states() const { return states_; }
    ProfileSample sample(std::size_t i) const;
    std::vector<ProfileSample> samples() const;

    double radius(std::size_t i) const;
    /// Radius of the nearest point on the cone ray.
    double foot_radius(std::size_t i) const;
    /// Signed normal distance to the cone, positive on the side of the first factor.
    double graph_height(std::size_t i) const;
    /// Tangent angle in the original (u, v) frame.
    double theta(std::size_t i) const;
    double max_radius() const;
    double max_residual() const;
    const std::vector<double>& residuals() const { return residuals_; }

    /// Dilation c * H; the foliation parameter of the result is c^{1-gamma} times this one's.
    ProfileCurve scaled(double c) const;

    // Frame where the leaf caps on the first axis (p and q swapped for sign -).
    int canonical_p() const { return sign_ > 0 ? cone_.p : cone_.q; }
    int canonical_q() const { return sign_ > 0 ? cone_.q : cone_.p; }
    double canonical_ray_angle() const;

    /// log of the leaf radius along the ray at canonical angle offset delta in [-ray, 0).
    double log_radius_at_delta(double delta) const;
    /// Area of the leaf inside the ball of radius R (R <= max_radius()).
    double area_within(double R) const;
    /// Hermite interpolation of the state at sigma within the sampled range.
    ProfileState state_at(double sigma) const;

    /// Mean-curvature residual |x| |H| at sample i by the finite-difference oracle.
    double oracle_residual(std::size_t i) const;

    /// d/dsigma of the state (the sigma field of the result is 1).
    ProfileState derivative(const ProfileState& x) const;

private:
    friend ProfileCurve solve_profile(const ConeSpec&, int, double, double);

    ConeSpec cone_;
    int sign_ = 1;
    int ode_sign_ = 1;
    double u0_ = 1.0;
    double gamma_ = 0.0;
    double gamma_minus_ = 0.0;
    double step_ = 0.0;
    double series_s0_ = 0.0;
    std::vector<ProfileState> states_;
    std::vector<double> residuals_;
};

/// Default scale-invariant arclength spacing of the stored samples.
inline constexpr double kProfileStep = 2e-3;

/// Integrates the leaf H_+ (sign = +1, caps on the first axis) or H_- (sign = -1)
/// with axis-crossing radius 1 out to arclength s_max. Throws NotStrictlyStable,
/// IntegrationDiverged, SideViolation.
ProfileCurve solve_profile(const ConeSpec& cone, int sign, double s_max = 1e4, double tol = 1e-8);

struct LeafGraphFit {
    double R0 = 0.0;
    double gamma_hat = 0.0;
    double a_hat = 0.0;
    double alpha0_hat = 0.0;
    /// (radius, log residual of the two-term fit).
    std::vector<std::pair<double, double>> residuals;
};

/// Tail of the leaf as a normal graph over the cone, fitted on the outer two decades.
/// Throws InsufficientTail.
LeafGraphFit fit_leaf_asymptotics(const ProfileCurve& curve, const SpectralTable& spectrum);

nlohmann::json to_json(const LeafGraphFit& fit);
std::string to_csv(const ProfileCurve& curve);

/// The pair H_+, H_- with the spectral data, enough to evaluate the foliation parameter.
class Foliation {
public:
    Foliation(ProfileCurve plus, ProfileCurve minus, SpectralTable spectrum);
    /// Solves both leaves.
    explicit Foliation(const ConeSpec& cone, double s_max = 1e4);

    const ProfileCurve& leaf(int sign) const { return sign > 0 ? plus_ : minus_; }
    const SpectralTable& spectrum() const { return spectrum_; }
    const ConeSpec& cone() const { return spectrum_.cone; }
    double gamma() const { return spectrum_.gamma(); }

    /// Unique t with (u, v) on H(t). Throws OutOfDomain at the origin.
    double parameter(double u, double v) const;

private:
    ProfileCurve plus_;
    ProfileCurve minus_;
    SpectralTable spectrum_;
};

/// Cone-distance tolerance below which a point is reported on the cone (t = 0).
inline constexpr double kOnConeTolerance = 1e-10;

/// Foliation parameter of (x, y) in R^{n+1} x R^l; y does not enter.
double foliation_parameter(std::span<const double> x, std::span<const double> y,
                           const Foliation& foliation);

/// t for a single leaf: (u, v) lies on c * curve, t = (c u0)^{1-gamma}, signed by the leaf.
double leaf_parameter(const ProfileCurve& curve, double u, double v);

struct PhiExpansion {
    std::vector<double> eps_list;
    /// Dilation applied to H_+ so its leading coefficient against psi_1 is 1.
    double normalization = 1.0;
    /// Cone-foot radii of the sample points (on the normalized leaf).
    std::vector<double> radii;
    std::vector<double> phi_plus;
    /// phi_eps[k][i] = Phi_{eps_k,+} at sample i.
    std::vector<std::vector<double>> phi_eps;
    /// v_eps[k][i] = (Phi_{eps_k} - eps_k Phi_+) / eps_k^2.
    std::vector<std::vector<double>> v_eps;
    /// Phi_+ / (r^gamma psi_1).
    std::vector<double> tail_ratio;
    /// sup_i |Phi_eps - eps Phi_+| / r^gamma for each eps.
    std::vector<double> remainder_sup;
    /// Least-squares slope of log remainder_sup against log eps.
    double remainder_order = 0.0;
};

/// Normal graph of (1+eps)H_+ over H_+ for each eps, with Phi_+ by Richardson
/// extrapolation of central differences in eps. Throws GraphFailure.
PhiExpansion phi_expansion(const ProfileCurve& curve, std::span<const double> eps_list,
                           double r_lo = 10.0, double r_hi = 100.0, int max_points = 60);

/// Normal displacement from the curve (at sample i) to the leaf with parameter ratio
/// `target` relative to the curve, i.e. to ((target)^{1/(1-gamma)}) * curve.
double normal_graph_to_dilate(const ProfileCurve& curve, std::size_t i, double dilation);

/// Density ratio of H x R^l in B_R: mass / (omega_{n+l} R^{n+l}). l < 0 uses cone.l.
double density_ratio(const ProfileCurve& curve, double R, int l = -1);

} // namespace conelab
