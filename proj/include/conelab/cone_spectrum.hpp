#pragma once

#include <vector>

#include "json.hpp"

namespace conelab {

/// Generalized Simons cone C_{p,q} x R^l. The link is S^p(a) x S^q(b) inside
/// S^n with a^2 = p/(p+q), b^2 = q/(p+q) and n = p + q + 1.
struct ConeSpec {
    int p = 3;
    int q = 3;
    int l = 0;

    ConeSpec() = default;
    ConeSpec(int p_, int q_, int l_ = 0);

    int n() const { return p + q + 1; }
    double a() const;
    double b() const;
    /// Opening angle of the profile ray v/u = b/a in the (u, v) quadrant.
    double ray_angle() const;
    /// |A_Sigma|^2, constant on the link.
    double link_sff_norm2() const { return n() - 1.0; }
    /// |Sigma| = |S^p| a^p |S^q| b^q.
    double link_area() const;
    /// The constant first eigenfunction |Sigma|^{-1/2}.
    double psi1() const;
    /// theta_C(0) = |Sigma| / (n omega_n).
    double density() const;
};

/// Area of the unit sphere S^k in R^{k+1}.
double unit_sphere_area(int k);
/// Volume of the unit ball in R^k.
double unit_ball_volume(int k);

struct SpectralEntry {
    int j = 0;
    double mu = 0.0;
    double lambda = 0.0;
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
    double beta = 0.0;
    long long multiplicity = 0;
    int k = 0;
    int m = 0;
};

struct SpectralTable {
    ConeSpec cone;
    std::vector<SpectralEntry> entries;
    bool exponents_filled = false;

    const SpectralEntry& entry(int j) const;
    /// gamma = gamma_1^+.
    double gamma() const { return entry(1).gamma_plus; }
};

/// First `j_max` distinct eigenvalues of L = Delta_Sigma + |A_Sigma|^2 on the link.
SpectralTable link_spectrum(const ConeSpec& cone, int j_max);

/// Fills gamma_plus, gamma_minus, beta. Throws NotStrictlyStable when
/// ((n-2)/2)^2 + lambda_1 <= 0.
SpectralTable growth_exponents(SpectralTable table);

/// link_spectrum followed by growth_exponents.
SpectralTable spectral_table(const ConeSpec& cone, int j_max);

struct StabilityReport {
    bool strictly_stable = false;
    double radicand = 0.0;
};

StabilityReport check_strict_stability(const ConeSpec& cone);

/// kappa with L_{C_0}(r^a psi_j) = kappa r^{a-2} psi_j, i.e. a(a+n-2) - lambda_j.
double radial_jacobi_coefficient(const SpectralTable& table, int j, double a_exp);

/// Dimension of degree-k spherical harmonics on S^d.
long long harmonic_dimension(int d, int k);

/// Zonal degree-k harmonic on S^d as a function of the polar angle, unnormalized.
double zonal_harmonic(int d, int k, double polar_angle);

/// Unit L^2(Sigma) representative of the j-th eigenspace: the product of the
/// zonal harmonics of degrees (k, m) in the polar angles of the two factors.
class LinkEigenfunction {
public:
    LinkEigenfunction(const ConeSpec& cone, int k, int m);

    double operator()(double theta1, double theta2) const;
    int k() const { return k_; }
    int m() const { return m_; }

private:
    int p_, q_, k_, m_;
    double scale_;
};

LinkEigenfunction link_eigenfunction(const SpectralTable& table, int j);

/// Integral over Sigma of a function of the two polar angles (zonal in each
/// sphere factor), by Gauss-Legendre in the angles.
template <class F>
double integrate_over_link(const ConeSpec& cone, F&& f);

nlohmann::json to_json(const SpectralTable& table);
std::string to_csv(const SpectralTable& table);

} // namespace conelab

#include "conelab/detail/link_quadrature.hpp"
