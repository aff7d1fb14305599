#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"
#include "conelab/cone_spectrum.hpp"

namespace conelab {

using Rational = boost::multiprecision::cpp_rational;

/// r^{2a} y^m with m a multi-index of length l.
struct Monomial {
    int a = 0;
    std::vector<int> m;

    int degree() const;
    auto operator<=>(const Monomial&) const = default;
};

/// Polynomial in (r^2, y) with exact rational coefficients.
struct RPoly {
    int l = 0;
    std::map<Monomial, Rational> terms;

    bool is_zero() const { return terms.empty(); }
    /// Degree of the highest monomial, -1 for the zero polynomial.
    int degree() const;
    double operator()(double r, std::span<const double> y) const;
    void add(const Monomial& mono, const Rational& c);
};

/// Exact rational value of a double (every double is a dyadic rational).
Rational exact_rational(double x);

/// Homogeneous beta-harmonic polynomial of degree q. Its value is
/// normalization * raw(r, y), which has unit L^2(omega_1^{1+beta}) norm on S^l_+.
class BetaPoly {
public:
    BetaPoly(Rational beta, RPoly raw, int degree, double normalization);

    const Rational& beta() const { return beta_; }
    double beta_value() const { return beta_d_; }
    int l() const { return raw_.l; }
    int degree() const { return degree_; }
    const RPoly& raw() const { return raw_; }
    double normalization() const { return normalization_; }

    double operator()(double r, std::span<const double> y) const;

private:
    struct Term {
        int a;
        std::vector<int> m;
        double c;
    };
    Rational beta_;
    double beta_d_;
    RPoly raw_;
    int degree_;
    double normalization_;
    std::vector<Term> compiled_;
};

/// r^{-1-beta} d_r(r^{1+beta} d_r h) + Delta_y h, exact.
RPoly beta_apply(const Rational& beta, const RPoly& h);
RPoly beta_apply(const BetaPoly& poly);

/// Basis of the beta-harmonic homogeneous polynomials of every degree q <= q_max,
/// ordered by degree and orthonormal in L^2(omega_1^{1+beta}) on S^l_+.
std::vector<BetaPoly> beta_basis(const Rational& beta, int l, int q_max);
std::vector<BetaPoly> beta_basis(double beta, int l, int q_max);

/// Number of basis elements of exact degree q.
int beta_kernel_dimension(int l, int q);

/// Closed form of the integral over S^l_+ of omega_1^{c} prod omega_{i+1}^{m_i}.
double hemisphere_moment(int l, double c, std::span<const int> m);

/// Integral over S^l_+ by nested adaptive Gauss-Kronrod; f takes the point omega in R^{l+1}.
double hemisphere_integral(int l, const std::function<double(std::span<const double>)>& f,
                           double tol = 1e-12);

/// Integral over the half ball B_rho^+ = {(r, y): r > 0, r^2 + |y|^2 < rho^2}, in
/// polar coordinates about the origin. f takes (r, y).
double half_ball_integral(int l, double rho,
                          const std::function<double(double, std::span<const double>)>& f,
                          double tol = 1e-12);

/// (poly(0,0), weighted average of poly over B_rho^+ against r^{1+beta}).
std::pair<double, double> mean_value_check(const BetaPoly& poly, double rho);

/// Max over sample points of |omega_1^{-1-beta} div(omega_1^{1+beta} grad phi) + q(q+l+beta) phi|
/// for the restriction phi to S^l_+, by finite differences. l in {0, 1, 2}.
double sphere_eigencheck(const BetaPoly& poly);

/// Weighted L^2(omega_1^{1+beta}) inner product on S^l_+ by quadrature.
double hemisphere_inner(const BetaPoly& f, const BetaPoly& g);

struct FieldMode {
    int j = 1;
    BetaPoly poly;
    double coeff = 0.0;
    /// gamma_j + degree.
    double homogeneity = 0.0;
};

/// Requested mode: spectral index, degree, coefficient, and index within the degree.
struct ModeRequest {
    int j = 1;
    int degree = 0;
    double coeff = 0.0;
    int index = 0;
};

/// Point (r theta, y) of C = C_0 x R^l, theta given by its two polar angles.
struct ConePoint {
    double r = 1.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    std::vector<double> y;
};

/// v(r theta, y) = sum coeff r^{gamma_j} psi_j(theta) h(r, y).
class JacobiField {
public:
    JacobiField(const ConeSpec& cone, std::vector<FieldMode> modes);

    const ConeSpec& cone() const { return table_.cone; }
    const SpectralTable& table() const { return table_; }
    const std::vector<FieldMode>& modes() const { return modes_; }
    bool is_zero() const;
    double gamma() const { return table_.gamma(); }
    /// Distinct homogeneities of the nonzero modes, increasing.
    std::vector<double> homogeneities() const;

    double operator()(const ConePoint& x) const;
    /// Coefficient of psi_j: sum over modes of index j of coeff r^{gamma_j} h(r, y).
    double mode_sum(int j, double r, std::span<const double> y) const;

private:
    SpectralTable table_;
    std::vector<FieldMode> modes_;
    std::vector<LinkEigenfunction> psi_;
};

/// n_radii log-spaced cone radii in [r_lo, r_hi], 32 link points (8 x 4 polar angles
/// including the poles) and 16 y-points per radius with |(r, y)| <= R.
std::vector<ConePoint> sample_grid(const ConeSpec& cone, double r_lo, double r_hi, int n_radii, double R);

/// Standard sample grid of C intersect B_R: 64 log-spaced |x| in [1e-3 R, R], 32 link
/// points (8 x 4 polar angles including the poles), 16 y-points per radius.
std::vector<ConePoint> standard_grid(const ConeSpec& cone, double R);

/// sup over the standard grid of C intersect B_R of ||x|^{-gamma} v|.
double scaled_sup(const JacobiField& field, double R);

/// min of v over the standard grid of C intersect B_R.
double grid_min(const JacobiField& field, double R);

/// Highest supported polynomial degree in a synthesized field.
constexpr int kMaxFieldDegree = 12;

/// Throws UnknownMode for indices outside the spectral table or the degree's basis.
JacobiField synthesize_field(const ConeSpec& cone, std::span<const ModeRequest> spec);

struct NormSample {
    double rho = 0.0;
    double integral = 0.0;
    double closed_form = 0.0;
    double rel_err = 0.0;
    /// rho^{-n-l-2 gamma} times the integral.
    double scaled = 0.0;
};

/// Integral of v^2 over C intersect B_rho by quadrature, against sum a_i^2 rho^{n+l+2q_i}
/// with a_i^2 = sum of coeff^2 / (n + l + 2 q_i) over modes of homogeneity q_i. rho <= 1.
std::vector<NormSample> field_norm_profile(const JacobiField& field, std::span<const double> rho_list);

nlohmann::json to_json(const BetaPoly& poly);
nlohmann::json to_json(const JacobiField& field);

} // namespace conelab
