#include "conelab/cone_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "conelab/errors.hpp"
#include "conelab/format.hpp"

namespace conelab {

ConeSpec::ConeSpec(int p_, int q_, int l_) : p(p_), q(q_), l(l_)
{
    if (p < 1 || q < 1 || l < 0)
        throw InvalidArgument("cone requires p, q >= 1 and l >= 0");
}

double ConeSpec::a() const { return std::sqrt(static_cast<double>(p) / (p + q)); }
double ConeSpec::b() const { return std::sqrt(static_cast<double>(q) / (p + q)); }
double ConeSpec::ray_angle() const { return std::atan2(b(), a()); }

double ConeSpec::link_area() const
{
    return unit_sphere_area(p) * std::pow(a(), p) * unit_sphere_area(q) * std::pow(b(), q);
}

double ConeSpec::psi1() const { return 1.0 / std::sqrt(link_area()); }

double ConeSpec::density() const { return link_area() / (n() * unit_ball_volume(n())); }

double unit_sphere_area(int k)
{
    const double d = k + 1.0;
    return 2.0 * std::pow(std::numbers::pi, d / 2) / std::tgamma(d / 2);
}

double unit_ball_volume(int k)
{
    return std::pow(std::numbers::pi, k / 2.0) / std::tgamma(k / 2.0 + 1.0);
}

long long harmonic_dimension(int d, int k)
{
    auto binom = [](long long n, long long r) -> long long {
        if (r < 0 || n < r) return 0;
        long long v = 1;
        for (long long i = 1; i <= r; ++i) v = v * (n - r + i) / i;
        return v;
    };
    return binom(k + d, d) - binom(k + d - 2, d);
}

const SpectralEntry& SpectralTable::entry(int j) const
{
    if (j < 1 || j > static_cast<int>(entries.size()))
        throw UnknownMode("spectral index " + std::to_string(j) + " not in table of size " +
                          std::to_string(entries.size()));
    return entries[j - 1];
}

namespace {

double link_laplace_eigenvalue(const ConeSpec& c, int k, int m)
{
    // mu(k, m) = k(k+p-1)/a^2 + m(m+q-1)/b^2 with a^2 = p/(p+q), b^2 = q/(p+q).
    const double s = c.p + c.q;
    return s * (static_cast<double>(k) * (k + c.p - 1) / c.p +
                static_cast<double>(m) * (m + c.q - 1) / c.q);
}

constexpr double kMuTolerance = 1e-12;

} // namespace

SpectralTable link_spectrum(const ConeSpec& cone, int j_max)
{
    if (j_max < 1) throw InvalidArgument("j_max must be >= 1");

    for (int K = j_max + 2;; K *= 2) {
        struct Raw {
            double mu;
            int k, m;
            long long mult;
        };
        std::vector<Raw> raw;
        for (int k = 0; k <= K; ++k)
            for (int m = 0; m <= K; ++m)
                raw.push_back({link_laplace_eigenvalue(cone, k, m), k, m,
                               harmonic_dimension(cone.p, k) * harmonic_dimension(cone.q, m)});
        std::sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) {
            if (x.mu != y.mu) return x.mu < y.mu;
            return x.k < y.k;
        });

        std::vector<SpectralEntry> distinct;
        for (const auto& r : raw) {
            if (!distinct.empty() && std::abs(r.mu - distinct.back().mu) <= kMuTolerance) {
                distinct.back().multiplicity += r.mult;
                continue;
            }
            SpectralEntry e;
            e.mu = r.mu;
            e.k = r.k;
            e.m = r.m;
            e.multiplicity = r.mult;
            distinct.push_back(e);
        }

        // Every (k, m) outside the box has mu >= min(mu(K+1, 0), mu(0, K+1)).
        const double frontier = std::min(link_laplace_eigenvalue(cone, K + 1, 0),
                                         link_laplace_eigenvalue(cone, 0, K + 1));
        if (static_cast<int>(distinct.size()) >= j_max &&
            distinct[j_max - 1].mu < frontier - kMuTolerance) {
            distinct.resize(j_max);
            SpectralTable table;
            table.cone = cone;
            for (int j = 0; j < j_max; ++j) {
                distinct[j].j = j + 1;
                distinct[j].lambda = distinct[j].mu - cone.link_sff_norm2();
                distinct[j].gamma_plus = distinct[j].gamma_minus = distinct[j].beta =
                    std::numeric_limits<double>::quiet_NaN();
            }
            table.entries = std::move(distinct);
            return table;
        }
    }
}

StabilityReport check_strict_stability(const ConeSpec& cone)
{
    const double half = (cone.n() - 2) / 2.0;
    const double lambda1 = -cone.link_sff_norm2();
    StabilityReport r;
    r.radicand = half * half + lambda1;
    r.strictly_stable = r.radicand > 0.0;
    return r;
}

SpectralTable growth_exponents(SpectralTable table)
{
    const double half = (table.cone.n() - 2) / 2.0;
    const double rad1 = half * half + table.entry(1).lambda;
    if (!(rad1 > 0.0)) {
        std::ostringstream os;
        os << "cone C_{" << table.cone.p << "," << table.cone.q
           << "} is not strictly stable (radicand " << rad1 << ")";
        throw NotStrictlyStable(os.str());
    }
    for (auto& e : table.entries) {
        const double root = std::sqrt(half * half + e.lambda);
        e.gamma_plus = -half + root;
        e.gamma_minus = -half - root;
        e.beta = 2.0 * root;
    }
    table.exponents_filled = true;
    return table;
}

SpectralTable spectral_table(const ConeSpec& cone, int j_max)
{
    return growth_exponents(link_spectrum(cone, j_max));
}

double radial_jacobi_coefficient(const SpectralTable& table, int j, double a_exp)
{
    return a_exp * (a_exp + table.cone.n() - 2) - table.entry(j).lambda;
}

double zonal_harmonic(int d, int k, double polar_angle)
{
    const double x = std::cos(polar_angle);
    if (k == 0) return 1.0;
    if (d == 1) return std::cos(k * polar_angle);
    // Gegenbauer C_k^{(d-1)/2}(x) by the three-term recurrence.
    const double lam = (d - 1) / 2.0;
    double c0 = 1.0;
    double c1 = 2.0 * lam * x;
    for (int i = 1; i < k; ++i) {
        const double c2 = (2.0 * (i + lam) * x * c1 - (i + 2.0 * lam - 1.0) * c0) / (i + 1.0);
        c0 = c1;
        c1 = c2;
    }
    return c1;
}

LinkEigenfunction::LinkEigenfunction(const ConeSpec& cone, int k, int m)
    : p_(cone.p), q_(cone.q), k_(k), m_(m), scale_(1.0)
{
    const double norm2 = integrate_over_link(cone, [&](double t1, double t2) {
        const double y = zonal_harmonic(p_, k_, t1) * zonal_harmonic(q_, m_, t2);
        return y * y;
    });
    scale_ = 1.0 / std::sqrt(norm2);
}

double LinkEigenfunction::operator()(double theta1, double theta2) const
{
    return scale_ * zonal_harmonic(p_, k_, theta1) * zonal_harmonic(q_, m_, theta2);
}

LinkEigenfunction link_eigenfunction(const SpectralTable& table, int j)
{
    const auto& e = table.entry(j);
    return LinkEigenfunction(table.cone, e.k, e.m);
}

nlohmann::json to_json(const SpectralTable& table)
{
    auto rows = nlohmann::json::array();
    for (const auto& e : table.entries) {
        rows.push_back({{"j", e.j},
                        {"mu", e.mu},
                        {"lambda", e.lambda},
                        {"gamma_plus", e.gamma_plus},
                        {"gamma_minus", e.gamma_minus},
                        {"beta", e.beta},
                        {"multiplicity", e.multiplicity},
                        {"k", e.k},
                        {"m", e.m}});
    }
    return rows;
}

std::string to_csv(const SpectralTable& table)
{
    std::ostringstream os;
    os << "j,mu,lambda,gamma_plus,gamma_minus,beta,multiplicity,k,m\n";
    for (const auto& e : table.entries) {
        os << e.j << ',' << fmt_real(e.mu) << ',' << fmt_real(e.lambda) << ','
           << fmt_real(e.gamma_plus) << ',' << fmt_real(e.gamma_minus) << ','
           << fmt_real(e.beta) << ',' << e.multiplicity << ',' << e.k << ',' << e.m << '\n';
    }
    return os.str();
}

} // namespace conelab
