#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <numbers>

#include "conelab/cone_spectrum.hpp"
#include "conelab/errors.hpp"

using namespace conelab;

namespace {

// Brute force: every (k, m) with k, m <= 10, mu from the radii directly,
// bucketed by exact rational value mu * p * q (an integer for these cones).
std::map<long long, long long> brute_force_spectrum(int p, int q)
{
    const double a2 = static_cast<double>(p) / (p + q);
    const double b2 = static_cast<double>(q) / (p + q);
    std::map<long long, long long> buckets;
    for (int k = 0; k <= 10; ++k)
        for (int m = 0; m <= 10; ++m) {
            const double mu = k * (k + p - 1) / a2 + m * (m + q - 1) / b2;
            buckets[std::llround(mu * p * q)] +=
                harmonic_dimension(p, k) * harmonic_dimension(q, m);
        }
    return buckets;
}

} // namespace

TEST_CASE("C33 first two eigenvalues and multiplicities")
{
    const auto t = link_spectrum(ConeSpec(3, 3), 2);
    REQUIRE(t.entries.size() == 2);
    CHECK(t.entries[0].lambda == doctest::Approx(-6.0).epsilon(1e-15));
    CHECK(t.entries[0].multiplicity == 1);
    CHECK(t.entries[0].mu == 0.0);
    CHECK(t.entries[1].lambda == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(t.entries[1].lambda) < 1e-13);
    CHECK(t.entries[1].multiplicity == 8);
}

TEST_CASE("C22 lowest eigenvalue")
{
    const auto t = link_spectrum(ConeSpec(2, 2), 1);
    CHECK(t.entries[0].lambda == -4.0);
}

TEST_CASE("closed form spectrum matches brute force enumeration")
{
    for (auto [p, q] : {std::pair{3, 3}, {1, 5}, {2, 4}, {3, 4}, {2, 6}}) {
        const auto oracle = brute_force_spectrum(p, q);
        const int jmax = 6;
        const auto t = link_spectrum(ConeSpec(p, q), jmax);
        auto it = oracle.begin();
        for (int j = 0; j < jmax; ++j, ++it) {
            CAPTURE(p);
            CAPTURE(q);
            CAPTURE(j);
            CHECK(std::llround(t.entries[j].mu * p * q) == it->first);
            CHECK(t.entries[j].multiplicity == it->second);
        }
    }
}

TEST_CASE("growth exponents for C33")
{
    const auto t = spectral_table(ConeSpec(3, 3), 2);
    CHECK(t.entry(1).gamma_plus == -2.0);
    CHECK(t.entry(1).gamma_minus == -3.0);
    CHECK(t.entry(1).beta == 1.0);
    CHECK(t.entry(2).gamma_plus == doctest::Approx(0.0));
    CHECK(std::abs(t.entry(2).gamma_plus) < 1e-15);
    CHECK(t.entry(2).gamma_minus == doctest::Approx(-5.0).epsilon(1e-15));
    CHECK(t.entry(2).beta == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(t.gamma() == -2.0);
}

TEST_CASE("exponent invariants hold for every entry")
{
    for (auto [p, q] : {std::pair{3, 3}, {1, 5}, {3, 4}, {4, 4}, {1, 7}}) {
        const ConeSpec c(p, q);
        const auto t = spectral_table(c, 8);
        CHECK(t.entry(1).lambda == doctest::Approx(-(c.n() - 1.0)).epsilon(1e-15));
        for (int j = 2; j <= 8; ++j) CHECK(t.entry(j).lambda > t.entry(j - 1).lambda);
        const double half = (c.n() - 2) / 2.0;
        for (const auto& e : t.entries) {
            CHECK(e.gamma_plus + e.gamma_minus == doctest::Approx(-(c.n() - 2.0)).epsilon(1e-14));
            CHECK(std::abs(e.gamma_plus * e.gamma_minus + e.lambda) < 1e-12);
            CHECK(e.beta == doctest::Approx(e.gamma_plus - e.gamma_minus).epsilon(1e-14));
            CHECK(e.beta == doctest::Approx(2 * std::sqrt(half * half + e.lambda)).epsilon(1e-15));
            CHECK(e.beta >= 0.0);
            CHECK(radial_jacobi_coefficient(t, e.j, e.gamma_plus) == doctest::Approx(0.0).scale(1.0));
            CHECK(std::abs(radial_jacobi_coefficient(t, e.j, e.gamma_minus)) < 1e-12);
        }
    }
}

TEST_CASE("lambda = 0 gives gamma_plus = 0")
{
    for (int p = 1; p <= 5; ++p) {
        const auto t = spectral_table(ConeSpec(p, 7 - p), 2);
        CHECK(std::abs(t.entry(2).lambda) < 1e-13);
        CHECK(std::abs(t.entry(2).gamma_plus) < 1e-13);
    }
}

TEST_CASE("strict stability classifier")
{
    CHECK(check_strict_stability(ConeSpec(3, 3)).strictly_stable);
    CHECK(check_strict_stability(ConeSpec(3, 3)).radicand == 0.25);
    CHECK_FALSE(check_strict_stability(ConeSpec(2, 2)).strictly_stable);
    CHECK(check_strict_stability(ConeSpec(2, 2)).radicand == -1.75);
    for (int p = 1; p <= 8; ++p)
        for (int q = 1; q <= 8; ++q) {
            const int n = p + q + 1;
            CHECK(check_strict_stability(ConeSpec(p, q)).strictly_stable == (n * n - 8 * n + 8 > 0));
            CHECK(check_strict_stability(ConeSpec(p, q)).strictly_stable == (p + q >= 6));
        }
    CHECK_THROWS_AS(spectral_table(ConeSpec(2, 2), 1), NotStrictlyStable);
    CHECK_THROWS_AS(spectral_table(ConeSpec(1, 4), 1), NotStrictlyStable);
}

TEST_CASE("radial Jacobi coefficient examples")
{
    const auto t = spectral_table(ConeSpec(3, 3), 2);
    CHECK(radial_jacobi_coefficient(t, 1, -2.0) == 0.0);
    CHECK(radial_jacobi_coefficient(t, 1, -1.5) == 0.75);
    CHECK(radial_jacobi_coefficient(t, 1, -3.0) == 0.0);
}

TEST_CASE("link geometry of C33")
{
    const ConeSpec c(3, 3);
    CHECK(c.link_area() == doctest::Approx(std::pow(std::numbers::pi, 4) / 2).epsilon(1e-14));
    CHECK(c.density() == doctest::Approx(1.4725).epsilon(1e-4));
    CHECK(c.a() * c.a() + c.b() * c.b() == doctest::Approx(1.0));
    // The constant eigenfunction is psi_1 = |Sigma|^{-1/2}.
    const auto t = spectral_table(c, 3);
    const auto psi1 = link_eigenfunction(t, 1);
    CHECK(psi1(0.3, 2.1) == doctest::Approx(c.psi1()).epsilon(1e-13));
}

TEST_CASE("representative eigenfunctions are orthonormal and satisfy the eigen equation")
{
    for (auto [p, q] : {std::pair{3, 3}, {1, 5}, {2, 4}}) {
        const ConeSpec c(p, q);
        const auto t = spectral_table(c, 4);
        for (int i = 1; i <= 4; ++i)
            for (int j = 1; j <= 4; ++j) {
                const auto fi = link_eigenfunction(t, i);
                const auto fj = link_eigenfunction(t, j);
                const double ip = integrate_over_link(
                    c, [&](double t1, double t2) { return fi(t1, t2) * fj(t1, t2); });
                CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
            }
        // Laplacian on S^p(a) of a zonal function f(t): (f'' + (p-1) cot t f') / a^2.
        for (int j = 1; j <= 4; ++j) {
            const auto f = link_eigenfunction(t, j);
            const double h = 1e-3;
            for (double t1 : {0.4, 1.3, 2.2})
                for (double t2 : {0.7, 1.9}) {
                    auto d2 = [&](auto g, double x) {
                        return (-g(x + 2 * h) + 16 * g(x + h) - 30 * g(x) + 16 * g(x - h) - g(x - 2 * h)) /
                               (12 * h * h);
                    };
                    auto d1 = [&](auto g, double x) {
                        return (-g(x + 2 * h) + 8 * g(x + h) - 8 * g(x - h) + g(x - 2 * h)) / (12 * h);
                    };
                    auto g1 = [&](double x) { return f(x, t2); };
                    auto g2 = [&](double x) { return f(t1, x); };
                    const double lap =
                        (d2(g1, t1) + (p - 1) / std::tan(t1) * d1(g1, t1)) / (c.a() * c.a()) +
                        (d2(g2, t2) + (q - 1) / std::tan(t2) * d1(g2, t2)) / (c.b() * c.b());
                    CHECK(lap == doctest::Approx(-t.entry(j).mu * f(t1, t2)).scale(1.0).epsilon(1e-6));
                }
        }
    }
}

TEST_CASE("serialization")
{
    const auto t = spectral_table(ConeSpec(3, 3), 5);
    const auto j = to_json(t);
    REQUIRE(j.size() == 5);
    CHECK(j[0]["gamma_plus"] == -2.0);
    CHECK(j[1]["multiplicity"] == 8);
    const auto csv = to_csv(t);
    CHECK(csv.rfind("j,mu,lambda,gamma_plus,gamma_minus,beta,multiplicity,k,m\n", 0) == 0);
    CHECK(csv.find("\n1,0,-6,-2,-3,1,1,0,0\n") != std::string::npos);
}

TEST_CASE("invalid inputs")
{
    CHECK_THROWS_AS(ConeSpec(0, 3), InvalidArgument);
    CHECK_THROWS_AS(link_spectrum(ConeSpec(3, 3), 0), InvalidArgument);
    CHECK_THROWS_AS(spectral_table(ConeSpec(3, 3), 2).entry(3), UnknownMode);
}
