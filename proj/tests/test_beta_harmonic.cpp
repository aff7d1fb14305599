#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "conelab/beta_harmonic.hpp"
#include "conelab/errors.hpp"

using namespace conelab;

namespace {

RPoly poly_of(int l, std::initializer_list<std::pair<Monomial, Rational>> terms)
{
    RPoly p{l, {}};
    for (const auto& [m, c] : terms) p.add(m, c);
    return p;
}

// r^{-1-beta} d_r(r^{1+beta} d_r h) + Delta_y h by fourth-order central differences.
double fd_beta_laplacian(const BetaPoly& h, double beta, double r, std::vector<double> y)
{
    const double e = 2e-3;
    auto line = [&](auto&& g) {
        const double g0 = 2 * g(0.0);
        const double d1 = (8 * (g(e) - g(-e)) - (g(2 * e) - g(-2 * e))) / (12 * e);
        const double d2 = (16 * ((g(e) + g(-e)) - g0) - ((g(2 * e) + g(-2 * e)) - g0)) / (12 * e * e);
        return std::pair{d1, d2};
    };
    const auto [hr, hrr] = line([&](double s) { return h(r + s, y); });
    double v = hrr + (1 + beta) / r * hr;
    for (std::size_t i = 0; i < y.size(); ++i)
        v += line([&](double s) {
                 auto yy = y;
                 yy[i] += s;
                 return h(r, yy);
             }).second;
    return v;
}

std::vector<ModeRequest> random_spec(std::mt19937_64& rng, int l)
{
    std::uniform_int_distribution<int> count(2, 4), jd(1, 3), deg(0, 3);
    std::normal_distribution<double> coeff(0.0, 1.0);
    std::vector<ModeRequest> spec;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        ModeRequest m{jd(rng), deg(rng), coeff(rng), 0};
        m.index = std::uniform_int_distribution<int>(0, beta_kernel_dimension(l, m.degree) - 1)(rng);
        spec.push_back(m);
    }
    return spec;
}

} // namespace

TEST_CASE("beta-harmonic representatives for beta = 1, l = 1")
{
    const std::vector<BetaPoly> basis = beta_basis(1.0, 1, 2);
    REQUIRE(basis.size() == 3);
    CHECK(basis[0].raw().terms == poly_of(1, {{{0, {0}}, 1}}).terms);
    CHECK(basis[1].raw().terms == poly_of(1, {{{0, {1}}, 1}}).terms);
    CHECK(basis[2].raw().terms == poly_of(1, {{{0, {2}}, 1}, {{1, {0}}, Rational(-1, 3)}}).terms);
    CHECK(beta_kernel_dimension(1, 2) == 1);
    for (int q = 0; q <= 8; ++q) CHECK(beta_kernel_dimension(2, q) == q + 1);
    CHECK(beta_kernel_dimension(0, 0) == 1);
    CHECK(beta_kernel_dimension(0, 2) == 0);
    CHECK(beta_basis(2.5, 0, 6).size() == 1);
}

TEST_CASE("beta operator on monomials")
{
    for (const Rational beta : {Rational(1), Rational(5), Rational(7, 3)}) {
        const RPoly r2 = poly_of(1, {{{1, {0}}, 1}});
        const RPoly out = beta_apply(beta, r2);
        CHECK(out.terms == poly_of(1, {{{0, {0}}, 2 * (2 + beta)}}).terms);
        CHECK(beta_apply(beta, poly_of(2, {{{0, {0, 0}}, 7}})).is_zero());
    }
    CHECK(beta_apply(Rational(1), poly_of(1, {{{0, {2}}, 1}, {{1, {0}}, Rational(-1, 3)}})).is_zero());
    CHECK_FALSE(beta_apply(Rational(2), poly_of(1, {{{0, {2}}, 1}, {{1, {0}}, Rational(-1, 3)}})).is_zero());
    // r^4 y: 4(4+beta) r^2 y.
    const RPoly r4y = beta_apply(Rational(3), poly_of(1, {{{2, {1}}, 1}}));
    CHECK(r4y.terms == poly_of(1, {{{1, {1}}, 28}}).terms);
}

TEST_CASE("basis is exactly beta-harmonic and matches a finite-difference operator")
{
    for (double beta : {1.0, 5.0, 0.5, 2 * std::sqrt(2.0), 2 * std::sqrt(3.25)})
        for (int l : {1, 2}) {
            const auto basis = beta_basis(beta, l, 6);
            int expected = 0;
            for (int q = 0; q <= 6; ++q) expected += beta_kernel_dimension(l, q);
            CHECK(static_cast<int>(basis.size()) == expected);
            for (const BetaPoly& b : basis) {
                CHECK(beta_apply(b).is_zero());
                CHECK(b.raw().degree() == b.degree());
                for (const auto& [mono, c] : b.raw().terms) CHECK(mono.degree() == b.degree());
                const double scale = b(0.7, std::vector<double>(l, 0.6));
                CHECK(std::abs(fd_beta_laplacian(b, beta, 0.7, std::vector<double>(l, 0.4))) <
                      1e-4 * std::max(1.0, std::abs(scale)));
            }
        }
    CHECK(beta_basis(Rational(5), 1, 3).front().beta() == 5);
    CHECK_THROWS_AS(beta_basis(0.0, 1, 2), InvalidArgument);
    CHECK_THROWS_AS(beta_basis(1.0, -1, 2), InvalidArgument);
}

TEST_CASE("exact rationals from doubles")
{
    CHECK(exact_rational(0.5) == Rational(1, 2));
    CHECK(exact_rational(-3.0) == Rational(-3));
    CHECK(exact_rational(0.1).convert_to<double>() == 0.1);
    CHECK(exact_rational(std::sqrt(2.0)).convert_to<double>() == std::sqrt(2.0));
    CHECK(exact_rational(0.0) == 0);
}

TEST_CASE("hemisphere moments: closed form against cubature")
{
    for (int l : {1, 2, 3})
        for (double c : {0.0, 1.0, 2.0, 3.5, 6.656854}) {
            std::vector<int> m(l, 0);
            m[0] = 2;
            if (l > 1) m[l - 1] += 2;
            const double exact = hemisphere_moment(l, c, m);
            const double quad = hemisphere_integral(l, [&](std::span<const double> w) {
                double v = std::pow(w[0], c);
                for (int i = 0; i < l; ++i) v *= std::pow(w[i + 1], m[i]);
                return v;
            });
            CHECK(quad == doctest::Approx(exact).epsilon(1e-10));
        }
    const int odd[] = {1, 2};
    CHECK(hemisphere_moment(2, 1.0, odd) == 0.0);
    // Area of the half circle and of the half 2-sphere.
    const int none1[] = {0};
    const int none2[] = {0, 0};
    CHECK(hemisphere_moment(1, 0.0, none1) == doctest::Approx(std::numbers::pi));
    CHECK(hemisphere_moment(2, 0.0, none2) == doctest::Approx(2 * std::numbers::pi));
}

TEST_CASE("basis is orthonormal in the weighted hemisphere norm")
{
    for (double beta : {1.0, 2 * std::sqrt(2.0)})
        for (int l : {1, 2}) {
            const auto basis = beta_basis(beta, l, 6);
            for (std::size_t i = 0; i < basis.size(); ++i)
                for (std::size_t k = 0; k <= i; ++k) {
                    const double ip = hemisphere_inner(basis[i], basis[k]);
                    CHECK(std::abs(ip - (i == k ? 1.0 : 0.0)) < 1e-8);
                }
        }
}

TEST_CASE("mean-value equality")
{
    for (double beta : {1.0, 5.0, 2 * std::sqrt(2.0)})
        for (int l : {1, 2}) {
            for (const BetaPoly& b : beta_basis(beta, l, 6))
                for (double rho : {0.5, 1.0, 3.0}) {
                    const auto [lhs, rhs] = mean_value_check(b, rho);
                    CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(lhs)));
                }
        }
    const BetaPoly one = beta_basis(1.0, 1, 0).front();
    const auto [l1, r1] = mean_value_check(one, 2.0);
    CHECK(l1 == doctest::Approx(one.normalization()));
    CHECK(r1 == doctest::Approx(l1).epsilon(1e-12));
    // A non-harmonic polynomial breaks the identity.
    const BetaPoly r2(Rational(1), poly_of(1, {{{1, {0}}, 1}}), 2, 1.0);
    const auto [l2, r2v] = mean_value_check(r2, 1.0);
    CHECK(l2 == 0.0);
    CHECK(r2v > 0.1);
}

TEST_CASE("hemisphere eigen-relation")
{
    for (double beta : {1.0, 5.0, 2 * std::sqrt(2.0)})
        for (int l : {1, 2})
            for (const BetaPoly& b : beta_basis(beta, l, 6)) CHECK(sphere_eigencheck(b) < 1e-4);
    CHECK(sphere_eigencheck(beta_basis(1.0, 1, 0).front()) == 0.0);
    CHECK(sphere_eigencheck(beta_basis(3.0, 0, 3).front()) == 0.0);
    // Wrong degree label gives a wrong eigenvalue.
    const BetaPoly y = beta_basis(1.0, 1, 1).back();
    const BetaPoly mislabeled(y.beta(), y.raw(), 2, y.normalization());
    CHECK(sphere_eigencheck(mislabeled) > 0.1);
    CHECK_THROWS_AS(sphere_eigencheck(beta_basis(1.0, 3, 1).back()), UnsupportedDimension);
}

TEST_CASE("field synthesis")
{
    const ConeSpec cone(3, 3, 1);
    const JacobiField zero = synthesize_field(cone, {});
    CHECK(zero.is_zero());
    CHECK(zero({0.5, 0.3, 1.0, {0.2}}) == 0.0);

    const ModeRequest lowest[] = {{1, 0, 2.5, 0}};
    const JacobiField f = synthesize_field(cone, lowest);
    const double phi0 = beta_basis(1.0, 1, 0).front().normalization();
    for (double r : {0.1, 0.5, 2.0})
        CHECK(f({r, 0.4, 2.0, {0.3}}) == doctest::Approx(2.5 * phi0 * std::pow(r, -2.0) * cone.psi1()));

    const ModeRequest mixed[] = {{2, 0, 1.0, 0}, {1, 2, -1.0, 0}, {1, 0, 1.0, 0}};
    const JacobiField g = synthesize_field(cone, mixed);
    std::vector<double> q;
    for (const FieldMode& m : g.modes()) q.push_back(m.homogeneity);
    CHECK(q == std::vector<double>{-2.0, 0.0, 0.0});
    CHECK(g.homogeneities() == std::vector<double>{-2.0, 0.0});
    CHECK(g.modes()[0].poly.beta_value() == 1.0);
    for (const FieldMode& m : g.modes()) CHECK(m.poly.beta_value() == doctest::Approx(m.j == 1 ? 1.0 : 5.0));

    const ModeRequest twice[] = {{1, 1, 1.0, 0}, {1, 1, 0.5, 0}};
    CHECK(synthesize_field(cone, twice).modes().size() == 1);
    CHECK(synthesize_field(cone, twice).modes()[0].coeff == 1.5);

    const ModeRequest bad_j[] = {{0, 0, 1.0, 0}};
    const ModeRequest bad_deg[] = {{1, kMaxFieldDegree + 1, 1.0, 0}};
    const ModeRequest bad_index[] = {{1, 2, 1.0, 1}};
    CHECK_THROWS_AS(synthesize_field(cone, bad_j), UnknownMode);
    CHECK_THROWS_AS(synthesize_field(cone, bad_deg), UnknownMode);
    CHECK_THROWS_AS(synthesize_field(cone, bad_index), UnknownMode);
}

TEST_CASE("norm identity for single and orthogonal modes")
{
    const ConeSpec cone(3, 3, 1);
    const std::vector<double> rho{0.1, 0.25, 0.5, 0.75, 1.0};
    const ModeRequest single[] = {{1, 0, 1.7, 0}};
    for (const NormSample& s : field_norm_profile(synthesize_field(cone, single), rho)) {
        CHECK(s.closed_form == doctest::Approx(1.7 * 1.7 / 4 * std::pow(s.rho, 4)).epsilon(1e-12));
        CHECK(s.rel_err <= 1e-4);
        CHECK(s.scaled == doctest::Approx(1.7 * 1.7 / 4).epsilon(1e-6));
    }
    const JacobiField zero = synthesize_field(cone, {});
    for (const NormSample& s : field_norm_profile(zero, rho)) CHECK(s.integral == 0.0);

    const ModeRequest a[] = {{1, 2, 0.8, 0}};
    const ModeRequest b[] = {{2, 1, -1.3, 0}};
    const ModeRequest ab[] = {{1, 2, 0.8, 0}, {2, 1, -1.3, 0}};
    const auto pa = field_norm_profile(synthesize_field(cone, a), rho);
    const auto pb = field_norm_profile(synthesize_field(cone, b), rho);
    const auto pab = field_norm_profile(synthesize_field(cone, ab), rho);
    for (std::size_t i = 0; i < rho.size(); ++i)
        CHECK(pab[i].integral == doctest::Approx(pa[i].integral + pb[i].integral).epsilon(1e-8));
    CHECK_THROWS_AS(field_norm_profile(zero, std::vector<double>{1.5}), InvalidArgument);
}

TEST_CASE("norm identity and monotonicity on random fields")
{
    std::mt19937_64 rng(20240611);
    std::vector<double> rho;
    for (int i = 1; i <= 10; ++i) rho.push_back(0.1 * i);
    for (int l : {1, 2}) {
        const ConeSpec cone(3, 3, l);
        for (int trial = 0; trial < 10; ++trial) {
            const auto spec = random_spec(rng, l);
            const JacobiField f = synthesize_field(cone, spec);
            const auto prof = field_norm_profile(f, rho);
            for (std::size_t i = 0; i < prof.size(); ++i) {
                CHECK(prof[i].rel_err <= 1e-4);
                if (i > 0) CHECK(prof[i].scaled >= prof[i - 1].scaled * (1 - 1e-10));
            }
        }
    }
}

TEST_CASE("sup and L2 norms are comparable")
{
    std::mt19937_64 rng(99);
    const ConeSpec cone(3, 3, 1);
    const std::vector<double> one{1.0};
    double c = 0.0, smallest = 1e300;
    for (int trial = 0; trial < 50; ++trial) {
        const JacobiField raw = synthesize_field(cone, random_spec(rng, 1));
        const double s = scaled_sup(raw, 1.0);
        std::vector<FieldMode> modes = raw.modes();
        for (FieldMode& m : modes) m.coeff /= s;
        const JacobiField f(cone, modes);
        CHECK(scaled_sup(f, 1.0) == doctest::Approx(1.0));
        const double l2 = field_norm_profile(f, one)[0].integral;
        const double ratio = std::pow(scaled_sup(f, 0.5), 2) / l2;
        c = std::max(c, ratio);
        smallest = std::min(smallest, l2);
    }
    MESSAGE("fitted sup/L2 constant: " << c);
    CHECK(std::isfinite(c));
    CHECK(c < 1e3);
    CHECK(smallest > 0.0);
}

TEST_CASE("standard grid and exports")
{
    const ConeSpec cone(3, 3, 1);
    const auto grid = standard_grid(cone, 2.0);
    CHECK(grid.size() == 64u * 32u * 16u);
    for (const ConePoint& x : grid) CHECK(x.r * x.r + x.y[0] * x.y[0] <= 4.0 * (1 + 1e-12));
    CHECK(standard_grid(ConeSpec(3, 3, 0), 1.0).size() == 64u * 32u);

    const nlohmann::json j = to_json(beta_basis(1.0, 1, 2).back());
    CHECK(j["beta"] == 1.0);
    CHECK(j["degree"] == 2);
    CHECK(j["monomials"].size() == 2);
    CHECK(j["monomials"][1]["num"] == -1);
    CHECK(j["monomials"][1]["den"] == 3);
    CHECK(j.contains("normalization"));
    // Exact round trip, with integers beyond 64 bits written as strings.
    const BetaPoly big = beta_basis(2 * std::sqrt(2.0), 2, 6).back();
    auto as_int = [](const nlohmann::json& v) {
        return v.is_string() ? boost::multiprecision::cpp_int(v.get<std::string>())
                             : boost::multiprecision::cpp_int(v.get<long long>());
    };
    for (const auto& t : to_json(big)["monomials"]) {
        const Monomial mono{t["a"].get<int>(), t["m"].get<std::vector<int>>()};
        CHECK(Rational(as_int(t["num"]), as_int(t["den"])) == big.raw().terms.at(mono));
    }
    const Rational huge(boost::multiprecision::cpp_int("123456789012345678901234567891"), 7);
    const nlohmann::json hj = to_json(BetaPoly(Rational(1), poly_of(1, {{{0, {0}}, huge}}), 0, 1.0));
    CHECK(hj["monomials"][0]["num"] == "123456789012345678901234567891");
    CHECK(hj["monomials"][0]["den"] == 7);

    const ModeRequest spec[] = {{1, 0, 1.0, 0}, {2, 1, 0.5, 0}};
    const nlohmann::json fj = to_json(synthesize_field(cone, spec));
    CHECK(fj["modes"].size() == 2);
    CHECK(fj["gamma"] == doctest::Approx(-2.0));
}
