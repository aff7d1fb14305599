#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "conelab/errors.hpp"
#include "conelab/foliation.hpp"

using namespace conelab;

namespace {

const Foliation& c33()
{
    static const Foliation f(ConeSpec(3, 3));
    return f;
}

const ProfileCurve& c15_plus()
{
    static const ProfileCurve c = solve_profile(ConeSpec(1, 5), 1);
    return c;
}

// RK4 in arclength on (u, v, theta), independent of the library integrator.
std::array<double, 3> rk4(int p, int q, std::array<double, 3> y, double ds, int n)
{
    auto f = [&](const std::array<double, 3>& z) {
        return std::array<double, 3>{std::cos(z[2]), std::sin(z[2]),
                                     q * std::cos(z[2]) / z[1] - p * std::sin(z[2]) / z[0]};
    };
    const double h = ds / n;
    for (int i = 0; i < n; ++i) {
        auto k1 = f(y);
        std::array<double, 3> z;
        for (int c = 0; c < 3; ++c) z[c] = y[c] + 0.5 * h * k1[c];
        auto k2 = f(z);
        for (int c = 0; c < 3; ++c) z[c] = y[c] + 0.5 * h * k2[c];
        auto k3 = f(z);
        for (int c = 0; c < 3; ++c) z[c] = y[c] + h * k3[c];
        auto k4 = f(z);
        for (int c = 0; c < 3; ++c) y[c] += h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    }
    return y;
}

// From Cartesian (u, v) the height above the cone is only known to ~eps r, so the
// recovered parameter carries a relative error ~eps r / height on top of 1e-8.
double cartesian_tolerance(const ProfileCurve& c, std::size_t i)
{
    const double eps = std::numeric_limits<double>::epsilon();
    return 1e-8 + 4 * eps * c.radius(i) / std::abs(c.graph_height(i));
}

} // namespace

TEST_CASE("ODE sign is the one that makes the oracle vanish")
{
    CHECK(profile_ode_sign(3, 3) == 1);
    CHECK(profile_ode_sign(1, 5) == 1);
    CHECK(profile_ode_sign(5, 1) == 1);
}

TEST_CASE("axis series matches closed-form low-order coefficients")
{
    // theta = pi/2 + c1 s + c3 s^3 + c5 s^5 + ..., sign g = 1.
    for (auto [p, q] : std::vector<std::pair<int, int>>{{3, 3}, {1, 5}, {5, 1}, {2, 4}, {4, 3}}) {
        const AxisSeries s(p, q, 1);
        const double c1 = -1.0 * p / (q + 1);
        const double c3 = p * p * (p + q + 1.0) / (2.0 * (q + 1) * (q + 1) * (q + 3));
        const double c5 = -std::pow(p, 3) * (p + q + 1.0) *
                          (19.0 * p * q + 15.0 * q * q + 25 * p + 50 * q + 35) /
                          (40.0 * std::pow(q + 1, 4) * (q + 3) * (q + 5));
        CHECK(s.theta_coefficient(1) == doctest::Approx(c1).epsilon(1e-14));
        CHECK(s.theta_coefficient(3) == doctest::Approx(c3).epsilon(1e-13));
        CHECK(s.theta_coefficient(5) == doctest::Approx(c5).epsilon(1e-12));
        CHECK(s.theta_coefficient(2) == 0.0);
        CHECK(s.theta_coefficient(4) == 0.0);
    }
}

TEST_CASE("axis series agrees with direct integration away from the axis")
{
    const AxisSeries s(3, 3, 1);
    const double a = 0.01, b = 0.2;
    const auto [u0, v0] = s.position(a);
    const auto y = rk4(3, 3, {u0, v0, s.theta(a)}, b - a, 2000);
    const auto [u1, v1] = s.position(b);
    CHECK(std::abs(y[0] - u1) < 1e-11);
    CHECK(std::abs(y[1] - v1) < 1e-11);
    CHECK(std::abs(y[2] - s.theta(b)) < 1e-10);
    CHECK(s.position(0.0).first == 1.0);
    CHECK(s.position(0.0).second == 0.0);
}

TEST_CASE("C33 leaf: residual, side, tangent relation")
{
    const ProfileCurve& c = c33().leaf(1);
    CHECK(c.max_residual() < 1e-8);
    CHECK(c.max_radius() > 9e3);
    CHECK(c.u0() == 1.0);
    const auto samples = c.samples();
    const double slope = std::sqrt(3.0 / 3.0);
    for (const auto& x : samples) REQUIRE(x.v < slope * x.u);
    for (std::size_t i = 0; i < c.size(); ++i) REQUIRE(c.graph_height(i) > 0.0);
    // (u', v') = (cos theta, sin theta) from centred differences of the samples.
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < samples.size(); i += 7) {
        const double ds = samples[i + 1].s - samples[i - 1].s;
        const double du = (samples[i + 1].u - samples[i - 1].u) / ds;
        const double dv = (samples[i + 1].v - samples[i - 1].v) / ds;
        worst = std::max({worst, std::abs(du - std::cos(samples[i].theta)),
                          std::abs(dv - std::sin(samples[i].theta))});
    }
    CHECK(worst < 1e-5);
    // Near the axis the curve leaves perpendicularly.
    CHECK(samples.front().s <= 0.25);
    CHECK(samples.front().v == doctest::Approx(samples.front().s).epsilon(0.01));
    CHECK(std::abs(samples.front().theta - std::numbers::pi / 2) < 0.25);
}

TEST_CASE("C33 sign - is the mirror image")
{
    const ProfileCurve& a = c33().leaf(1);
    const ProfileCurve& b = c33().leaf(-1);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); i += 13) {
        const auto x = a.sample(i), y = b.sample(i);
        CHECK(std::abs(x.u - y.v) < 1e-9 * std::max(1.0, x.u));
        CHECK(std::abs(x.v - y.u) < 1e-9 * std::max(1.0, x.v));
        CHECK(std::abs(x.theta - (std::numbers::pi / 2 - y.theta)) < 1e-12);
        CHECK(b.graph_height(i) < 0.0);
    }
}

TEST_CASE("leaf residuals stay below 1e-8 across cones and sides")
{
    for (auto [p, q, s] : std::vector<std::tuple<int, int, int>>{{2, 4, 1}, {2, 4, -1}, {3, 4, -1}, {1, 6, 1}})
        CHECK(solve_profile(ConeSpec(p, q), s, 1e3).max_residual() < 1e-8);
    CHECK(c15_plus().max_residual() < 1e-8);
}

TEST_CASE("profile preconditions and failures")
{
    CHECK_THROWS_AS(solve_profile(ConeSpec(2, 2), 1), NotStrictlyStable);
    CHECK_THROWS_AS(solve_profile(ConeSpec(3, 3), 0), InvalidArgument);
    CHECK_THROWS_AS(solve_profile(ConeSpec(3, 3), 1, -1.0), InvalidArgument);
    CHECK_THROWS_AS(solve_profile(ConeSpec(3, 3), 1, 10.0, 1e-3), InvalidArgument);
    // The leaf capping on the axis of the 5-sphere side of C_{1,5} meets the cone.
    CHECK_THROWS_AS(solve_profile(ConeSpec(1, 5), -1), SideViolation);
}

TEST_CASE("tail fit recovers the spectral exponent")
{
    const SpectralTable t33 = spectral_table(ConeSpec(3, 3), 2);
    const LeafGraphFit f = fit_leaf_asymptotics(c33().leaf(1), t33);
    CHECK(std::abs(f.gamma_hat - t33.gamma()) < 1e-2);
    CHECK(f.a_hat > 0.0);
    CHECK(f.alpha0_hat > 0.0);
    CHECK(f.R0 >= 1.0);
    CHECK(f.residuals.size() >= 200);

    const LeafGraphFit m = fit_leaf_asymptotics(c33().leaf(-1), t33);
    CHECK(m.a_hat < 0.0);
    CHECK(std::abs(m.gamma_hat - t33.gamma()) < 1e-2);

    const SpectralTable t15 = spectral_table(ConeSpec(1, 5), 1);
    const LeafGraphFit g = fit_leaf_asymptotics(c15_plus(), t15);
    CHECK(std::abs(g.gamma_hat - t15.gamma()) < 1e-2);

    const LeafGraphFit s = fit_leaf_asymptotics(c33().leaf(1).scaled(2.0), t33);
    CHECK(s.gamma_hat == doctest::Approx(f.gamma_hat).epsilon(1e-9));
    CHECK(s.a_hat / f.a_hat == doctest::Approx(8.0).epsilon(1e-4));

    CHECK_THROWS_AS(fit_leaf_asymptotics(solve_profile(ConeSpec(3, 3), 1, 50.0), t33), InsufficientTail);
}

TEST_CASE("foliation parameter: cone, leaves, homogeneity")
{
    const Foliation& fol = c33();
    const double gamma = fol.gamma();
    CHECK(fol.parameter(2.0, 2.0) == 0.0);
    CHECK(fol.parameter(5.0, 5.0 + 1e-12) == 0.0);
    CHECK_THROWS_AS(fol.parameter(0.0, 0.0), OutOfDomain);

    for (int sign : {1, -1}) {
        const ProfileCurve& c = fol.leaf(sign);
        for (std::size_t i = 0; i < c.size(); i += 17) {
            const auto x = c.sample(i);
            CHECK(std::abs(fol.parameter(x.u, x.v) - sign) < cartesian_tolerance(c, i));
        }
    }
    // Points inside the series start-up region and on the axis.
    const AxisSeries series(3, 3, profile_ode_sign(3, 3));
    for (double s : {0.0, 0.01, 0.05}) {
        const auto [u, v] = series.position(s);
        CHECK(fol.parameter(u, v) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(fol.parameter(v, u) == doctest::Approx(-1.0).epsilon(1e-9));
    }

    const std::vector<std::pair<double, double>> pts{{1.3, 0.4}, {3.0, 2.5}, {0.2, 0.9}, {40.0, 39.9}};
    for (auto [u, v] : pts) {
        const double t = fol.parameter(u, v);
        for (double c : {0.5, 2.0, 10.0})
            CHECK(fol.parameter(c * u, c * v) == doctest::Approx(std::pow(c, 1 - gamma) * t).epsilon(1e-8));
    }

    // x in R^4 x R^4; y does not enter.
    const std::vector<double> x{1.0, 0.3, 0.0, 0.0, 0.4, 0.0, 0.0, 0.0};
    const std::vector<double> y{5.0, -3.0};
    CHECK(foliation_parameter(x, y, fol) == doctest::Approx(fol.parameter(std::hypot(1.0, 0.3), 0.4)));
    CHECK_THROWS_AS(foliation_parameter(std::vector<double>{1.0, 2.0}, y, fol), InvalidArgument);
}

TEST_CASE("scaling identity c H(1) = H(c^{1-gamma})")
{
    const Foliation& fol = c33();
    const double gamma = fol.gamma();
    for (double c : {0.5, 2.0, 10.0}) {
        const ProfileCurve h = fol.leaf(1).scaled(c);
        double worst = 0.0;
        for (std::size_t i = 0; i < h.size(); i += 7) {
            const auto x = h.sample(i);
            const double err = std::abs(fol.parameter(x.u, x.v) / std::pow(c, 1 - gamma) - 1.0);
            worst = std::max(worst, err / cartesian_tolerance(h, i));
        }
        CHECK(worst < 1.0);
        CHECK(leaf_parameter(h, h.sample(10).u, h.sample(10).v) == doctest::Approx(std::pow(c, 1 - gamma)));
    }
}

TEST_CASE("leaves are nested: distance to the cone grows with |t|")
{
    const Foliation& fol = c33();
    const double alpha = fol.cone().ray_angle();
    int failures = 0;
    for (int k = 0; k < 100; ++k) {
        const double R = std::pow(10.0, -1.0 + 4.0 * k / 99.0);
        for (int side : {1, -1}) {
            double prev = 0.0;
            for (int j = 1; j <= 40; ++j) {
                const double ang = alpha - side * (alpha * j / 41.0);
                const double t = side * fol.parameter(R * std::cos(ang), R * std::sin(ang));
                if (!(t > prev)) ++failures;
                prev = t;
            }
        }
    }
    CHECK(failures == 0);
}

TEST_CASE("density ratio: monotone, bounded, limit is the cone density")
{
    const ProfileCurve& c = c33().leaf(1);
    const double theta_c = c.cone().density();
    CHECK(theta_c == doctest::Approx(1.4725).epsilon(1e-4));
    double prev = 0.0;
    int drops = 0;
    for (int k = 0; k < 200; ++k) {
        const double R = std::pow(10.0, 4.0 * k / 199.0) * (k == 199 ? 0.99 : 1.0);
        const double d = density_ratio(c, R);
        if (d < prev * (1 - 1e-12)) ++drops;
        CHECK(d < 2 * theta_c);
        prev = d;
    }
    CHECK(drops == 0);
    CHECK(std::abs(density_ratio(c, 9e3) - theta_c) < 1e-3);
    CHECK(density_ratio(c, 0.5) == 0.0);
    // Product with a line: same limit.
    CHECK(std::abs(density_ratio(c, 5e3, 1) - theta_c) < 1e-3);
    CHECK(density_ratio(c, 3.0, 1) < density_ratio(c, 30.0, 1));
    CHECK_THROWS_AS(density_ratio(c, 1e6), InvalidArgument);

    const ProfileCurve& d = c15_plus();
    CHECK(std::abs(density_ratio(d, 9e3) - d.cone().density()) < 1e-3);
}

TEST_CASE("Phi expansion: tail law and second-order remainder")
{
    const std::vector<double> eps{0.01, 0.02, 0.04};
    const PhiExpansion e = phi_expansion(c33().leaf(1), eps);
    REQUIRE(!e.radii.empty());
    for (double v : e.phi_plus) CHECK(v > 0.0);
    for (std::size_t i = 0; i < e.radii.size(); ++i)
        if (e.radii[i] >= 30.0 && e.radii[i] <= 100.0) CHECK(std::abs(e.tail_ratio[i] / 3.0 - 1.0) < 0.02);
    CHECK(e.remainder_order >= 1.9);
    // V_eps bounded as eps shrinks.
    for (std::size_t i = 0; i < e.radii.size(); ++i)
        CHECK(std::abs(e.v_eps[0][i]) < 2 * std::abs(e.v_eps[2][i]) + 1e-12);

    const std::vector<double> zero{0.0};
    const PhiExpansion z = phi_expansion(c33().leaf(1), zero);
    for (double v : z.phi_eps[0]) CHECK(v == 0.0);

    const std::vector<double> big{0.2};
    CHECK_THROWS_AS(phi_expansion(c33().leaf(1), big), InvalidArgument);
    CHECK_THROWS_AS(normal_graph_to_dilate(c33().leaf(1), 0, 1e3), GraphFailure);
}

TEST_CASE("exports")
{
    const ProfileCurve& c = c33().leaf(1);
    const std::string csv = to_csv(c);
    CHECK(csv.rfind("s,u,v,theta,residual\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(c.size()) + 1);
    const auto j = to_json(fit_leaf_asymptotics(c, spectral_table(ConeSpec(3, 3), 1)));
    for (const char* k : {"R0", "gamma_hat", "a_hat", "alpha0_hat"}) CHECK(j.contains(k));
}
