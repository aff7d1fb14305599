#include "conelab/foliation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "conelab/curvature.hpp"
#include "conelab/detail/revolution.hpp"
#include "conelab/errors.hpp"
#include "conelab/format.hpp"

namespace conelab {

namespace {

using detail::revolution_patch;
using Vec5 = std::array<double, 5>; // t, delta, psi, s, area

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesStart = 0.25;
constexpr double kChartStep = 5e-3;

// Classical RK4 for the profile in arclength: (u, v, theta).
std::array<double, 3> rk4_arclength(int p, int q, int g, std::array<double, 3> y, double ds, int n)
{
    auto f = [&](const std::array<double, 3>& z) {
        return std::array<double, 3>{std::cos(z[2]), std::sin(z[2]),
                                     g * (q * std::cos(z[2]) / z[1] - p * std::sin(z[2]) / z[0])};
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
        for (int c = 0; c < 3; ++c) y[c] += h / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    }
    return y;
}

double sign_residual(int p, int q, int g)
{
    const std::array<double, 3> base{1.0, 0.8, 1.1};
    auto patch = revolution_patch(p, q, [=](double s) {
        if (s == 0.0) return base;
        return rk4_arclength(p, q, g, base, s, 8);
    });
    return std::abs(fd_mean_curvature(patch, VectorXd::Zero(patch.dim)));
}

struct Rhs {
    int p, q, g;
    double alpha;
    double sphere_factor;

    void operator()(const Vec5& x, Vec5& dx, double /*sigma*/) const
    {
        const double t = x[0], delta = x[1], psi = x[2];
        const double w = 2.0 * delta + psi;
        const double sh = std::sin(0.5 * psi);
        const double num = 0.5 * (q - p) * (-2.0 * sh * sh) +
                           0.5 * (q + p) * (-2.0 * std::sin(2.0 * alpha + 0.5 * w) * std::sin(0.5 * w));
        const double curv = 2.0 * num / std::sin(2.0 * (alpha + delta));
        const double r = std::exp(t);
        dx[0] = std::cos(psi);
        dx[1] = std::sin(psi);
        dx[2] = g * curv - std::sin(psi);
        dx[3] = r;
        const double phi = alpha + delta;
        dx[4] = sphere_factor * std::pow(r * std::cos(phi), p) * std::pow(r * std::sin(phi), q) * r;
    }
};

Vec5 pack(const ProfileState& s) { return {s.t, s.delta, s.psi, s.s, s.area}; }

ProfileState unpack(double sigma, const Vec5& x) { return {sigma, x[0], x[1], x[2], x[3], x[4]}; }

double hermite(double y0, double m0, double y1, double m1, double h, double tau)
{
    const double t2 = tau * tau, t3 = t2 * tau;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + tau) * h * m0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * h * m1;
}

template <class F>
double bracket_root(F&& f, double lo, double hi)
{
    boost::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return 0.5 * (a + b);
}

} // namespace

int profile_ode_sign(int p, int q)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, int> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find({p, q}); it != cache.end()) return it->second;
    const double plus = sign_residual(p, q, 1);
    const double minus = sign_residual(p, q, -1);
    const int g = plus < minus ? 1 : -1;
    if (std::min(plus, minus) > 1e-6 || std::max(plus, minus) < 1e-3)
        throw IntegrationDiverged("profile ODE sign could not be fixed against the curvature oracle");
    cache[{p, q}] = g;
    return g;
}

namespace {

using Series = std::vector<double>;

Series mul(const Series& a, const Series& b)
{
    Series c(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; i + j < a.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

Series integral(const Series& a)
{
    Series c(a.size(), 0.0);
    for (std::size_t k = 1; k < a.size(); ++k) c[k] = a[k - 1] / k;
    return c;
}

Series power(const Series& a, int e)
{
    Series c(a.size(), 0.0);
    c[0] = 1.0;
    for (int i = 0; i < e; ++i) c = mul(c, a);
    return c;
}

double horner(const Series& a, double s)
{
    double v = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) v = v * s + *it;
    return v;
}

// sin and cos of a series without constant term.
std::pair<Series, Series> sincos(const Series& phi)
{
    const std::size_t n = phi.size();
    Series S(n, 0.0), C(n, 0.0);
    C[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.0, c = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            s += j * phi[j] * C[k - j];
            c -= j * phi[j] * S[k - j];
        }
        S[k] = s / k;
        C[k] = c / k;
    }
    return {S, C};
}

} // namespace

AxisSeries::AxisSeries(int p, int q, int ode_sign)
{
    // theta = pi/2 + phi: phi' u v = g (q cos(theta) u - p sin(theta) v), u = 1 - int sin(phi),
    // v = int cos(phi). The s^k coefficient is affine in c_k with slope k + g q.
    const int n = kOrder + 1;
    const double g = ode_sign;
    theta_.assign(n, 0.0);
    auto residual = [&](int k) {
        const auto [S, C] = sincos(theta_);
        Series u = integral(S);
        for (double& x : u) x = -x;
        u[0] = 1.0;
        const Series v = integral(C);
        Series dphi(n, 0.0);
        for (int j = 1; j < n; ++j) dphi[j - 1] = j * theta_[j];
        const Series lhs = mul(mul(dphi, u), v);
        const Series a = mul(S, u), b = mul(C, v);
        return lhs[k] - g * (-q * a[k] - p * b[k]);
    };
    for (int k = 1; k < n; ++k) {
        if (k + g * q == 0.0) throw IntegrationDiverged("axis series is singular for this sign");
        theta_[k] = 0.0;
        theta_[k] = -residual(k) / (k + g * q);
    }
    const auto [S, C] = sincos(theta_);
    u_ = integral(S);
    for (double& x : u_) x = -x;
    u_[0] = 1.0;
    v_ = integral(C);
    Series dens = mul(power(u_, p), power(v_, q));
    for (double& x : dens) x *= unit_sphere_area(p) * unit_sphere_area(q);
    area_ = integral(dens);
}

double AxisSeries::theta(double s) const { return kPi / 2 + horner(theta_, s); }

std::pair<double, double> AxisSeries::position(double s) const
{
    return {horner(u_, s), horner(v_, s)};
}

double AxisSeries::cap_area(double s) const { return horner(area_, s); }

double ProfileCurve::canonical_ray_angle() const
{
    const double a = cone_.ray_angle();
    return sign_ > 0 ? a : kPi / 2 - a;
}

ProfileState ProfileCurve::derivative(const ProfileState& x) const
{
    const Rhs rhs{canonical_p(), canonical_q(), ode_sign_, canonical_ray_angle(),
                  unit_sphere_area(canonical_p()) * unit_sphere_area(canonical_q())};
    Vec5 dx;
    rhs(pack(x), dx, x.sigma);
    return unpack(1.0, dx);
}

ProfileSample ProfileCurve::sample(std::size_t i) const
{
    const ProfileState& x = states_.at(i);
    const double alpha = canonical_ray_angle();
    const double r = std::exp(x.t);
    double u = r * std::cos(alpha + x.delta);
    double v = r * std::sin(alpha + x.delta);
    if (sign_ < 0) std::swap(u, v);
    return {x.s, u, v, theta(i), residuals_.empty() ? 0.0 : residuals_[i]};
}

std::vector<ProfileSample> ProfileCurve::samples() const
{
    std::vector<ProfileSample> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(sample(i));
    return out;
}

double ProfileCurve::theta(std::size_t i) const
{
    const ProfileState& x = states_.at(i);
    const double th = canonical_ray_angle() + x.delta + x.psi;
    return sign_ > 0 ? th : kPi / 2 - th;
}

double ProfileCurve::radius(std::size_t i) const { return std::exp(states_.at(i).t); }

double ProfileCurve::foot_radius(std::size_t i) const
{
    return radius(i) * std::cos(states_.at(i).delta);
}

double ProfileCurve::graph_height(std::size_t i) const
{
    return -sign_ * radius(i) * std::sin(states_.at(i).delta);
}

double ProfileCurve::max_radius() const
{
    double m = 0.0;
    for (const auto& x : states_) m = std::max(m, x.t);
    return std::exp(m);
}

double ProfileCurve::max_residual() const
{
    return residuals_.empty() ? 0.0 : *std::max_element(residuals_.begin(), residuals_.end());
}

ProfileCurve ProfileCurve::scaled(double c) const
{
    if (!(c > 0) || !std::isfinite(c)) throw InvalidArgument("scale factor must be positive");
    ProfileCurve out = *this;
    out.u0_ *= c;
    const double lc = std::log(c), cn = std::pow(c, cone_.n());
    for (auto& x : out.states_) {
        x.t += lc;
        x.s *= c;
        x.area *= cn;
    }
    return out;
}

ProfileState ProfileCurve::state_at(double sigma) const
{
    const double sigma0 = states_.front().sigma;
    const double pos = (sigma - sigma0) / step_;
    if (pos < -1e-9 || pos > static_cast<double>(size() - 1) + 1e-9)
        throw InvalidArgument("sigma outside the sampled range");
    const std::size_t k = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), size() - 2);
    const double tau = pos - static_cast<double>(k);
    const ProfileState &a = states_[k], &b = states_[k + 1];
    const ProfileState da = derivative(a), db = derivative(b);
    ProfileState out;
    out.sigma = sigma;
    out.t = hermite(a.t, da.t, b.t, db.t, step_, tau);
    out.delta = hermite(a.delta, da.delta, b.delta, db.delta, step_, tau);
    out.psi = hermite(a.psi, da.psi, b.psi, db.psi, step_, tau);
    out.s = hermite(a.s, da.s, b.s, db.s, step_, tau);
    out.area = hermite(a.area, da.area, b.area, db.area, step_, tau);
    return out;
}

double ProfileCurve::log_radius_at_delta(double delta) const
{
    const double alpha = canonical_ray_angle();
    if (!(delta < 0.0) || delta < -alpha - 1e-15)
        throw OutOfDomain("ray angle outside the side of the leaf");
    const double lu0 = std::log(u0_);
    const ProfileState& first = states_.front();
    const ProfileState& last = states_.back();

    if (delta < first.delta) {
        // Series region near the axis, on the unit leaf.
        const AxisSeries series(canonical_p(), canonical_q(), ode_sign_);
        const double target = alpha + delta;
        if (target <= 0.0) return lu0;
        auto f = [&](double s) {
            const auto [u, v] = series.position(s);
            return std::atan2(v, u) - target;
        };
        const double s = bracket_root(f, 0.0, series_s0_ * 1.5);
        const auto [u, v] = series.position(s);
        return lu0 + std::log(std::hypot(u, v));
    }

    if (delta > last.delta) {
        // Beyond the last sample: log|delta| = log|delta_L| + (gamma - 1) x
        // + kappa (1 - exp(-b x)), x = t - t_L, slope-matched at the last sample.
        const double slope = std::tan(last.psi) / last.delta;
        const double decay = gamma_ - gamma_minus_;
        const double kappa = (slope - (gamma_ - 1.0)) / decay;
        const double target = std::log(-delta) - std::log(-last.delta);
        auto f = [&](double x) {
            return (gamma_ - 1.0) * x + kappa * (1.0 - std::exp(-decay * x)) - target;
        };
        double hi = 1.0;
        while (f(hi) > 0.0) hi *= 2.0;
        return last.t + bracket_root(f, 0.0, hi);
    }

    // Samples are increasing in delta.
    auto it = std::lower_bound(states_.begin(), states_.end(), delta,
                               [](const ProfileState& x, double d) { return x.delta < d; });
    std::size_t k = static_cast<std::size_t>(it - states_.begin());
    if (k == 0) return first.t;
    --k;
    const ProfileState &a = states_[k], &b = states_[k + 1];
    const ProfileState da = derivative(a), db = derivative(b);
    auto f = [&](double tau) {
        return hermite(a.delta, da.delta, b.delta, db.delta, step_, tau) - delta;
    };
    double tau = 0.0;
    if (f(0.0) >= 0.0) tau = 0.0;
    else if (f(1.0) <= 0.0) tau = 1.0;
    else tau = bracket_root(f, 0.0, 1.0);
    return hermite(a.t, da.t, b.t, db.t, step_, tau);
}

double ProfileCurve::area_within(double R) const
{
    if (!(R > 0)) throw InvalidArgument("radius must be positive");
    const double T = std::log(R);
    const ProfileState& first = states_.front();
    if (T > states_.back().t + 1e-12) throw InvalidArgument("radius beyond the computed leaf");
    if (R <= u0_) return 0.0;
    if (T < first.t) {
        const AxisSeries series(canonical_p(), canonical_q(), ode_sign_);
        const double target = R / u0_;
        auto f = [&](double s) {
            const auto [u, v] = series.position(s);
            return std::hypot(u, v) - target;
        };
        const double s = bracket_root(f, 0.0, series_s0_ * 1.5);
        return std::pow(u0_, cone_.n()) * series.cap_area(s);
    }
    auto it = std::lower_bound(states_.begin(), states_.end(), T,
                               [](const ProfileState& x, double v) { return x.t < v; });
    std::size_t k = static_cast<std::size_t>(it - states_.begin());
    if (k == 0) return first.area;
    if (k >= size()) return states_.back().area;
    --k;
    const ProfileState &a = states_[k], &b = states_[k + 1];
    const ProfileState da = derivative(a), db = derivative(b);
    auto f = [&](double tau) { return hermite(a.t, da.t, b.t, db.t, step_, tau) - T; };
    double tau = 1.0;
    if (f(0.0) >= 0.0) tau = 0.0;
    else if (f(1.0) > 0.0) tau = bracket_root(f, 0.0, 1.0);
    // log(area) is nearly linear in sigma far out, unlike the area itself.
    return std::exp(hermite(std::log(a.area), da.area / a.area, std::log(b.area), db.area / b.area,
                            step_, tau));
}

double ProfileCurve::oracle_residual(std::size_t i) const
{
    const int p = canonical_p(), q = canonical_q();
    const double alpha = canonical_ray_angle();
    const ProfileState& base = states_.at(i);
    const bool interior = i >= 2 && i + 2 < size();

    auto state_at_offset = [&](double ds) -> ProfileState {
        if (ds == 0.0) return base;
        const long j = std::lround(ds / step_);
        if (interior && std::abs(ds - j * step_) <= 1e-9 * step_) return states_[i + j];
        // Local RK4 continuation in sigma.
        const int n = 16;
        const double h = ds / n;
        ProfileState y = base;
        auto axpy = [](const ProfileState& x, double c, const ProfileState& d) {
            return ProfileState{x.sigma + c, x.t + c * d.t, x.delta + c * d.delta,
                                x.psi + c * d.psi, x.s + c * d.s, x.area + c * d.area};
        };
        for (int k = 0; k < n; ++k) {
            const ProfileState k1 = derivative(y);
            const ProfileState k2 = derivative(axpy(y, 0.5 * h, k1));
            const ProfileState k3 = derivative(axpy(y, 0.5 * h, k2));
            const ProfileState k4 = derivative(axpy(y, h, k3));
            y.t += h / 6 * (k1.t + 2 * k2.t + 2 * k3.t + k4.t);
            y.delta += h / 6 * (k1.delta + 2 * k2.delta + 2 * k3.delta + k4.delta);
            y.psi += h / 6 * (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi);
            y.sigma += h;
        }
        return y;
    };

    // Coordinates divided by the radius at sample i, so the residual is |x| |H|.
    auto patch = revolution_patch(p, q, [&](double ds) {
        const ProfileState x = state_at_offset(ds);
        const double rho = std::exp(x.t - base.t);
        const double phi = alpha + x.delta;
        return std::array<double, 3>{rho * std::cos(phi), rho * std::sin(phi), phi + x.psi};
    });
    VectorXd steps = VectorXd::Constant(patch.dim, kChartStep);
    steps[0] = step_;
    return std::abs(fd_mean_curvature(patch, VectorXd::Zero(patch.dim), steps));
}

ProfileCurve solve_profile(const ConeSpec& cone, int sign, double s_max, double tol)
{
    if (sign != 1 && sign != -1) throw InvalidArgument("sign must be +1 or -1");
    if (!(s_max > 0)) throw InvalidArgument("s_max must be positive");
    if (!(tol > 0 && tol <= 1e-6)) throw InvalidArgument("tol must lie in (0, 1e-6]");
    const SpectralTable table = spectral_table(cone, 1);

    ProfileCurve curve;
    curve.cone_ = cone;
    curve.sign_ = sign;
    curve.gamma_ = table.gamma();
    curve.gamma_minus_ = table.entry(1).gamma_minus;
    curve.step_ = kProfileStep;
    const int p = curve.canonical_p(), q = curve.canonical_q();
    const double alpha = curve.canonical_ray_angle();
    curve.ode_sign_ = profile_ode_sign(p, q);

    const AxisSeries series(p, q, curve.ode_sign_);
    // Start where the truncated series is exact to roundoff, as far from the axis as allowed.
    double s0 = std::min(kSeriesStart, 0.5 * s_max);
    const double top = std::abs(series.theta_coefficient(AxisSeries::kOrder));
    if (top > 0.0) s0 = std::min(s0, std::pow(1e-17 / top, 1.0 / AxisSeries::kOrder));
    curve.series_s0_ = s0;
    const auto [u0, v0] = series.position(s0);
    const double phi0 = std::atan2(v0, u0);
    Vec5 x{std::log(std::hypot(u0, v0)), phi0 - alpha, series.theta(s0) - phi0, s0,
           series.cap_area(s0)};

    const Rhs rhs{p, q, curve.ode_sign_, alpha, unit_sphere_area(p) * unit_sphere_area(q)};
    namespace ode = boost::numeric::odeint;
    // Nodes are step endpoints: dense-output interpolation noise would be amplified by
    // the second differences of the residual oracle.
    auto stepper = ode::make_controlled(1e-30, 1e-12, ode::runge_kutta_dopri5<Vec5>());

    const double h = curve.step_;
    curve.states_.push_back(unpack(0.0, x));
    try {
        for (std::size_t k = 1; curve.states_.back().s < s_max; ++k) {
            if (k > 50'000'000) throw IntegrationDiverged("step budget exhausted");
            double dt = h;
            const std::size_t taken =
                ode::integrate_adaptive(stepper, rhs, x, (k - 1) * h, k * h, dt);
            if (taken > 10'000) throw IntegrationDiverged("step size collapsed");
            for (double c : x)
                if (!std::isfinite(c)) throw IntegrationDiverged("non-finite profile state");
            if (x[1] >= 0.0) throw SideViolation("profile crossed the cone ray");
            curve.states_.push_back(unpack(k * h, x));
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw IntegrationDiverged(std::string("profile integration failed: ") + e.what());
    }

    for (std::size_t i = 1; i < curve.states_.size(); ++i)
        if (!(curve.states_[i].delta > curve.states_[i - 1].delta) ||
            !(curve.states_[i].t > curve.states_[i - 1].t))
            throw IntegrationDiverged("profile is not a radial graph over the link angle");

    curve.residuals_.resize(curve.states_.size());
    for (std::size_t i = 0; i < curve.states_.size(); ++i) {
        const double r = curve.oracle_residual(i);
        curve.residuals_[i] = r;
        if (!(r < tol)) {
            std::ostringstream msg;
            msg << "mean-curvature residual " << r << " at sample " << i << " exceeds " << tol;
            throw IntegrationDiverged(msg.str());
        }
    }
    return curve;
}

LeafGraphFit fit_leaf_asymptotics(const ProfileCurve& curve, const SpectralTable& spectrum)
{
    const ConeSpec& cone = curve.cone();
    if (spectrum.cone.p != cone.p || spectrum.cone.q != cone.q)
        throw InvalidArgument("spectral table belongs to a different cone");
    const double r_max = curve.max_radius();
    if (r_max < 100.0 * curve.u0())
        throw InsufficientTail("leaf must reach 100 times its axis radius");

    // Graphability: the foot point on the cone ray moves forward from here on.
    const double alpha = curve.canonical_ray_angle();
    std::size_t i0 = curve.size();
    while (i0 > 0) {
        const ProfileState& x = curve.states()[i0 - 1];
        if (!(std::cos(x.delta + x.psi) > 0.0)) break;
        --i0;
    }
    (void)alpha;
    if (i0 >= curve.size()) throw InsufficientTail("leaf never becomes a graph over the cone");

    LeafGraphFit fit;
    fit.R0 = curve.radius(i0);

    std::vector<double> L, Y, R;
    for (std::size_t i = i0; i < curve.size(); ++i) {
        const double r = curve.radius(i);
        if (r < r_max / 100.0) continue;
        L.push_back(std::log(curve.foot_radius(i)));
        Y.push_back(std::log(std::abs(curve.graph_height(i))));
        R.push_back(r);
    }
    if (L.size() < 50) throw InsufficientTail("fewer than 50 tail samples beyond the graphability radius");

    const double l_ref = L.front();
    const std::size_t m = L.size();
    auto solve = [&](double a0, Eigen::Vector3d& coef) {
        Eigen::MatrixXd A(m, 3);
        Eigen::VectorXd b(m);
        for (std::size_t i = 0; i < m; ++i) {
            A(i, 0) = 1.0;
            A(i, 1) = L[i] - l_ref;
            A(i, 2) = std::exp(-a0 * (L[i] - l_ref));
            b[i] = Y[i];
        }
        coef = A.colPivHouseholderQr().solve(b);
        return (A * coef - b).squaredNorm();
    };

    // Golden-section search for the remainder exponent.
    double lo = 0.05, hi = 6.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    Eigen::Vector3d coef;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = solve(x1, coef), f2 = solve(x2, coef);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = solve(x1, coef);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = solve(x2, coef);
        }
    }
    fit.alpha0_hat = 0.5 * (lo + hi);
    solve(fit.alpha0_hat, coef);
    fit.gamma_hat = coef[1];
    const double log_coeff = coef[0] - coef[1] * l_ref;
    fit.a_hat = curve.sign() * std::exp(log_coeff) / cone.psi1();
    for (std::size_t i = 0; i < m; ++i) {
        const double model = coef[0] + coef[1] * (L[i] - l_ref) +
                             coef[2] * std::exp(-fit.alpha0_hat * (L[i] - l_ref));
        fit.residuals.emplace_back(R[i], Y[i] - model);
    }
    return fit;
}

nlohmann::json to_json(const LeafGraphFit& fit)
{
    return {{"R0", fit.R0},
            {"gamma_hat", fit.gamma_hat},
            {"a_hat", fit.a_hat},
            {"alpha0_hat", fit.alpha0_hat}};
}

std::string to_csv(const ProfileCurve& curve)
{
    std::ostringstream out;
    out << "s,u,v,theta,residual\n";
    for (const auto& x : curve.samples())
        out << fmt_real(x.s) << ',' << fmt_real(x.u) << ',' << fmt_real(x.v) << ','
            << fmt_real(x.theta) << ',' << fmt_real(x.residual) << '\n';
    return out.str();
}

double leaf_parameter(const ProfileCurve& curve, double u, double v)
{
    if (!(u >= 0.0 && v >= 0.0)) throw InvalidArgument("quadrant coordinates must be nonnegative");
    if (curve.sign() < 0) std::swap(u, v);
    const double r = std::hypot(u, v);
    if (r == 0.0) throw OutOfDomain("point projects to the origin");
    const double alpha = curve.canonical_ray_angle();
    const double delta =
        std::atan2(v * std::cos(alpha) - u * std::sin(alpha), u * std::cos(alpha) + v * std::sin(alpha));
    if (r * std::abs(std::sin(delta)) <= kOnConeTolerance) return 0.0;
    if (delta > 0.0) throw OutOfDomain("point lies on the other side of the cone");
    const double c = r / std::exp(curve.log_radius_at_delta(delta));
    return curve.sign() * std::pow(c * curve.u0(), 1.0 - curve.gamma());
}

Foliation::Foliation(ProfileCurve plus, ProfileCurve minus, SpectralTable spectrum)
    : plus_(std::move(plus)), minus_(std::move(minus)), spectrum_(std::move(spectrum))
{
    if (plus_.sign() != 1 || minus_.sign() != -1)
        throw InvalidArgument("foliation needs the sign + and sign - leaves");
    if (!spectrum_.exponents_filled) spectrum_ = growth_exponents(spectrum_);
}

Foliation::Foliation(const ConeSpec& cone, double s_max)
    : Foliation(solve_profile(cone, 1, s_max), solve_profile(cone, -1, s_max),
                spectral_table(cone, 2))
{
}

double Foliation::parameter(double u, double v) const
{
    const double r = std::hypot(u, v);
    if (r == 0.0) throw OutOfDomain("point projects to the origin");
    const double alpha = cone().ray_angle();
    const double delta =
        std::atan2(v * std::cos(alpha) - u * std::sin(alpha), u * std::cos(alpha) + v * std::sin(alpha));
    if (r * std::abs(std::sin(delta)) <= kOnConeTolerance) return 0.0;
    return leaf_parameter(delta < 0.0 ? plus_ : minus_, u, v);
}

double foliation_parameter(std::span<const double> x, std::span<const double> y,
                           const Foliation& foliation)
{
    (void)y;
    const ConeSpec& cone = foliation.cone();
    if (static_cast<int>(x.size()) != cone.n() + 1)
        throw InvalidArgument("point dimension does not match the cone");
    double u2 = 0.0, v2 = 0.0;
    for (int i = 0; i <= cone.p; ++i) u2 += x[i] * x[i];
    for (std::size_t i = cone.p + 1; i < x.size(); ++i) v2 += x[i] * x[i];
    return foliation.parameter(std::sqrt(u2), std::sqrt(v2));
}

double normal_graph_to_dilate(const ProfileCurve& curve, std::size_t i, double dilation)
{
    if (!(dilation > 0)) throw InvalidArgument("dilation must be positive");
    if (dilation == 1.0) return 0.0;
    const double alpha = curve.canonical_ray_angle();
    const ProfileState& x = curve.states().at(i);
    const double r = std::exp(x.t);
    const double u = r * std::cos(alpha + x.delta), v = r * std::sin(alpha + x.delta);
    const double th = alpha + x.delta + x.psi;
    const double nu = std::sin(th), nv = -std::cos(th);
    const double target = std::log(dilation);

    auto f = [&](double tau) {
        const double pu = u + tau * nu, pv = v + tau * nv;
        if (pu < 0.0 || pv < 0.0) throw GraphFailure("normal line leaves the quadrant");
        const double d = std::atan2(pv * std::cos(alpha) - pu * std::sin(alpha),
                                    pu * std::cos(alpha) + pv * std::sin(alpha));
        if (!(d < 0.0)) throw GraphFailure("normal line reaches the cone");
        return std::log(std::hypot(pu, pv)) - curve.log_radius_at_delta(d) - target;
    };

    const double height = -r * std::sin(x.delta);
    const double dir = dilation > 1.0 ? 1.0 : -1.0;
    double lo = 0.0;
    double hi = dir * 2.0 * std::abs(target) * (1.0 - curve.gamma()) * height;
    try {
        for (int it = 0; it < 60; ++it) {
            if ((f(hi) > 0.0) == (dir > 0.0)) break;
            lo = hi;
            hi *= 2.0;
            if (it == 59) throw GraphFailure("no crossing with the dilated leaf");
        }
        return bracket_root(f, std::min(lo, hi), std::max(lo, hi));
    } catch (const OutOfDomain& e) {
        throw GraphFailure(std::string("dilated leaf is not a normal graph: ") + e.what());
    }
}

PhiExpansion phi_expansion(const ProfileCurve& curve, std::span<const double> eps_list,
                           double r_lo, double r_hi, int max_points)
{
    if (curve.sign() != 1) throw InvalidArgument("expansion is taken over the sign + leaf");
    for (double e : eps_list)
        if (!(std::abs(e) <= 0.1)) throw InvalidArgument("|eps| must not exceed 0.1");

    PhiExpansion out;
    out.eps_list.assign(eps_list.begin(), eps_list.end());

    const SpectralTable table = spectral_table(curve.cone(), 1);
    const LeafGraphFit fit = fit_leaf_asymptotics(curve, table);
    const double gamma = curve.gamma();
    out.normalization = std::pow(fit.a_hat, -1.0 / (1.0 - gamma));
    const ProfileCurve leaf = curve.scaled(out.normalization);

    std::vector<std::size_t> idx;
    {
        std::vector<std::size_t> all;
        for (std::size_t i = 0; i < leaf.size(); ++i) {
            const double r = leaf.foot_radius(i);
            if (r >= r_lo && r <= r_hi) all.push_back(i);
        }
        if (all.empty()) throw InsufficientTail("leaf does not cover the requested radii");
        const std::size_t k = std::min<std::size_t>(all.size(), std::max(max_points, 2));
        for (std::size_t j = 0; j < k; ++j)
            idx.push_back(all[k == 1 ? 0 : j * (all.size() - 1) / (k - 1)]);
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    }

    const double psi1 = curve.cone().psi1();
    const double h = 1e-3;
    for (std::size_t i : idx) {
        auto central = [&](double e) {
            return (normal_graph_to_dilate(leaf, i, 1.0 + e) -
                    normal_graph_to_dilate(leaf, i, 1.0 - e)) / (2.0 * e);
        };
        const double phi = (4.0 * central(h / 2) - central(h)) / 3.0;
        const double r = leaf.foot_radius(i);
        out.radii.push_back(r);
        out.phi_plus.push_back(phi);
        out.tail_ratio.push_back(phi / (std::pow(r, gamma) * psi1));
    }

    out.phi_eps.assign(out.eps_list.size(), {});
    out.v_eps.assign(out.eps_list.size(), {});
    out.remainder_sup.assign(out.eps_list.size(), 0.0);
    for (std::size_t k = 0; k < out.eps_list.size(); ++k) {
        const double e = out.eps_list[k];
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const double val = normal_graph_to_dilate(leaf, idx[j], 1.0 + e);
            out.phi_eps[k].push_back(val);
            const double rem = val - e * out.phi_plus[j];
            out.v_eps[k].push_back(e == 0.0 ? 0.0 : rem / (e * e));
            out.remainder_sup[k] =
                std::max(out.remainder_sup[k], std::abs(rem) / std::pow(out.radii[j], gamma));
        }
    }

    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < out.eps_list.size(); ++k)
        if (out.eps_list[k] != 0.0 && out.remainder_sup[k] > 0.0) {
            lx.push_back(std::log(std::abs(out.eps_list[k])));
            ly.push_back(std::log(out.remainder_sup[k]));
        }
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= lx.size();
        my /= ly.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        out.remainder_order = sxx > 0 ? sxy / sxx : 0.0;
    }
    return out;
}

double density_ratio(const ProfileCurve& curve, double R, int l)
{
    const ConeSpec& cone = curve.cone();
    if (l < 0) l = cone.l;
    if (!(R > 0) || R > curve.max_radius() * (1 + 1e-12))
        throw InvalidArgument("radius must lie in (0, max radius]");
    const int n = cone.n();
    if (l == 0) return curve.area_within(R) / (unit_ball_volume(n) * std::pow(R, n));
    // H x R^l in B_R: integrate the leaf area over the slices |y| = s.
    const double top = R * R - curve.u0() * curve.u0();
    if (top <= 0.0) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    const double mass = gauss_kronrod<double, 31>::integrate(
        [&](double s) {
            const double rho = std::sqrt(std::max(R * R - s * s, 0.0));
            return unit_sphere_area(l - 1) * std::pow(s, l - 1) * curve.area_within(rho);
        },
        0.0, std::sqrt(top), 15, 1e-12);
    return mass / (unit_ball_volume(n + l) * std::pow(R, n + l));
}

} // namespace conelab
