#include "conelab/graph_curvature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "conelab/curvature.hpp"
#include "conelab/detail/revolution.hpp"
#include "conelab/errors.hpp"
#include "conelab/format.hpp"

namespace conelab {

namespace {

constexpr double kChartStep = 5e-3;
constexpr double kArcStep = 2e-3;

// A point of the base profile in the frame where the base's graph direction is
// nu = (sin theta, -cos theta), with arclength derivatives.
struct BasePoint {
    int p, q;
    double r, u, v, theta;
    double theta_s, theta_ss;
    double r_s, r_ss;
    // Radii of the S^p and S^q orbits of the cone factors (differ from u, v on sign - leaves).
    double orbit_p, orbit_q;
};

struct GraphValue {
    double H;
    double yu, yv, angle;
};

GraphValue graph_mc(const BasePoint& b, double G, double G1, double G2)
{
    const double A = 1.0 + G * b.theta_s;
    const double B = G1;
    const double C = 2.0 * G1 * b.theta_s + G * b.theta_ss;
    const double D = G2 - b.theta_s * (1.0 + G * b.theta_s);
    const double len = std::hypot(A, B);
    const double st = std::sin(b.theta), ct = std::cos(b.theta);
    const double yu = b.u + G * st, yv = b.v - G * ct;
    if (!(A > 0.1) || !(yu > 0.0) || !(yv > 0.0) || !(std::abs(G) < 0.5 * b.r))
        throw GraphFailure("normal graph leaves the graphable range");
    const double nu = (A * st - B * ct) / len;
    const double nv = (-A * ct - B * st) / len;
    const double H = (B * C - A * D) / (len * len * len) + b.p * nu / yu + b.q * nv / yv;
    return {H, yu, yv, b.theta + std::atan2(B, A)};
}

BasePoint cone_point(const ConeSpec& cone, double r)
{
    const double alpha = cone.ray_angle();
    const double u = r * std::cos(alpha), v = r * std::sin(alpha);
    return {cone.p, cone.q, r, u, v, alpha, 0.0, 0.0, 1.0, 0.0, u, v};
}

BasePoint leaf_point(const ProfileCurve& leaf, const ProfileState& x)
{
    const int p = leaf.canonical_p(), q = leaf.canonical_q();
    const double alpha = leaf.canonical_ray_angle();
    const double r = std::exp(x.t);
    const double phi = alpha + x.delta;
    const double u = r * std::cos(phi), v = r * std::sin(phi);
    const double th = phi + x.psi;
    const ProfileState d = leaf.derivative(x);
    const double ts = (d.delta + d.psi) / r;
    const double g = leaf.ode_sign();
    const double st = std::sin(th), ct = std::cos(th);
    const double tss = g * (-q * st * ts / v - q * ct * st / (v * v) - p * ct * ts / u +
                            p * st * ct / (u * u));
    const double phi_s = std::sin(x.psi) / r;
    const double rs = std::cos(x.psi);
    const double rss = -std::sin(x.psi) * (ts - phi_s);
    BasePoint b{p, q, r, u, v, th, ts, tss, rs, rss, u, v};
    if (leaf.sign() < 0) std::swap(b.orbit_p, b.orbit_q);
    return b;
}

double graph_H(const BasePoint& b, const RadialFunction& g, double psi1)
{
    const double G = psi1 * g.value(b.r);
    const double G1 = psi1 * g.d1(b.r) * b.r_s;
    const double G2 = psi1 * (g.d2(b.r) * b.r_s * b.r_s + g.d1(b.r) * b.r_ss);
    return graph_mc(b, G, G1, G2).H;
}

std::size_t nearest_sample(const ProfileCurve& leaf, double r)
{
    const auto& st = leaf.states();
    const double t = std::log(r);
    auto it = std::lower_bound(st.begin(), st.end(), t,
                               [](const ProfileState& x, double v) { return x.t < v; });
    std::size_t k = static_cast<std::size_t>(it - st.begin());
    if (k >= st.size()) k = st.size() - 1;
    if (k > 0 && std::abs(st[k - 1].t - t) < std::abs(st[k].t - t)) --k;
    return std::clamp<std::size_t>(k, 2, st.size() - 3);
}

// Dense leaf state at radius r.
ProfileState state_at_radius(const ProfileCurve& leaf, double r)
{
    const auto& st = leaf.states();
    const double t = std::log(r);
    if (!(t >= st.front().t && t <= st.back().t)) throw InvalidArgument("radius outside the computed leaf");
    auto it = std::lower_bound(st.begin(), st.end(), t,
                               [](const ProfileState& x, double v) { return x.t < v; });
    if (it->t == t) return *it;
    const double hi = it->sigma, lo = std::prev(it)->sigma;
    boost::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        [&](double s) { return leaf.state_at(s).t - t; }, lo, hi,
        boost::math::tools::eps_tolerance<double>(52), iters);
    return leaf.state_at(0.5 * (a + b));
}

// Oracle: finite differences of the hypersurface generated by the graph curve, with
// coordinates divided by the base radius.
double graph_oracle(const GraphBase& base, const RadialFunction& g, double r, std::size_t node)
{
    const ConeSpec& cone = base.cone();
    const double psi1 = cone.psi1();
    std::function<std::array<double, 3>(double)> curve;
    int p = cone.p, q = cone.q;
    if (base.is_cone()) {
        curve = [&, r](double w) {
            const BasePoint b = cone_point(cone, r * (1.0 + w));
            const double G = psi1 * g.value(b.r), G1 = psi1 * g.d1(b.r);
            const GraphValue y = graph_mc(b, G, G1, 0.0);
            return std::array<double, 3>{y.yu / r, y.yv / r, y.angle};
        };
    } else {
        const ProfileCurve& leaf = base.leaf();
        p = leaf.canonical_p();
        q = leaf.canonical_q();
        curve = [&, r, node](double w) {
            const long j = std::lround(w / leaf.sigma_step());
            const BasePoint b = leaf_point(leaf, leaf.states().at(node + j));
            const double G = psi1 * g.value(b.r), G1 = psi1 * g.d1(b.r) * b.r_s;
            const GraphValue y = graph_mc(b, G, G1, 0.0);
            return std::array<double, 3>{y.yu / r, y.yv / r, y.angle};
        };
    }
    SurfacePatch patch = detail::revolution_patch(p, q, curve);
    VectorXd steps = VectorXd::Constant(patch.dim, kChartStep);
    steps[0] = base.is_cone() ? kArcStep : base.leaf().sigma_step();
    return fd_mean_curvature(patch, VectorXd::Zero(patch.dim), steps) / r;
}

std::vector<double> linearize(const GraphBase& base, const SpectralTable& table, int j, double a_exp,
                              std::span<const double> radii)
{
    const SpectralEntry& e = table.entry(j);
    const ConeSpec& cone = base.cone();
    std::vector<double> out;
    for (double r0 : radii) {
        const BasePoint b = base.is_cone() ? cone_point(cone, r0)
                                           : leaf_point(base.leaf(), state_at_radius(base.leaf(), r0));
        // G = d r^a with d r^a ~ 1e-5 r.
        const double d = 1e-5 * std::pow(b.r, 1.0 - a_exp);
        const RadialFunction plus = power_profile(d / cone.psi1(), a_exp);
        const RadialFunction minus = power_profile(-d / cone.psi1(), a_exp);
        const double f = std::pow(b.r, a_exp);
        const double radial = -(graph_H(b, plus, cone.psi1()) - graph_H(b, minus, cone.psi1())) / (2 * d);
        const double orbit = e.k * (e.k + cone.p - 1.0) / (b.orbit_p * b.orbit_p) +
                             e.m * (e.m + cone.q - 1.0) / (b.orbit_q * b.orbit_q);
        out.push_back(radial - orbit * f);
    }
    return out;
}

} // namespace

RadialFunction power_profile(double coeff, double a)
{
    return {[=](double r) { return coeff * std::pow(r, a); },
            [=](double r) { return coeff * a * std::pow(r, a - 1); },
            [=](double r) { return coeff * a * (a - 1) * std::pow(r, a - 2); }};
}

GraphBase GraphBase::on_cone(const ConeSpec& cone)
{
    GraphBase b;
    b.cone_ = cone;
    return b;
}

GraphBase GraphBase::on_leaf(const ProfileCurve& leaf)
{
    GraphBase b;
    b.cone_ = leaf.cone();
    b.leaf_ = leaf;
    return b;
}

GraphBase GraphBase::on_leaf(const Foliation& foliation, double lambda)
{
    if (lambda == 0.0) return on_cone(foliation.cone());
    const int s = lambda > 0 ? 1 : -1;
    return on_leaf(foliation.leaf(s).scaled(std::pow(std::abs(lambda), 1.0 / (1.0 - foliation.gamma()))));
}

CurvatureTrace graphical_mc(const GraphBase& base, const RadialFunction& g,
                            std::span<const double> radii, bool oracle)
{
    CurvatureTrace out;
    const double psi1 = base.cone().psi1();
    for (double r0 : radii) {
        if (!(r0 > 0)) throw InvalidArgument("radii must be positive");
        std::size_t node = 0;
        BasePoint b;
        if (base.is_cone()) {
            b = cone_point(base.cone(), r0);
        } else {
            node = nearest_sample(base.leaf(), r0);
            b = leaf_point(base.leaf(), base.leaf().states()[node]);
        }
        const double H = graph_H(b, g, psi1);
        out.r.push_back(b.r);
        out.value.push_back(H);
        const double o = oracle ? graph_oracle(base, g, b.r, node) : std::nan("");
        out.oracle_value.push_back(o);
        out.abs_err.push_back(oracle ? std::abs(H - o) : std::nan(""));
    }
    return out;
}

std::vector<double> linearized_mc_mode(const GraphBase& base, const SpectralTable& table, int j,
                                       double a_exp, std::span<const double> radii)
{
    if (!base.is_cone()) return linearize(base, table, j, a_exp, radii);
    const double kappa = radial_jacobi_coefficient(table, j, a_exp);
    std::vector<double> out;
    for (double r : radii) out.push_back(kappa * std::pow(r, a_exp - 2));
    return out;
}

std::vector<double> linearized_mc_numeric(const GraphBase& base, const SpectralTable& table, int j,
                                          double a_exp, std::span<const double> radii)
{
    return linearize(base, table, j, a_exp, radii);
}

RadialFunction leaf_graph_profile(const ProfileCurve& leaf)
{
    // Foot radius rho = r cos(delta) increases past the graphability radius.
    const auto& st = leaf.states();
    std::size_t i0 = st.size();
    while (i0 > 0 && std::cos(st[i0 - 1].delta + st[i0 - 1].psi) > 0.0) --i0;
    if (i0 + 2 >= st.size()) throw GraphFailure("leaf is nowhere a graph over the cone");
    const double psi1 = leaf.cone().psi1();
    const double sign = leaf.sign();

    struct Local {
        double Psi, dPsi, d2Psi;
    };
    auto at = [&leaf, &st, i0](double rho) -> Local {
        auto foot = [&](const ProfileState& x) { return std::exp(x.t) * std::cos(x.delta); };
        if (!(rho >= foot(st[i0]) && rho <= foot(st.back())))
            throw GraphFailure("foot radius outside the graphable part of the leaf");
        std::size_t lo = i0, hi = st.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (foot(st[mid]) <= rho ? lo : hi) = mid;
        }
        auto f = [&](double sigma) { return foot(leaf.state_at(sigma)) - rho; };
        double sigma = st[lo].sigma;
        if (f(st[lo].sigma) < 0.0 && f(st[hi].sigma) > 0.0) {
            boost::uintmax_t iters = 200;
            const auto [a, b] = boost::math::tools::toms748_solve(
                f, st[lo].sigma, st[hi].sigma, boost::math::tools::eps_tolerance<double>(52), iters);
            sigma = 0.5 * (a + b);
        } else if (f(st[hi].sigma) <= 0.0) {
            sigma = st[hi].sigma;
        }
        const ProfileState x = leaf.state_at(sigma);
        const ProfileState d = leaf.derivative(x);
        const double r = std::exp(x.t), w = x.delta + x.psi;
        const double cw = std::cos(w);
        return {-r * std::sin(x.delta), -std::tan(w), -(d.delta + d.psi) / (r * cw * cw * cw)};
    };
    return {[=](double rho) { return sign * at(rho).Psi / psi1; },
            [=](double rho) { return sign * at(rho).dPsi / psi1; },
            [=](double rho) { return sign * at(rho).d2Psi / psi1; }};
}

SupersolutionReport supersolution_check_Fa(const ProfileCurve& leaf, double a_exp, double r_min)
{
    const double gamma = leaf.gamma();
    if (!(a_exp > gamma && a_exp < 0.0))
        throw InvalidArgument("exponent must satisfy gamma < a < 0");
    const GraphBase base = GraphBase::on_leaf(leaf);
    const SpectralTable table = spectral_table(leaf.cone(), 1);
    std::vector<double> radii;
    for (std::size_t i = 2; i + 2 < leaf.size(); ++i) radii.push_back(leaf.radius(i));
    const std::vector<double> L = linearize(base, table, 1, a_exp, radii);

    SupersolutionReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double v = std::pow(radii[i], 2 - a_exp) * L[i];
        rep.r.push_back(radii[i]);
        rep.scaled_value.push_back(v);
        if (radii[i] >= r_min) rep.margin = std::min(rep.margin, v);
    }
    if (!std::isfinite(rep.margin)) throw InvalidArgument("no samples beyond r_min");
    rep.inner_radius = rep.r.front();
    for (std::size_t i = rep.r.size(); i-- > 0;)
        if (!(rep.scaled_value[i] > 0.0)) {
            rep.inner_radius = i + 1 < rep.r.size() ? rep.r[i + 1] : std::numeric_limits<double>::infinity();
            break;
        }
    return rep;
}

std::string to_csv(const CurvatureTrace& trace)
{
    std::ostringstream out;
    out << "r,value,oracle_value,abs_err\n";
    for (std::size_t i = 0; i < trace.r.size(); ++i)
        out << fmt_real(trace.r[i]) << ',' << fmt_real(trace.value[i]) << ','
            << fmt_real(trace.oracle_value[i]) << ',' << fmt_real(trace.abs_err[i]) << '\n';
    return out.str();
}

} // namespace conelab
