#include "conelab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>

#include "conelab/beta_harmonic.hpp"
#include "conelab/cone_spectrum.hpp"
#include "conelab/curvature.hpp"
#include "conelab/errors.hpp"
#include "conelab/excess.hpp"
#include "conelab/foliation.hpp"
#include "conelab/graph_curvature.hpp"

namespace conelab {

namespace {

using Json = nlohmann::json;
using CheckFn = std::function<CheckResult(std::uint64_t)>;

CheckResult result(bool passed, Json detail)
{
    return {"", passed, std::move(detail)};
}

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

// Random field spec: 2-4 modes, j in 1..3, degree 0..3, Gaussian coefficients.
std::vector<ModeRequest> random_spec(std::mt19937_64& rng, int l)
{
    std::uniform_int_distribution<int> count(2, 4), jd(1, 3), deg(0, l == 0 ? 0 : 3);
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

// Random field with at least one nonzero mode other than (j = 1, degree 0).
JacobiField random_higher_field(std::mt19937_64& rng, const ConeSpec& cone)
{
    std::normal_distribution<double> coeff(0.0, 1.0);
    std::vector<ModeRequest> spec;
    if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.5) spec.push_back({1, 0, std::abs(coeff(rng)), 0});
    for (ModeRequest m : random_spec(rng, cone.l)) {
        if (m.j == 1 && m.degree == 0) m.j = 2;
        spec.push_back(m);
    }
    return synthesize_field(cone, spec);
}

std::vector<double> geometric(double R0, double L, int n)
{
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(R0 * std::pow(L, i));
    return out;
}

// ---- spectrum ----

CheckResult spectrum_c33(std::uint64_t)
{
    const SpectralTable t = spectral_table(ConeSpec(3, 3), 2);
    const auto& e1 = t.entry(1);
    const auto& e2 = t.entry(2);
    const double err = std::max({std::abs(e1.gamma_plus + 2.0), std::abs(e1.gamma_minus + 3.0), std::abs(e1.beta - 1.0),
                                 std::abs(e2.lambda), std::abs(e2.gamma_plus), std::abs(e2.beta - 5.0)});
    return result(err <= 1e-14, {{"gamma1_plus", e1.gamma_plus}, {"gamma1_minus", e1.gamma_minus}, {"beta1", e1.beta},
                                 {"lambda2", e2.lambda}, {"gamma2_plus", e2.gamma_plus}, {"beta2", e2.beta},
                                 {"max_error", err}});
}

CheckResult spectrum_identities(std::uint64_t)
{
    double sum_err = 0, prod_err = 0, beta_err = 0, lambda1_err = 0, radial_err = 0;
    for (auto [p, q] : {std::pair{3, 3}, {1, 5}, {3, 4}, {4, 4}, {1, 7}, {2, 4}}) {
        const ConeSpec c(p, q);
        const SpectralTable t = spectral_table(c, 8);
        const double half = (c.n() - 2) / 2.0;
        lambda1_err = std::max(lambda1_err, std::abs(t.entry(1).lambda + (c.n() - 1.0)));
        for (const SpectralEntry& e : t.entries) {
            sum_err = std::max(sum_err, std::abs(e.gamma_plus + e.gamma_minus + (c.n() - 2.0)));
            prod_err = std::max(prod_err, std::abs(e.gamma_plus * e.gamma_minus + e.lambda));
            beta_err = std::max({beta_err, std::abs(e.beta - (e.gamma_plus - e.gamma_minus)),
                                 std::abs(e.beta - 2 * std::sqrt(half * half + e.lambda))});
            radial_err = std::max({radial_err, std::abs(radial_jacobi_coefficient(t, e.j, e.gamma_plus)),
                                   std::abs(radial_jacobi_coefficient(t, e.j, e.gamma_minus))});
        }
    }
    const bool ok = sum_err <= 1e-13 && prod_err <= 1e-12 && beta_err <= 1e-13 && lambda1_err <= 1e-13 &&
                    radial_err <= 1e-12;
    return result(ok, {{"sum_err", sum_err}, {"product_err", prod_err}, {"beta_err", beta_err},
                       {"lambda1_err", lambda1_err}, {"radial_coefficient_err", radial_err}});
}

CheckResult spectrum_brute_force(std::uint64_t)
{
    int mismatches = 0;
    for (auto [p, q] : {std::pair{3, 3}, {1, 5}, {2, 4}, {3, 4}, {2, 6}}) {
        const double a2 = static_cast<double>(p) / (p + q), b2 = static_cast<double>(q) / (p + q);
        std::map<long long, long long> buckets;
        for (int k = 0; k <= 10; ++k)
            for (int m = 0; m <= 10; ++m)
                buckets[std::llround((k * (k + p - 1) / a2 + m * (m + q - 1) / b2) * p * q)] +=
                    harmonic_dimension(p, k) * harmonic_dimension(q, m);
        const SpectralTable t = link_spectrum(ConeSpec(p, q), 6);
        auto it = buckets.begin();
        for (int j = 0; j < 6; ++j, ++it)
            mismatches += std::llround(t.entries[j].mu * p * q) != it->first || t.entries[j].multiplicity != it->second;
    }
    return result(mismatches == 0, {{"mismatches", mismatches}});
}

CheckResult spectrum_stability(std::uint64_t)
{
    int mismatches = 0, stable = 0;
    for (int p = 1; p <= 8; ++p)
        for (int q = 1; q <= 8; ++q) {
            const bool s = check_strict_stability(ConeSpec(p, q)).strictly_stable;
            stable += s;
            mismatches += s != (p + q >= 6);
        }
    return result(mismatches == 0, {{"mismatches", mismatches}, {"stable", stable}, {"scanned", 64}});
}

// ---- foliation ----

CheckResult foliation_residual(std::uint64_t)
{
    double worst = std::max({c33().leaf(1).max_residual(), c33().leaf(-1).max_residual(), c15_plus().max_residual()});
    for (int s : {1, -1}) worst = std::max(worst, solve_profile(ConeSpec(2, 4), s, 1e3).max_residual());
    return result(worst < 1e-8, {{"max_residual", worst}});
}

CheckResult foliation_nesting(std::uint64_t)
{
    const Foliation& fol = c33();
    double min_height = std::numeric_limits<double>::infinity();
    for (int side : {1, -1}) {
        const ProfileCurve& c = fol.leaf(side);
        for (std::size_t i = 0; i < c.size(); ++i) min_height = std::min(min_height, side * c.graph_height(i));
    }
    const double alpha = fol.cone().ray_angle();
    int failures = 0;
    for (int k = 0; k < 100; ++k) {
        const double R = std::pow(10.0, -1.0 + 4.0 * k / 99.0);
        for (int side : {1, -1}) {
            double prev = 0.0;
            for (int j = 1; j <= 40; ++j) {
                const double ang = alpha - side * (alpha * j / 41.0);
                const double t = side * fol.parameter(R * std::cos(ang), R * std::sin(ang));
                failures += !(t > prev);
                prev = t;
            }
        }
    }
    return result(min_height > 0.0 && failures == 0, {{"min_height", min_height}, {"nesting_failures", failures}});
}

CheckResult foliation_fit(std::uint64_t)
{
    const LeafGraphFit f33 = fit_leaf_asymptotics(c33().leaf(1), spectral_table(ConeSpec(3, 3), 1));
    const SpectralTable t15 = spectral_table(ConeSpec(1, 5), 1);
    const LeafGraphFit f15 = fit_leaf_asymptotics(c15_plus(), t15);
    const double e33 = std::abs(f33.gamma_hat + 2.0), e15 = std::abs(f15.gamma_hat - t15.gamma());
    return result(e33 < 1e-2 && e15 < 1e-2, {{"c33_gamma_hat", f33.gamma_hat}, {"c15_gamma_hat", f15.gamma_hat},
                                             {"c15_gamma", t15.gamma()}});
}

CheckResult foliation_scaling(std::uint64_t)
{
    const Foliation& fol = c33();
    const double gamma = fol.gamma(), eps = std::numeric_limits<double>::epsilon();
    double worst = 0.0;
    for (double c : {0.5, 2.0, 10.0}) {
        const ProfileCurve h = fol.leaf(1).scaled(c);
        for (std::size_t i = 0; i < h.size(); i += 7) {
            const ProfileSample x = h.sample(i);
            // Cartesian (u, v) fixes the height above the cone only to about eps r.
            const double tol = 1e-8 + 4 * eps * h.radius(i) / std::abs(h.graph_height(i));
            worst = std::max(worst, std::abs(fol.parameter(x.u, x.v) / std::pow(c, 1 - gamma) - 1.0) / tol);
        }
    }
    return result(worst < 1.0, {{"worst_error_over_tolerance", worst}});
}

CheckResult foliation_density(std::uint64_t)
{
    const ProfileCurve& c = c33().leaf(1);
    const double theta = c.cone().density();
    double prev = 0.0, peak = 0.0;
    int drops = 0;
    for (int k = 0; k < 200; ++k) {
        const double R = std::pow(10.0, 4.0 * k / 199.0) * (k == 199 ? 0.99 : 1.0);
        const double d = density_ratio(c, R);
        drops += d < prev * (1 - 1e-12);
        peak = std::max(peak, d);
        prev = d;
    }
    const double lim33 = density_ratio(c, 9e3), lim15 = density_ratio(c15_plus(), 9e3);
    const bool ok = drops == 0 && peak < 2 * theta && std::abs(lim33 - theta) < 1e-3 &&
                    std::abs(lim15 - c15_plus().cone().density()) < 1e-3;
    return result(ok, {{"drops", drops}, {"cone_density", theta}, {"ratio_at_9e3", lim33}, {"c15_ratio_at_9e3", lim15}});
}

CheckResult foliation_phi(std::uint64_t)
{
    const std::vector<double> eps{0.01, 0.02, 0.04};
    const PhiExpansion e = phi_expansion(c33().leaf(1), eps);
    double worst = 0.0;
    for (std::size_t i = 0; i < e.radii.size(); ++i)
        if (e.radii[i] >= 30.0 && e.radii[i] <= 100.0) worst = std::max(worst, std::abs(e.tail_ratio[i] / 3.0 - 1.0));
    return result(!e.radii.empty() && worst < 0.02 && e.remainder_order >= 1.9,
                  {{"tail_ratio_rel_err", worst}, {"remainder_order", e.remainder_order}});
}

// ---- beta ----

std::vector<double> beta_values()
{
    return {1.0, 5.0, 0.5, 2 * std::sqrt(2.0)};
}

CheckResult beta_exact(std::uint64_t)
{
    int elements = 0, nonzero = 0;
    for (double beta : beta_values())
        for (int l : {1, 2})
            for (const BetaPoly& b : beta_basis(beta, l, 6)) {
                ++elements;
                nonzero += !beta_apply(b).is_zero();
            }
    return result(nonzero == 0, {{"elements", elements}, {"nonzero_images", nonzero}});
}

CheckResult beta_orthogonality(std::uint64_t)
{
    double worst_cross = 0.0, worst_norm = 0.0;
    for (double beta : {1.0, 2 * std::sqrt(2.0)})
        for (int l : {1, 2}) {
            const auto basis = beta_basis(beta, l, 6);
            for (std::size_t i = 0; i < basis.size(); ++i)
                for (std::size_t k = 0; k <= i; ++k) {
                    const double ip = hemisphere_inner(basis[i], basis[k]);
                    if (i == k) worst_norm = std::max(worst_norm, std::abs(ip - 1.0));
                    else worst_cross = std::max(worst_cross, std::abs(ip));
                }
        }
    return result(worst_cross < 1e-8 && worst_norm < 1e-8, {{"max_cross", worst_cross}, {"max_norm_err", worst_norm}});
}

CheckResult beta_mean_value(std::uint64_t)
{
    double worst = 0.0;
    for (double beta : beta_values())
        for (int l : {1, 2})
            for (const BetaPoly& b : beta_basis(beta, l, 6))
                for (double rho : {0.5, 1.0, 3.0}) {
                    const auto [lhs, rhs] = mean_value_check(b, rho);
                    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
                }
    return result(worst <= 1e-6, {{"max_rel_err", worst}});
}

CheckResult beta_eigen(std::uint64_t)
{
    double worst = 0.0;
    for (double beta : beta_values())
        for (int l : {1, 2})
            for (const BetaPoly& b : beta_basis(beta, l, 6)) worst = std::max(worst, sphere_eigencheck(b));
    return result(worst < 1e-4, {{"max_residual", worst}});
}

CheckResult beta_norm(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<double> rho;
    for (int i = 1; i <= 10; ++i) rho.push_back(0.1 * i);
    double worst = 0.0;
    int violations = 0, fields = 0;
    for (int l : {1, 2}) {
        const ConeSpec cone(3, 3, l);
        for (int trial = 0; trial < 10; ++trial, ++fields) {
            const auto prof = field_norm_profile(synthesize_field(cone, random_spec(rng, l)), rho);
            for (std::size_t i = 0; i < prof.size(); ++i) {
                worst = std::max(worst, prof[i].rel_err);
                if (i > 0) violations += prof[i].scaled < prof[i - 1].scaled * (1 - 1e-10);
            }
        }
    }
    return result(worst <= 1e-4 && violations == 0,
                  {{"fields", fields}, {"max_rel_err", worst}, {"monotonicity_violations", violations}});
}

CheckResult beta_sup_l2(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const ConeSpec cone(3, 3, 1);
    const std::vector<double> one{1.0};
    double c = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const JacobiField raw = synthesize_field(cone, random_spec(rng, 1));
        const double s = scaled_sup(raw, 1.0);
        if (s == 0.0) continue;
        std::vector<FieldMode> modes = raw.modes();
        for (FieldMode& m : modes) m.coeff /= s;
        const JacobiField f(cone, modes);
        c = std::max(c, std::pow(scaled_sup(f, 0.5), 2) / field_norm_profile(f, one)[0].integral);
    }
    return result(std::isfinite(c) && c > 0.0 && c < 1e3, {{"fields", 50}, {"fitted_constant", c}});
}

// ---- curvature ----

CheckResult curvature_warped(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + trial % 3;
        const int l = 1 + (trial / 3) % 2;
        Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(k, k);
        Eigen::VectorXd g(k);
        for (int i = 0; i < k; ++i) {
            g[i] = U(rng);
            for (int j = 0; j <= i; ++j) Q(i, j) = Q(j, i) = U(rng);
        }
        const double c0 = 1.0 + U(rng);
        GraphFunction w;
        w.value = [=](const VectorXd& x) { return c0 + g.dot(x) + 0.5 * x.dot(Q * x); };
        w.gradient = [=](const VectorXd& x) { return VectorXd(g + Q * x); };
        w.hessian = [=](const VectorXd&) { return Q; };
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(l, l);
        Eigen::VectorXd b(l);
        for (int i = 0; i < l; ++i) {
            b[i] = 0.5 * U(rng);
            for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = 0.5 * U(rng);
        }
        WarpSpec spec;
        spec.l = l;
        spec.patch = graph_patch(k, w);
        spec.f.value = [=](const VectorXd& y) { return std::exp(b.dot(y) + 0.5 * y.dot(A * y)); };
        spec.f.gradient = [=](const VectorXd& y) {
            return VectorXd(std::exp(b.dot(y) + 0.5 * y.dot(A * y)) * (b + A * y));
        };
        spec.f.hessian = [=](const VectorXd& y) {
            const VectorXd d = b + A * y;
            return MatrixXd(std::exp(b.dot(y) + 0.5 * y.dot(A * y)) * (A + d * d.transpose()));
        };
        VectorXd u(k), y(l), uy(k + l);
        for (int i = 0; i < k; ++i) u[i] = 0.5 * U(rng);
        for (int i = 0; i < l; ++i) y[i] = 0.5 * U(rng);
        uy << u, y;
        const double formula = warped_mean_curvature(spec, u, y);
        const double oracle = fd_mean_curvature(warped_patch(spec), uy);
        worst = std::max(worst, std::abs(formula - oracle) / std::max(1.0, std::abs(oracle)));
    }
    return result(worst <= 1e-5, {{"configurations", 100}, {"max_rel_err", worst}});
}

CheckResult curvature_constant_warp(std::uint64_t)
{
    double worst = 0.0;
    for (int k : {1, 2, 3})
        for (double c : {0.5, 1.0, 2.5, 7.0}) {
            const SurfacePatch s = sphere_patch(k, 1.5);
            WarpSpec spec;
            spec.l = 2;
            spec.patch = s;
            spec.f.value = [c](const VectorXd&) { return c; };
            spec.f.gradient = [](const VectorXd&) { return VectorXd::Zero(2).eval(); };
            spec.f.hessian = [](const VectorXd&) { return MatrixXd::Zero(2, 2).eval(); };
            const VectorXd u = VectorXd::Constant(k, 0.3);
            const VectorXd y = VectorXd::Constant(2, 0.4);
            worst = std::max(worst, std::abs(warped_mean_curvature(spec, u, y) - patch_geometry(s, u).mean_curvature / c));
        }
    return result(worst == 0.0, {{"max_abs_diff", worst}});
}

CheckResult curvature_linearization(std::uint64_t)
{
    const std::vector<double> radii{1.0, 2.0, 5.0, 10.0, 50.0, 200.0};
    const SpectralTable table = spectral_table(ConeSpec(3, 3), 4);
    const GraphBase cone = GraphBase::on_cone(ConeSpec(3, 3));
    double worst = 0.0;
    for (int j = 1; j <= 4; ++j)
        for (double a : {-1.5, -2.0, 0.0, 0.7}) {
            const auto exact = linearized_mc_mode(cone, table, j, a, radii);
            const auto num = linearized_mc_numeric(cone, table, j, a, radii);
            for (std::size_t i = 0; i < radii.size(); ++i) {
                const double scale = std::pow(radii[i], a - 2);
                worst = std::max(worst, std::abs(exact[i] - num[i]) / (scale * std::max(1.0, std::abs(exact[i] / scale))));
            }
        }
    return result(worst < 1e-8, {{"max_scaled_err", worst}});
}

CheckResult curvature_leaf_graph(std::uint64_t)
{
    const std::vector<double> radii{3.0, 10.0, 100.0, 1000.0, 5000.0};
    const GraphBase cone = GraphBase::on_cone(ConeSpec(3, 3));
    double worst = 0.0;
    for (int side : {1, -1}) {
        const CurvatureTrace t = graphical_mc(cone, leaf_graph_profile(c33().leaf(side)), radii);
        for (std::size_t i = 0; i < t.r.size(); ++i) worst = std::max(worst, t.r[i] * std::abs(t.value[i]));
    }
    return result(worst < 1e-6, {{"max_scaled_residual", worst}});
}

CheckResult curvature_quadratic(std::uint64_t)
{
    const GraphBase cone = GraphBase::on_cone(ConeSpec(3, 3));
    const std::vector<double> radii{1.0, 1.5, 2.0};
    std::vector<double> ratio, sup;
    for (double d : {1e-2, 1e-3, 1e-4}) {
        const CurvatureTrace t = graphical_mc(cone, power_profile(d, -2.0), radii, false);
        double s = 0.0;
        for (std::size_t i = 0; i < t.r.size(); ++i) s = std::max(s, t.r[i] * std::abs(t.value[i]));
        sup.push_back(s);
        ratio.push_back(s / (d * d));
    }
    const double order = std::log(sup[0] / sup[1]) / std::log(10.0);
    const double bound = *std::max_element(ratio.begin(), ratio.end());
    return result(bound < 1e-2 && order >= 1.9, {{"residual_over_delta2", ratio}, {"order", order}});
}

// ---- excess ----

CheckResult excess_three_annulus(std::uint64_t seed)
{
    int failures = 0, premises = 0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        const ThreeAnnulusInstance x = random_three_annulus(derive_seed(seed, i));
        failures += !x.result.holds();
        premises += x.result.premise;
    }
    return result(failures == 0, {{"trials", 100000}, {"failures", failures}, {"premises", premises}});
}

CheckResult excess_identity(std::uint64_t)
{
    const double gamma = c33().gamma();
    double worst = 0.0;
    for (double lambda : {0.5, -0.5, 1e-3, 3.0, -2.0})
        for (double R : {5.0, 10.0, 40.0}) {
            const double E = excess(TestSurface::leaf(c33(), lambda, R), 0.0, R);
            const double exact = std::pow(R, gamma - 1.0) * std::abs(lambda);
            worst = std::max(worst, std::abs(E - exact) / exact);
        }
    const double example = excess(TestSurface::leaf(c33(), 0.5, 10.0), 0.0, 10.0);
    return result(worst <= 1e-8 && std::abs(example - 5e-4) <= 5e-12,
                  {{"max_rel_err", worst}, {"c33_lambda_0.5_R_10", example}});
}

TestSurface random_surface(std::mt19937_64& rng, int kind, const JacobiField& v)
{
    std::uniform_real_distribution<double> ut(-3.0, 3.0);
    switch (kind) {
    case 0: return TestSurface::leaf(c33(), ut(rng), 40.0);
    case 1: {
        const double a = ut(rng), b = ut(rng);
        const std::vector<LeafPiece> p{{a, 0.0, 10.0}, {b, 10.0, 40.0}};
        return TestSurface::leaf_pieces(c33(), p);
    }
    default: return TestSurface::jacobi_graph(c33(), v, 1e-2 * ut(rng), 1.0, 40.0);
    }
}

CheckResult excess_triangle(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(-3.0, 3.0), uR(2.0, 40.0);
    const ModeRequest modes[] = {{1, 0, 1.0, 0}, {2, 0, 0.3, 0}};
    const JacobiField v = synthesize_field(ConeSpec(3, 3), modes);
    int checked = 0, failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const TestSurface M = random_surface(rng, trial % 3, v);
        const double lam = ut(rng), lam2 = ut(rng), R = uR(rng);
        const Region U = trial % 2 ? Region::ball(R) : Region::annulus(R / 2, R);
        try {
            const double d1 = trap_distance(M, lam, U), d2 = trap_distance(M, lam2, U);
            ++checked;
            failures += !(d1 <= (d2 + std::abs(lam - lam2)) * (1.0 + 4e-16));
        } catch (const EmptyIntersection&) {
        }
    }
    return result(failures == 0 && checked > 50, {{"checked", checked}, {"failures", failures}});
}

CheckResult excess_scaling(std::uint64_t)
{
    const double g = c33().gamma();
    const ModeRequest modes[] = {{1, 0, 1.0, 0}, {2, 0, -0.2, 0}};
    const JacobiField v = synthesize_field(ConeSpec(3, 3), modes);
    const std::vector<TestSurface> surfaces{
        TestSurface::leaf(c33(), 0.6, 20.0), TestSurface::leaf(c33(), -1.1, 20.0),
        TestSurface::leaf_pieces(c33(), std::vector<LeafPiece>{{0.3, 0.0, 6.0}, {-0.8, 6.0, 20.0}}),
        TestSurface::jacobi_graph(c33(), v, 5e-3, 1.0, 20.0)};
    double worst = 0.0;
    for (const TestSurface& M : surfaces)
        for (double c : {0.5, 2.0, 7.0}) {
            const TestSurface cM = M.scaled(c, c33());
            const double k = std::pow(c, 1.0 - g);
            for (double lam : {0.0, 0.4, -0.9})
                for (const Region U : {Region::ball(20.0), Region::annulus(3.0, 15.0)}) {
                    const double d = trap_distance(M, lam, U);
                    const double dc = trap_distance(cM, k * lam, Region{c * U.inner, c * U.outer});
                    worst = std::max(worst, std::abs(dc - k * d) / (k * std::max(d, 1e-3)));
                }
        }
    return result(worst <= 1e-9, {{"max_rel_err", worst}});
}

CheckResult excess_dichotomy(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const ConeSpec c33s(3, 3);
    const ModeRequest lowest[] = {{1, 0, -2.5, 0}};
    const DichotomyReport pure = dichotomy_experiment(synthesize_field(c33s, lowest), geometric(1.0, 10.0, 5), 1.0);
    double pure_max_slope = -std::numeric_limits<double>::infinity();
    for (const DichotomyRow& r : pure.rows)
        if (!std::isnan(r.slope)) pure_max_slope = std::max(pure_max_slope, r.slope);
    const bool pure_ok = pure.decay_ceiling_holds && pure_max_slope <= pure.gamma - 1.0 + 0.01;

    // Tight case: the dominant homogeneity gamma + 1 sits exactly at gamma + eps0.
    const ModeRequest tight_modes[] = {{1, 0, 1.0, 0}, {1, 1, 0.5, 0}};
    const DichotomyReport tight =
        dichotomy_experiment(synthesize_field(ConeSpec(3, 3, 1), tight_modes), geometric(1e2, 10.0, 7), 1.0);
    const double tight_margin = tight.rows.back().slope - (tight.gamma - 1.0 + tight.eps0);

    int fields = 0, slope_failures = 0, floor_failures = 0, implication_failures = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (const ConeSpec cone : {ConeSpec(3, 3, 1), ConeSpec(2, 4, 0), ConeSpec(3, 3, 2)})
        for (int trial = 0; trial < 10; ++trial) {
            const JacobiField v = random_higher_field(rng, cone);
            const DichotomyReport rep = dichotomy_experiment(v, geometric(1e2, 10.0, 7), 1.0);
            if (!rep.has_higher) continue;
            ++fields;
            const double margin = rep.rows.back().slope - (rep.gamma - 1.0 + rep.eps0);
            worst_margin = std::min(worst_margin, margin);
            slope_failures += margin < -0.01;
            floor_failures += rep.growth_floor_from > static_cast<int>(rep.rows.size()) - 3;
            implication_failures += rep.implication_failures;
        }
    return result(pure_ok && tight_margin >= -0.01 && slope_failures == 0 && floor_failures == 0,
                  {{"pure_max_slope", pure_max_slope},
                   {"tight_growth_margin", tight_margin},
                   {"gamma_minus_1", pure.gamma - 1.0},
                   {"pure_decay_ceiling", pure.decay_ceiling_holds},
                   {"fields", fields},
                   {"worst_growth_margin", worst_margin},
                   {"growth_slope_failures", slope_failures},
                   {"growth_floor_failures", floor_failures},
                   {"doubling_implication_failures", implication_failures}});
}

CheckResult excess_negativity(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    int finite = 0, total = 0;
    double largest = 0.0;
    for (const ConeSpec c : {ConeSpec(3, 3, 1), ConeSpec(3, 3, 2), ConeSpec(2, 4, 0), ConeSpec(1, 5, 1)})
        for (int i = 0; i < 50; ++i) {
            ++total;
            if (const auto r = negativity_radius(random_higher_field(rng, c), 1e12)) {
                ++finite;
                largest = std::max(largest, *r);
            }
        }
    int positive_none = 0;
    for (double a : {0.1, 1.0, 10.0}) {
        const ModeRequest m[] = {{1, 0, a, 0}};
        positive_none += !negativity_radius(synthesize_field(ConeSpec(3, 3, 1), m), 1e12).has_value();
    }
    return result(finite == total && positive_none == 3,
                  {{"fields", total}, {"finite", finite}, {"largest_radius", largest}, {"positive_lowest_none", positive_none}});
}

struct Entry {
    const char* suite;
    const char* name;
    CheckFn fn;
};

const std::vector<Entry>& registry()
{
    static const std::vector<Entry> r{
        {"spectrum", "c33_exponents", spectrum_c33},
        {"spectrum", "exponent_identities", spectrum_identities},
        {"spectrum", "brute_force_spectrum", spectrum_brute_force},
        {"spectrum", "stability_scan", spectrum_stability},
        {"foliation", "profile_residual", foliation_residual},
        {"foliation", "side_and_nesting", foliation_nesting},
        {"foliation", "fit_exponent", foliation_fit},
        {"foliation", "scaling_identity", foliation_scaling},
        {"foliation", "density_ratio", foliation_density},
        {"foliation", "phi_tail", foliation_phi},
        {"beta", "exact_kernel", beta_exact},
        {"beta", "orthogonality", beta_orthogonality},
        {"beta", "mean_value", beta_mean_value},
        {"beta", "eigen_relation", beta_eigen},
        {"beta", "norm_identity", beta_norm},
        {"beta", "sup_l2", beta_sup_l2},
        {"curvature", "warped_oracle", curvature_warped},
        {"curvature", "constant_warp", curvature_constant_warp},
        {"curvature", "cone_linearization", curvature_linearization},
        {"curvature", "leaf_graph", curvature_leaf_graph},
        {"curvature", "quadratic_vanishing", curvature_quadratic},
        {"excess", "three_annulus", excess_three_annulus},
        {"excess", "excess_identity", excess_identity},
        {"excess", "triangle", excess_triangle},
        {"excess", "scaling", excess_scaling},
        {"excess", "dichotomy", excess_dichotomy},
        {"excess", "negativity", excess_negativity},
    };
    return r;
}

} // namespace

bool SuiteReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string SuiteReport::first_failure() const
{
    for (const CheckResult& c : checks)
        if (!c.passed) return suite + "." + c.name;
    return {};
}

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{"spectrum", "foliation", "beta", "curvature", "excess"};
    return names;
}

std::vector<std::string> check_names(const std::string& suite)
{
    std::vector<std::string> out;
    for (const Entry& e : registry())
        if (suite == e.suite) out.emplace_back(e.name);
    if (out.empty()) throw InvalidArgument("unknown suite " + suite);
    return out;
}

CheckResult run_check(const std::string& suite, const std::string& check, std::uint64_t seed)
{
    std::size_t index = 0;
    for (const Entry& e : registry()) {
        ++index;
        if (suite != e.suite || check != e.name) continue;
        CheckResult r;
        try {
            r = e.fn(derive_seed(seed, index));
        } catch (const Error& err) {
            r = result(false, {{"error", err.name()}, {"message", err.what()}});
        }
        r.name = check;
        return r;
    }
    throw InvalidArgument("unknown check " + suite + "." + check);
}

SuiteReport run_suite(const std::string& suite, std::uint64_t seed)
{
    SuiteReport rep;
    rep.suite = suite;
    rep.seed = seed;
    for (const std::string& name : check_names(suite)) rep.checks.push_back(run_check(suite, name, seed));
    return rep;
}

nlohmann::json to_json(const SuiteReport& report)
{
    Json checks = Json::array();
    for (const CheckResult& c : report.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return {{"suite", report.suite}, {"seed", report.seed}, {"passed", report.passed()}, {"checks", checks}};
}

} // namespace conelab
