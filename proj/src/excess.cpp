#include "conelab/excess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "conelab/errors.hpp"
#include "conelab/format.hpp"

namespace conelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

ModeVector::ModeVector(std::vector<double> q, std::vector<double> b) : q_(std::move(q)), b_(std::move(b))
{
    if (q_.size() != b_.size()) throw InvalidArgument("q and b must have the same length");
    for (std::size_t i = 0; i < q_.size(); ++i) {
        if (!std::isfinite(q_[i]) || !std::isfinite(b_[i])) throw InvalidArgument("entries must be finite");
        if (i > 0 && !(q_[i] > q_[i - 1])) throw InvalidArgument("q must be strictly increasing");
    }
}

double ModeVector::log_psi(double t) const
{
    double top = -kInf;
    for (std::size_t i = 0; i < q_.size(); ++i)
        if (b_[i] != 0.0) top = std::max(top, 2.0 * std::log(std::abs(b_[i])) + 2.0 * q_[i] * t);
    if (top == -kInf) return top;
    double sum = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i)
        if (b_[i] != 0.0) sum += std::exp(2.0 * std::log(std::abs(b_[i])) + 2.0 * q_[i] * t - top);
    return top + std::log(sum);
}

double ModeVector::psi(double t) const
{
    double s = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) s += b_[i] * b_[i] * std::exp(2.0 * q_[i] * t);
    return s;
}

double ModeVector::eps0() const
{
    return q_.size() < 2 ? 1.0 : std::min(q_[1] - q_[0], 1.0);
}

double SurfacePoint::radius() const
{
    return std::sqrt(u * u + v * v + w * w);
}

TestSurface TestSurface::leaf(const Foliation& foliation, double t, double r_max)
{
    if (!(r_max > 0) || !std::isfinite(t)) throw InvalidArgument("leaf needs finite t and r_max > 0");
    TestSurface out;
    out.gamma_ = foliation.gamma();
    out.l_ = foliation.cone().l;
    const double alpha = foliation.cone().ray_angle();
    if (t == 0.0) {
        const double r_min = 1e-6 * r_max;
        const int n = static_cast<int>(std::ceil(kMinDensity * std::log(r_max / r_min))) + 1;
        for (int i = 0; i < n; ++i) {
            const double r = r_max * std::exp(-std::log(r_max / r_min) * (n - 1 - i) / (n - 1));
            const double u = r * std::cos(alpha), v = r * std::sin(alpha);
            out.points_.push_back({u, v, 0.0, foliation.parameter(u, v)});
        }
        return out;
    }
    const ProfileCurve& curve = foliation.leaf(t > 0 ? 1 : -1);
    const double c = std::pow(std::abs(t), 1.0 / (1.0 - curve.gamma())) / curve.u0();
    if (c * curve.max_radius() < r_max) throw InvalidArgument("leaf is not sampled out to r_max");
    const double ac = curve.canonical_ray_angle();
    auto push = [&](double u, double v) {
        if (curve.sign() < 0) std::swap(u, v);
        out.points_.push_back({u, v, 0.0, foliation.parameter(u, v)});
    };
    // Cap between the axis and the first stored sample, from the axis series.
    const AxisSeries series(curve.canonical_p(), curve.canonical_q(), curve.ode_sign());
    const double cap = curve.states().front().s / curve.u0(), scale = c * curve.u0();
    constexpr int kCap = 200;
    for (int i = 0; i < kCap; ++i) {
        const auto [u, v] = series.position(cap * i / kCap);
        if (scale * std::hypot(u, v) > r_max) return out;
        push(scale * u, scale * v);
    }
    const double s0 = curve.states().front().sigma, s1 = curve.states().back().sigma;
    const double ds = curve.sigma_step() / 3.0;
    const auto n = static_cast<std::size_t>(std::floor((s1 - s0) / ds));
    for (std::size_t i = 0; i <= n; ++i) {
        const ProfileState x = curve.state_at(std::min(s0 + ds * static_cast<double>(i), s1));
        const double r = c * std::exp(x.t);
        if (r > r_max) break;
        push(r * std::cos(ac + x.delta), r * std::sin(ac + x.delta));
    }
    return out;
}

TestSurface TestSurface::leaf_pieces(const Foliation& foliation, std::span<const LeafPiece> pieces)
{
    TestSurface out;
    out.gamma_ = foliation.gamma();
    out.l_ = foliation.cone().l;
    for (const LeafPiece& p : pieces) {
        if (!(p.r_lo >= 0) || !(p.r_hi > p.r_lo)) throw InvalidArgument("piece needs 0 <= r_lo < r_hi");
        for (const SurfacePoint& x : leaf(foliation, p.t, p.r_hi).points_) {
            const double r = std::hypot(x.u, x.v);
            if (r >= p.r_lo) out.points_.push_back(x);
        }
    }
    return out;
}

TestSurface TestSurface::jacobi_graph(const Foliation& foliation, const JacobiField& field, double delta,
                                      double r_lo, double r_hi)
{
    if (!(field.cone().p == foliation.cone().p && field.cone().q == foliation.cone().q &&
          field.cone().l == foliation.cone().l))
        throw InvalidArgument("field and foliation live on different cones");
    if (!(r_lo > 0) || !(r_hi > r_lo)) throw InvalidArgument("graph needs 0 < r_lo < r_hi");
    TestSurface out;
    out.gamma_ = foliation.gamma();
    out.l_ = foliation.cone().l;
    out.cylindrical_ = false;
    const int per_radius = 32 * (out.l_ == 0 ? 1 : 16);
    const double span = std::log(r_hi / r_lo);
    const int per_unit = (kMinDensity + per_radius - 1) / per_radius + 1;
    const int n_radii = std::max(2, static_cast<int>(std::ceil(per_unit * std::max(span, 1.0))) + 1);
    const double alpha = foliation.cone().ray_angle();
    const double sa = std::sin(alpha), ca = std::cos(alpha);
    for (const ConePoint& x : sample_grid(field.cone(), r_lo, r_hi, n_radii, r_hi)) {
        const double h = delta * field(x);
        const double u = x.r * ca + h * sa, v = x.r * sa - h * ca;
        if (!(u >= 0.0 && v >= 0.0)) throw GraphFailure("graph leaves the quadrant");
        double w = 0.0;
        for (double yi : x.y) w += yi * yi;
        out.points_.push_back({u, v, std::sqrt(w), foliation.parameter(u, v)});
    }
    return out;
}

TestSurface TestSurface::scaled(double c, const Foliation& foliation) const
{
    if (!(c > 0) || !std::isfinite(c)) throw InvalidArgument("scale factor must be positive");
    TestSurface out = *this;
    for (SurfacePoint& x : out.points_) {
        x.u *= c;
        x.v *= c;
        x.w *= c;
        x.t = foliation.parameter(x.u, x.v);
    }
    return out;
}

bool TestSurface::contains(const SurfacePoint& x, const Region& U) const
{
    if (!cylindrical_ || l_ == 0) {
        const double r = x.radius();
        return r >= U.inner && r < U.outer;
    }
    // Some y puts (x, y) in U as soon as |x| < outer.
    return std::hypot(x.u, x.v) < U.outer;
}

double trap_distance(const TestSurface& M, double lambda, const Region& U)
{
    if (!(U.outer > U.inner) || U.inner < 0) throw InvalidArgument("region needs 0 <= inner < outer");
    double d = -1.0;
    for (const SurfacePoint& x : M.points())
        if (M.contains(x, U)) d = std::max(d, std::abs(x.t - lambda));
    if (d < 0.0) throw EmptyIntersection("no sample of the surface lies in the region");
    return d;
}

double excess(const TestSurface& M, double lambda, double R)
{
    if (!(R > 0)) throw InvalidArgument("R must be positive");
    return std::pow(R, M.gamma() - 1.0) * trap_distance(M, lambda, Region::ball(R));
}

ThreeAnnulusResult three_annulus_check(const ModeVector& modes, int k, double eps, double T, double t)
{
    if (k < 0 || k >= static_cast<int>(modes.size())) throw PreconditionViolated("k outside the mode vector");
    if (!(eps > 0)) throw PreconditionViolated("eps must be positive");
    if (!(T >= 1.0 / eps)) throw PreconditionViolated("T must be at least 1/eps");
    const auto& q = modes.q();
    const std::size_t ku = static_cast<std::size_t>(k);
    const double next = ku + 1 < q.size() ? q[ku + 1] : kInf;
    if (!(3.0 * eps < next - q[ku])) throw PreconditionViolated("3 eps must be below the gap q_{k+1} - q_k");

    const double l0 = modes.log_psi(t), l1 = modes.log_psi(t + T), l2 = modes.log_psi(t + 2.0 * T);
    ThreeAnnulusResult out;
    if (l0 == -kInf) {
        out.premise = out.conclusion = true;
        return out;
    }
    out.premise = l1 >= 2.0 * (q[ku] + eps) * T + l0;
    out.conclusion = next != kInf && l2 >= 2.0 * (next - eps) * T + l1;
    return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (i + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

ThreeAnnulusInstance random_three_annulus(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    std::vector<double> q, b;
    double qi = uniform(-5.0, 0.0);
    for (int i = 0; i < n; ++i) {
        if (i > 0) qi += uniform(0.05, 3.0);
        q.push_back(qi);
        b.push_back(uniform(0.0, 1.0) < 0.2 ? 0.0 : std::normal_distribution<double>(0.0, 1.0)(rng));
    }
    ThreeAnnulusInstance x;
    x.seed = seed;
    x.k = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const std::size_t ku = static_cast<std::size_t>(x.k);
    const double gap = ku + 1 < q.size() ? q[ku + 1] - q[ku] : 3.0;
    x.eps = std::min(gap, 3.0) / 3.0 * uniform(0.05, 0.95);
    x.T = uniform(1.0, 4.0) / x.eps;
    x.t = uniform(-5.0, 5.0);
    x.modes = ModeVector(std::move(q), std::move(b));
    x.result = three_annulus_check(x.modes, x.k, x.eps, x.T, x.t);
    return x;
}

nlohmann::json to_json(const ThreeAnnulusInstance& x)
{
    return {{"seed", x.seed}, {"q", x.modes.q()}, {"b", x.modes.b()}, {"k", x.k},
            {"eps", x.eps},   {"T", x.T},         {"t", x.t},         {"premise", x.result.premise},
            {"conclusion", x.result.conclusion}};
}

double spectral_gap_eps0(const ConeSpec& cone)
{
    const SpectralTable table = spectral_table(cone, 2);
    const double q1 = table.gamma();
    double q2 = table.entry(2).gamma_plus;
    if (cone.l >= 1) q2 = std::min(q2, q1 + 1.0);
    return std::min(q2 - q1, 1.0);
}

double linear_excess(const JacobiField& field, double R)
{
    return std::pow(R, field.gamma() - 1.0) * scaled_sup(field, R);
}

DichotomyReport dichotomy_experiment(const JacobiField& field, std::span<const double> R_list, double eps)
{
    if (!(eps > 0)) throw InvalidArgument("eps must be positive");
    if (R_list.size() < 3) throw InsufficientScales("need at least three scales");
    for (double R : R_list)
        if (!(R > 0) || !std::isfinite(R)) throw InsufficientScales("scales must be positive");
    const double L = R_list[1] / R_list[0];
    for (std::size_t k = 1; k < R_list.size(); ++k)
        if (std::abs(R_list[k] / R_list[k - 1] - L) > 1e-9 * L) throw InsufficientScales("scales must be geometric");
    if (L < std::exp(2.0 / eps) * (1.0 - 1e-12)) throw InsufficientScales("scale ratio below e^{2/eps}");

    DichotomyReport rep;
    rep.gamma = field.gamma();
    rep.eps = eps;
    rep.eps0 = spectral_gap_eps0(field.cone());
    rep.eps2 = std::min(rep.eps0, 1.0) / 16.0;
    rep.L = L;
    bool any = false, only_lowest = true;
    for (const FieldMode& m : field.modes()) {
        if (m.coeff == 0.0) continue;
        any = true;
        if (m.j != 1 || m.poly.degree() != 0) only_lowest = false;
        if (m.homogeneity > rep.gamma) rep.has_higher = true;
    }
    rep.pure_lowest = any && only_lowest;

    const double g = rep.gamma;
    const double logL = std::log(L);
    for (std::size_t k = 0; k < R_list.size(); ++k) {
        DichotomyRow row;
        row.R = R_list[k];
        row.N = linear_excess(field, row.R);
        row.slope = k == 0 ? std::numeric_limits<double>::quiet_NaN()
                           : std::log(row.N / rep.rows.back().N) / logL;
        row.floor_ratio = row.N * std::pow(row.R, 1.0 - g - rep.eps2);
        rep.rows.push_back(row);
    }
    auto& rows = rep.rows;
    for (std::size_t k = 0; k + 2 < rows.size(); ++k) {
        rows[k].condition_triggered = rows[k].N > 0.0 && rows[k + 1].N >= std::pow(L, g - 1.0 + eps) * rows[k].N;
        if (rows[k].condition_triggered) {
            rows[k].conclusion_holds = rows[k + 2].N >= std::pow(L, g - 1.0 + rep.eps0 - eps) * rows[k + 1].N;
            if (!rows[k].conclusion_holds) ++rep.implication_failures;
        }
    }
    if (rep.pure_lowest)
        for (std::size_t k = 0; k + 1 < rows.size(); ++k)
            if (rows[k + 1].N > (1.0 + 1e-9) * std::pow(L, g - 1.0) * rows[k].N) rep.decay_ceiling_holds = false;
    int from = static_cast<int>(rows.size()) - 1;
    while (from > 0 && rows[from - 1].floor_ratio <= rows[from].floor_ratio) --from;
    rep.growth_floor_from = from;
    return rep;
}

std::string to_csv(const DichotomyReport& report)
{
    std::ostringstream out;
    out << "R,N,slope,condition_triggered\n";
    for (const DichotomyRow& r : report.rows)
        out << fmt_real(r.R) << ',' << fmt_real(r.N) << ',' << fmt_real(r.slope) << ','
            << (r.condition_triggered ? 1 : 0) << '\n';
    return out.str();
}

nlohmann::json to_json(const DichotomyReport& report)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const DichotomyRow& r : report.rows)
        rows.push_back({{"R", r.R},
                        {"N", r.N},
                        {"slope", std::isnan(r.slope) ? nlohmann::json() : nlohmann::json(r.slope)},
                        {"condition_triggered", r.condition_triggered},
                        {"conclusion_holds", r.conclusion_holds},
                        {"floor_ratio", r.floor_ratio}});
    return {{"gamma", report.gamma},
            {"eps", report.eps},
            {"eps0", report.eps0},
            {"eps1", nullptr},
            {"eps1_available", report.eps1_available},
            {"eps2", report.eps2},
            {"L", report.L},
            {"pure_lowest", report.pure_lowest},
            {"has_higher", report.has_higher},
            {"implication_failures", report.implication_failures},
            {"decay_ceiling_holds", report.decay_ceiling_holds},
            {"growth_floor_from", report.growth_floor_from},
            {"rows", rows}};
}

std::optional<double> negativity_radius(const JacobiField& field, double R_max)
{
    if (!(R_max > 0)) return std::nullopt;
    std::vector<double> radii;
    for (double R = 1.0; R < R_max; R *= 2.0) radii.push_back(R);
    radii.push_back(R_max);
    for (double R : radii)
        if (grid_min(field, R) < 0.0) return R;
    return std::nullopt;
}

} // namespace conelab
