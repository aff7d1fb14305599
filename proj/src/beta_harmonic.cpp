#include "conelab/beta_harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "conelab/errors.hpp"

namespace conelab {

namespace {

// Global adaptive tensor-product cubature: each cell uses the 15-point Kronrod rule per
// dimension with the embedded 7-point Gauss rule as error estimate, and the worst cell
// is bisected along the dimension whose Kronrod/Gauss difference is largest.
class Cubature {
public:
    using Integrand = std::function<double(std::span<const double>)>;

    Cubature(Integrand f, std::vector<double> lo, std::vector<double> hi)
        : f_(std::move(f)), d_(lo.size())
    {
        using KR = boost::math::quadrature::gauss_kronrod<double, 15>;
        using G7 = boost::math::quadrature::gauss<double, 7>;
        const auto& xa = KR::abscissa();
        const auto& wa = KR::weights();
        const auto& gw = G7::weights();
        // Nodes ordered -x7..x7; Gauss nodes are the even abscissa indices.
        for (int i = 7; i >= 1; --i) push(-xa[i], wa[i], i % 2 == 0 ? gw[i / 2] : 0.0);
        push(xa[0], wa[0], gw[0]);
        for (int i = 1; i <= 7; ++i) push(xa[i], wa[i], i % 2 == 0 ? gw[i / 2] : 0.0);
        cells_.push_back(evaluate(std::move(lo), std::move(hi)));
    }

    double integrate(double tol, std::size_t max_cells)
    {
        for (;;) {
            double value = 0.0, err = 0.0, l1 = 0.0;
            std::size_t worst = 0;
            for (std::size_t i = 0; i < cells_.size(); ++i) {
                value += cells_[i].value;
                err += cells_[i].err;
                l1 += cells_[i].l1;
                if (cells_[i].err > cells_[worst].err) worst = i;
            }
            if (!std::isfinite(value)) throw QuadratureFailure("non-finite integrand");
            if (err <= tol * l1 || l1 == 0.0) return value;
            if (cells_.size() >= max_cells) throw QuadratureFailure("adaptive refinement exceeded its budget");
            Cell c = std::move(cells_[worst]);
            const std::size_t k = c.split;
            const double mid = 0.5 * (c.lo[k] + c.hi[k]);
            std::vector<double> hi1 = c.hi, lo2 = c.lo;
            hi1[k] = mid;
            lo2[k] = mid;
            cells_[worst] = evaluate(c.lo, std::move(hi1));
            cells_.push_back(evaluate(std::move(lo2), c.hi));
        }
    }

private:
    struct Cell {
        std::vector<double> lo, hi;
        double value = 0.0, err = 0.0, l1 = 0.0;
        std::size_t split = 0;
    };

    void push(double x, double wk, double wg)
    {
        x_.push_back(x);
        wk_.push_back(wk);
        wg_.push_back(wg);
    }

    Cell evaluate(std::vector<double> lo, std::vector<double> hi) const
    {
        constexpr std::size_t m = 15;
        std::size_t total = 1;
        for (std::size_t k = 0; k < d_; ++k) total *= m;
        std::vector<double> vals(total), pt(d_);
        double scale = 1.0;
        for (std::size_t k = 0; k < d_; ++k) scale *= 0.5 * (hi[k] - lo[k]);
        std::vector<std::size_t> idx(d_, 0);
        double vk = 0.0, vg = 0.0, l1 = 0.0;
        for (std::size_t n = 0; n < total; ++n) {
            std::size_t rem = n;
            double wk = 1.0, wg = 1.0;
            for (std::size_t k = 0; k < d_; ++k) {
                idx[k] = rem % m;
                rem /= m;
                pt[k] = 0.5 * (lo[k] + hi[k]) + 0.5 * (hi[k] - lo[k]) * x_[idx[k]];
                wk *= wk_[idx[k]];
                wg *= wg_[idx[k]];
            }
            const double v = f_(pt);
            vals[n] = v;
            vk += wk * v;
            vg += wg * v;
            l1 += wk * std::abs(v);
        }
        Cell c{std::move(lo), std::move(hi), scale * vk, scale * std::abs(vk - vg), scale * l1, 0};
        // Per-dimension indicator: Kronrod minus Gauss along one axis, Kronrod elsewhere.
        double best = -1.0;
        for (std::size_t k = 0; k < d_; ++k) {
            std::size_t stride = 1;
            for (std::size_t i = 0; i < k; ++i) stride *= m;
            double ind = 0.0;
            for (std::size_t n = 0; n < total; ++n) {
                if ((n / stride) % m != 0) continue;
                double w = 1.0;
                std::size_t rem = n;
                for (std::size_t i = 0; i < d_; ++i) {
                    if (i != k) w *= wk_[rem % m];
                    rem /= m;
                }
                double line = 0.0;
                for (std::size_t j = 0; j < m; ++j) line += (wk_[j] - wg_[j]) * vals[n + j * stride];
                ind += w * std::abs(line);
            }
            if (ind > best) {
                best = ind;
                c.split = k;
            }
        }
        return c;
    }

    Integrand f_;
    std::size_t d_;
    std::vector<double> x_, wk_, wg_;
    std::vector<Cell> cells_;
};

constexpr std::size_t kMaxCells = 4000;

// Coordinates (t, angles of S^{l-1}) of S^l_+ with omega_1 = cos t, and the Jacobian.
// S^0 is handled by summing both signs in the caller.
struct HemisphereChart {
    int l;
    std::vector<double> lo, hi;

    explicit HemisphereChart(int l_) : l(l_)
    {
        lo.push_back(0.0);
        hi.push_back(std::numbers::pi / 2);
        for (int k = 0; k + 2 < l; ++k) {
            lo.push_back(0.0);
            hi.push_back(std::numbers::pi);
        }
        if (l >= 2) {
            lo.push_back(0.0);
            hi.push_back(2 * std::numbers::pi);
        }
    }

    // Writes omega (length l+1) for the chart point c; returns the Jacobian.
    double point(std::span<const double> c, std::span<double> w, double last_sign) const
    {
        double s = 1.0, jac = 1.0;
        w[0] = std::cos(c[0]);
        s = std::sin(c[0]);
        jac *= std::pow(s, l - 1);
        for (int k = 1; k + 1 < l; ++k) {
            w[k] = s * std::cos(c[k]);
            jac *= std::pow(std::sin(c[k]), l - 1 - k);
            s *= std::sin(c[k]);
        }
        if (l == 1) {
            w[1] = last_sign * s;
        } else if (l >= 2) {
            w[l - 1] = s * std::cos(c[l - 1]);
            w[l] = s * std::sin(c[l - 1]);
        }
        return jac;
    }
};

std::vector<Monomial> monomials(int l, int q)
{
    std::vector<Monomial> out;
    if (q < 0) return out;
    for (int a = q / 2; a >= 0; --a) {
        const int rest = q - 2 * a;
        if (l == 0) {
            if (rest == 0) out.push_back({a, {}});
            continue;
        }
        // Multi-indices of length l summing to rest, first index descending.
        std::vector<int> m(l, 0);
        std::function<void(int, int)> fill = [&](int i, int left) {
            if (i == l - 1) {
                m[i] = left;
                out.push_back({a, m});
                return;
            }
            for (int k = left; k >= 0; --k) {
                m[i] = k;
                fill(i + 1, left - k);
            }
        };
        fill(0, rest);
    }
    return out;
}

// Pochhammer (x)_k.
Rational pochhammer(const Rational& x, int k)
{
    Rational v = 1;
    for (int i = 0; i < k; ++i) v *= x + i;
    return v;
}

// Hemisphere moment of a product of two degree-q monomials, divided by the constant
// K_q = Gamma(1+beta/2) pi^{l/2} / Gamma(q + 1 + (beta+l)/2); zero when a y-power is odd.
Rational moment_ratio(const Rational& beta, const Monomial& x, const Monomial& y)
{
    Rational v = pochhammer(1 + beta / 2, x.a + y.a);
    for (std::size_t i = 0; i < x.m.size(); ++i) {
        const int e = x.m[i] + y.m[i];
        if (e % 2) return 0;
        v *= pochhammer(Rational(1, 2), e / 2);
    }
    return v;
}

double log_moment_constant(double beta, int l, int q)
{
    return std::lgamma(1 + beta / 2) + 0.5 * l * std::log(std::numbers::pi) -
           std::lgamma(q + 1 + (beta + l) / 2);
}

Rational inner_ratio(const Rational& beta, const RPoly& f, const RPoly& g)
{
    Rational v = 0;
    for (const auto& [x, cx] : f.terms)
        for (const auto& [y, cy] : g.terms) v += cx * cy * moment_ratio(beta, x, y);
    return v;
}

// Exact kernel of the beta-Laplacian on degree-q homogeneous polynomials.
std::vector<RPoly> kernel(const Rational& beta, int l, int q)
{
    const std::vector<Monomial> cols = monomials(l, q);
    const std::vector<Monomial> rows = monomials(l, q - 2);
    const std::size_t nc = cols.size(), nr = rows.size();
    std::vector<std::vector<Rational>> M(nr, std::vector<Rational>(nc, 0));
    for (std::size_t c = 0; c < nc; ++c) {
        RPoly h{l, {}};
        h.add(cols[c], 1);
        for (const auto& [mono, v] : beta_apply(beta, h).terms) {
            const auto r = static_cast<std::size_t>(std::find(rows.begin(), rows.end(), mono) - rows.begin());
            M[r][c] = v;
        }
    }
    // Reduced row echelon form.
    std::vector<int> pivot_col;
    std::size_t row = 0;
    for (std::size_t c = 0; c < nc && row < nr; ++c) {
        std::size_t piv = row;
        while (piv < nr && M[piv][c] == 0) ++piv;
        if (piv == nr) continue;
        std::swap(M[piv], M[row]);
        const Rational inv = 1 / M[row][c];
        for (auto& x : M[row]) x *= inv;
        for (std::size_t r = 0; r < nr; ++r) {
            if (r == row || M[r][c] == 0) continue;
            const Rational f = M[r][c];
            for (std::size_t k = 0; k < nc; ++k) M[r][k] -= f * M[row][k];
        }
        pivot_col.push_back(static_cast<int>(c));
        ++row;
    }
    std::vector<RPoly> out;
    for (std::size_t c = 0; c < nc; ++c) {
        if (std::find(pivot_col.begin(), pivot_col.end(), static_cast<int>(c)) != pivot_col.end()) continue;
        RPoly h{l, {}};
        h.add(cols[c], 1);
        for (std::size_t r = 0; r < pivot_col.size(); ++r)
            if (M[r][c] != 0) h.add(cols[pivot_col[r]], -M[r][c]);
        out.push_back(std::move(h));
    }
    return out;
}

void check_basis_args(int l, int q_max)
{
    if (l < 0) throw InvalidArgument("l must be non-negative");
    if (q_max < 0) throw InvalidArgument("q_max must be non-negative");
}

} // namespace

int Monomial::degree() const
{
    int d = 2 * a;
    for (int v : m) d += v;
    return d;
}

int RPoly::degree() const
{
    int d = -1;
    for (const auto& [mono, c] : terms) d = std::max(d, mono.degree());
    return d;
}

double RPoly::operator()(double r, std::span<const double> y) const
{
    double v = 0.0;
    for (const auto& [mono, c] : terms) {
        double t = c.convert_to<double>() * std::pow(r, 2 * mono.a);
        for (std::size_t i = 0; i < mono.m.size(); ++i) t *= std::pow(y[i], mono.m[i]);
        v += t;
    }
    return v;
}

void RPoly::add(const Monomial& mono, const Rational& c)
{
    if (c == 0) return;
    auto [it, inserted] = terms.try_emplace(mono, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms.erase(it);
    }
}

Rational exact_rational(double x)
{
    if (!std::isfinite(x)) throw InvalidArgument("non-finite value has no rational form");
    int e = 0;
    const double frac = std::frexp(x, &e);
    const auto mant = static_cast<long long>(std::ldexp(frac, 53));
    Rational v(mant);
    const int shift = e - 53;
    const boost::multiprecision::cpp_int two_pow = boost::multiprecision::cpp_int(1) << std::abs(shift);
    return shift >= 0 ? v * Rational(two_pow) : v / Rational(two_pow);
}

BetaPoly::BetaPoly(Rational beta, RPoly raw, int degree, double normalization)
    : beta_(std::move(beta)), beta_d_(beta_.convert_to<double>()), raw_(std::move(raw)), degree_(degree),
      normalization_(normalization)
{
    for (const auto& [mono, c] : raw_.terms) compiled_.push_back({mono.a, mono.m, c.convert_to<double>()});
}

double BetaPoly::operator()(double r, std::span<const double> y) const
{
    double v = 0.0;
    const double r2 = r * r;
    for (const Term& t : compiled_) {
        double x = t.c;
        for (int i = 0; i < t.a; ++i) x *= r2;
        for (std::size_t i = 0; i < t.m.size(); ++i)
            for (int k = 0; k < t.m[i]; ++k) x *= y[i];
        v += x;
    }
    return normalization_ * v;
}

RPoly beta_apply(const Rational& beta, const RPoly& h)
{
    RPoly out{h.l, {}};
    for (const auto& [mono, c] : h.terms) {
        if (mono.a > 0) {
            Monomial lower = mono;
            --lower.a;
            out.add(lower, c * (2 * mono.a) * (2 * mono.a + beta));
        }
        for (std::size_t i = 0; i < mono.m.size(); ++i) {
            if (mono.m[i] < 2) continue;
            Monomial lower = mono;
            lower.m[i] -= 2;
            out.add(lower, c * mono.m[i] * (mono.m[i] - 1));
        }
    }
    return out;
}

RPoly beta_apply(const BetaPoly& poly) { return beta_apply(poly.beta(), poly.raw()); }

int beta_kernel_dimension(int l, int q)
{
    return static_cast<int>(monomials(l, q).size() - monomials(l, q - 2).size());
}

std::vector<BetaPoly> beta_basis(const Rational& beta, int l, int q_max)
{
    check_basis_args(l, q_max);
    if (!(beta > 0)) throw InvalidArgument("beta must be positive");
    const double b = beta.convert_to<double>();
    std::vector<BetaPoly> out;
    for (int q = 0; q <= q_max; ++q) {
        std::vector<RPoly> ker = kernel(beta, l, q);
        // Gram-Schmidt in exact arithmetic: within a degree the hemisphere moments share
        // the factor K_q and differ by rational factors.
        std::vector<std::pair<RPoly, Rational>> ortho;
        for (RPoly& h : ker) {
            for (const auto& [e, ee] : ortho) {
                const Rational c = inner_ratio(beta, h, e) / ee;
                for (const auto& [mono, v] : e.terms) h.add(mono, -c * v);
            }
            const Rational hh = inner_ratio(beta, h, h);
            ortho.emplace_back(std::move(h), hh);
        }
        const double log_k = log_moment_constant(b, l, q);
        for (auto& [h, hh] : ortho) {
            const double norm2 = std::exp(log_k) * hh.convert_to<double>();
            out.emplace_back(beta, std::move(h), q, 1.0 / std::sqrt(norm2));
        }
    }
    return out;
}

std::vector<BetaPoly> beta_basis(double beta, int l, int q_max)
{
    if (!(beta > 0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
    return beta_basis(exact_rational(beta), l, q_max);
}

double hemisphere_moment(int l, double c, std::span<const int> m)
{
    if (static_cast<int>(m.size()) != l) throw InvalidArgument("multi-index length must equal l");
    if (!(c > -1)) throw InvalidArgument("omega_1 exponent must exceed -1");
    double log_v = std::lgamma((c + 1) / 2);
    double sum = (c + 1) / 2;
    for (int e : m) {
        if (e < 0) throw InvalidArgument("negative exponent");
        if (e % 2) return 0.0;
        log_v += std::lgamma((e + 1) / 2.0);
        sum += (e + 1) / 2.0;
    }
    return std::exp(log_v - std::lgamma(sum));
}

double hemisphere_integral(int l, const std::function<double(std::span<const double>)>& f, double tol)
{
    if (l < 0) throw InvalidArgument("l must be non-negative");
    std::vector<double> w(l + 1, 0.0);
    if (l == 0) {
        w[0] = 1.0;
        return f(w);
    }
    const HemisphereChart chart(l);
    Cubature cub(
        [&](std::span<const double> c) {
            double v = chart.point(c, w, 1.0) * f(w);
            if (l == 1) v += chart.point(c, w, -1.0) * f(w);
            return v;
        },
        chart.lo, chart.hi);
    return cub.integrate(tol, kMaxCells);
}

double half_ball_integral(int l, double rho, const std::function<double(double, std::span<const double>)>& f,
                          double tol)
{
    if (!(rho > 0)) throw InvalidArgument("rho must be positive");
    if (l < 0) throw InvalidArgument("l must be non-negative");
    std::vector<double> w(l + 1, 0.0), y(l, 0.0);
    auto at = [&](double s, double jac) {
        for (int i = 0; i < l; ++i) y[i] = s * w[i + 1];
        return jac * std::pow(s, l) * f(s * w[0], y);
    };
    if (l == 0) {
        Cubature cub([&](std::span<const double> c) { return f(c[0], y); }, {0.0}, {rho});
        return cub.integrate(tol, kMaxCells);
    }
    const HemisphereChart chart(l);
    std::vector<double> lo{0.0}, hi{rho};
    lo.insert(lo.end(), chart.lo.begin(), chart.lo.end());
    hi.insert(hi.end(), chart.hi.begin(), chart.hi.end());
    Cubature cub(
        [&](std::span<const double> c) {
            const auto ang = c.subspan(1);
            double v = at(c[0], chart.point(ang, w, 1.0));
            if (l == 1) v += at(c[0], chart.point(ang, w, -1.0));
            return v;
        },
        lo, hi);
    return cub.integrate(tol, kMaxCells);
}

std::pair<double, double> mean_value_check(const BetaPoly& poly, double rho)
{
    if (!(rho > 0)) throw InvalidArgument("rho must be positive");
    const std::vector<double> origin(poly.l(), 0.0);
    const double lhs = poly(0.0, origin);
    const double e = 1 + poly.beta_value();
    const double num =
        half_ball_integral(poly.l(), rho, [&](double r, std::span<const double> y) { return poly(r, y) * std::pow(r, e); });
    const double den = half_ball_integral(poly.l(), rho, [&](double r, std::span<const double>) { return std::pow(r, e); });
    return {lhs, num / den};
}

double sphere_eigencheck(const BetaPoly& poly)
{
    const int l = poly.l(), q = poly.degree();
    const double beta = poly.beta_value();
    const double ev = q * (q + l + beta);
    if (l >= 3) throw UnsupportedDimension("hemisphere eigencheck supports l <= 2");
    if (l == 0) {
        const std::vector<double> none;
        return std::abs(ev * poly(1.0, none));
    }
    // Fourth-order central differences, differencing before summing.
    constexpr double h = 5e-3;
    auto d1 = [&](const auto& g, double x) {
        return (8 * (g(x + h) - g(x - h)) - (g(x + 2 * h) - g(x - 2 * h))) / (12 * h);
    };
    auto d2 = [&](const auto& g, double x) {
        const double g0 = 2 * g(x);
        return (16 * ((g(x + h) + g(x - h)) - g0) - ((g(x + 2 * h) + g(x - 2 * h)) - g0)) / (12 * h * h);
    };
    double worst = 0.0;
    if (l == 1) {
        auto phi = [&](double t) {
            const double y[1] = {std::sin(t)};
            return poly(std::cos(t), y);
        };
        constexpr int n = 1000;
        for (int i = 0; i < n; ++i) {
            const double t = -1.5 + 3.0 * i / (n - 1);
            const double res = d2(phi, t) - (1 + beta) * std::tan(t) * d1(phi, t) + ev * phi(t);
            worst = std::max(worst, std::abs(res));
        }
        return worst;
    }
    // l = 2: omega = (cos t, sin t cos s, sin t sin s).
    for (int i = 0; i < 40; ++i) {
        const double t = 0.05 + (1.5 - 0.05) * i / 39;
        for (int k = 0; k < 25; ++k) {
            const double s = 2 * std::numbers::pi * k / 25;
            auto in_t = [&](double tt) {
                const double y[2] = {std::sin(tt) * std::cos(s), std::sin(tt) * std::sin(s)};
                return poly(std::cos(tt), y);
            };
            auto in_s = [&](double ss) {
                const double y[2] = {std::sin(t) * std::cos(ss), std::sin(t) * std::sin(ss)};
                return poly(std::cos(t), y);
            };
            const double st = std::sin(t);
            const double res = d2(in_t, t) + (std::cos(t) / st - (1 + beta) * std::tan(t)) * d1(in_t, t) +
                               d2(in_s, s) / (st * st) + ev * in_t(t);
            worst = std::max(worst, std::abs(res));
        }
    }
    return worst;
}

double hemisphere_inner(const BetaPoly& f, const BetaPoly& g)
{
    if (f.l() != g.l() || f.beta() != g.beta()) throw InvalidArgument("polynomials from different families");
    const double e = 1 + f.beta_value();
    return hemisphere_integral(f.l(), [&](std::span<const double> w) {
        const auto y = w.subspan(1);
        return std::pow(w[0], e) * f(w[0], y) * g(w[0], y);
    });
}

JacobiField::JacobiField(const ConeSpec& cone, std::vector<FieldMode> modes)
    : modes_(std::move(modes))
{
    int j_max = 1;
    for (const FieldMode& m : modes_) {
        if (m.j < 1) throw UnknownMode("spectral index must be >= 1");
        if (m.poly.l() != cone.l) throw InvalidArgument("mode polynomial has the wrong y-dimension");
        j_max = std::max(j_max, m.j);
    }
    table_ = spectral_table(cone, j_max);
    for (FieldMode& m : modes_) m.homogeneity = table_.entry(m.j).gamma_plus + m.poly.degree();
    std::stable_sort(modes_.begin(), modes_.end(),
                     [](const FieldMode& a, const FieldMode& b) { return a.homogeneity < b.homogeneity; });
    for (const FieldMode& m : modes_) psi_.push_back(link_eigenfunction(table_, m.j));
}

bool JacobiField::is_zero() const
{
    return std::all_of(modes_.begin(), modes_.end(), [](const FieldMode& m) { return m.coeff == 0.0; });
}

std::vector<double> JacobiField::homogeneities() const
{
    std::vector<double> out;
    for (const FieldMode& m : modes_)
        if (m.coeff != 0.0 && (out.empty() || m.homogeneity > out.back())) out.push_back(m.homogeneity);
    return out;
}

double JacobiField::operator()(const ConePoint& x) const
{
    double v = 0.0;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const FieldMode& m = modes_[i];
        if (m.coeff == 0.0) continue;
        v += m.coeff * std::pow(x.r, table_.entry(m.j).gamma_plus) * psi_[i](x.theta1, x.theta2) * m.poly(x.r, x.y);
    }
    return v;
}

double JacobiField::mode_sum(int j, double r, std::span<const double> y) const
{
    double v = 0.0;
    for (const FieldMode& m : modes_)
        if (m.j == j && m.coeff != 0.0) v += m.coeff * m.poly(r, y);
    return v == 0.0 ? 0.0 : v * std::pow(r, table_.entry(j).gamma_plus);
}

std::vector<ConePoint> sample_grid(const ConeSpec& cone, double r_lo, double r_hi, int n_radii, double R)
{
    if (!(r_lo > 0) || !(r_hi >= r_lo) || !(R >= r_hi) || n_radii < 2)
        throw InvalidArgument("grid needs 0 < r_lo <= r_hi <= R and two radii");
    const int l = cone.l;
    std::vector<ConePoint> out;
    for (int i = 0; i < n_radii; ++i) {
        const double r = r_hi * std::pow(r_lo / r_hi, static_cast<double>(n_radii - 1 - i) / (n_radii - 1));
        const double ymax = std::sqrt(std::max(0.0, R * R - r * r));
        std::vector<std::vector<double>> ys;
        if (l == 0) {
            ys.emplace_back();
        } else if (l == 1) {
            for (int k = 0; k < 16; ++k) ys.push_back({ymax * (-1.0 + 2.0 * k / 15)});
        } else {
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    std::vector<double> y(l, 0.0);
                    const double s = ymax * a / 3.0, phi = std::numbers::pi * b / 2;
                    y[0] = s * std::cos(phi);
                    y[1] = s * std::sin(phi);
                    ys.push_back(std::move(y));
                }
        }
        for (int t1 = 0; t1 < 8; ++t1)
            for (int t2 = 0; t2 < 4; ++t2)
                for (const auto& y : ys)
                    out.push_back({r, std::numbers::pi * t1 / 7, std::numbers::pi * t2 / 3, y});
    }
    return out;
}

std::vector<ConePoint> standard_grid(const ConeSpec& cone, double R)
{
    if (!(R > 0)) throw InvalidArgument("R must be positive");
    return sample_grid(cone, 1e-3 * R, R, 64, R);
}

double scaled_sup(const JacobiField& field, double R)
{
    double s = 0.0;
    for (const ConePoint& x : standard_grid(field.cone(), R))
        s = std::max(s, std::abs(std::pow(x.r, -field.gamma()) * field(x)));
    return s;
}

double grid_min(const JacobiField& field, double R)
{
    double m = std::numeric_limits<double>::infinity();
    for (const ConePoint& x : standard_grid(field.cone(), R)) m = std::min(m, field(x));
    return m;
}

JacobiField synthesize_field(const ConeSpec& cone, std::span<const ModeRequest> spec)
{
    int j_max = 1, q_max = 0;
    for (const ModeRequest& m : spec) {
        if (m.j < 1) throw UnknownMode("spectral index must be >= 1");
        if (m.degree < 0 || m.degree > kMaxFieldDegree) throw UnknownMode("polynomial degree outside the supported range");
        if (m.index < 0 || m.index >= beta_kernel_dimension(cone.l, m.degree))
            throw UnknownMode("no basis element with that index in this degree");
        j_max = std::max(j_max, m.j);
        q_max = std::max(q_max, m.degree);
    }
    const SpectralTable table = spectral_table(cone, j_max);
    for (const ModeRequest& m : spec)
        if (m.j > static_cast<int>(table.entries.size())) throw UnknownMode("spectral index beyond the computed table");

    std::vector<FieldMode> modes;
    std::vector<std::tuple<int, int, int>> keys;
    for (const ModeRequest& m : spec) {
        const auto key = std::make_tuple(m.j, m.degree, m.index);
        const auto it = std::find(keys.begin(), keys.end(), key);
        if (it != keys.end()) {
            modes[static_cast<std::size_t>(it - keys.begin())].coeff += m.coeff;
            continue;
        }
        const std::vector<BetaPoly> basis = beta_basis(table.entry(m.j).beta, cone.l, m.degree);
        int seen = 0;
        for (const BetaPoly& b : basis) {
            if (b.degree() != m.degree) continue;
            if (seen++ == m.index) {
                modes.push_back({m.j, b, m.coeff, 0.0});
                break;
            }
        }
        keys.push_back(key);
    }
    return JacobiField(cone, std::move(modes));
}

std::vector<NormSample> field_norm_profile(const JacobiField& field, std::span<const double> rho_list)
{
    const ConeSpec& cone = field.cone();
    const int n = cone.n(), l = cone.l;
    std::vector<int> js;
    for (const FieldMode& m : field.modes())
        if (m.coeff != 0.0 && std::find(js.begin(), js.end(), m.j) == js.end()) js.push_back(m.j);
    // Gram matrix of the link eigenfunctions, by quadrature on the link.
    std::vector<LinkEigenfunction> psi;
    for (int j : js) psi.push_back(link_eigenfunction(field.table(), j));
    const std::size_t k = js.size();
    std::vector<double> gram(k * k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
            gram[a * k + b] = integrate_over_link(cone, [&](double t1, double t2) { return psi[a](t1, t2) * psi[b](t1, t2); });

    std::vector<NormSample> out;
    std::vector<double> h(k);
    for (double rho : rho_list) {
        if (!(rho > 0) || rho > 1) throw InvalidArgument("rho must lie in (0, 1]");
        NormSample s;
        s.rho = rho;
        if (k > 0) {
            s.integral = half_ball_integral(l, rho, [&](double r, std::span<const double> y) {
                for (std::size_t a = 0; a < k; ++a) h[a] = field.mode_sum(js[a], r, y);
                double v = 0.0;
                for (std::size_t a = 0; a < k; ++a)
                    for (std::size_t b = 0; b < k; ++b) v += gram[a * k + b] * h[a] * h[b];
                return v * std::pow(r, n - 1);
            }, 1e-11);
        }
        for (const FieldMode& m : field.modes())
            s.closed_form += m.coeff * m.coeff / (n + l + 2 * m.homogeneity) * std::pow(rho, n + l + 2 * m.homogeneity);
        s.rel_err = s.closed_form == 0.0 ? std::abs(s.integral) : std::abs(s.integral - s.closed_form) / s.closed_form;
        s.scaled = std::pow(rho, -n - l - 2 * field.gamma()) * s.integral;
        out.push_back(s);
    }
    return out;
}

nlohmann::json to_json(const BetaPoly& poly)
{
    auto integer = [](const boost::multiprecision::cpp_int& v) -> nlohmann::json {
        if (v >= std::numeric_limits<long long>::min() && v <= std::numeric_limits<long long>::max())
            return v.convert_to<long long>();
        return v.str();
    };
    nlohmann::json monos = nlohmann::json::array();
    for (const auto& [mono, c] : poly.raw().terms)
        monos.push_back({{"a", mono.a}, {"m", mono.m},
                         {"num", integer(boost::multiprecision::numerator(c))},
                         {"den", integer(boost::multiprecision::denominator(c))}});
    return {{"beta", poly.beta_value()}, {"l", poly.l()}, {"degree", poly.degree()},
            {"monomials", monos}, {"normalization", poly.normalization()}};
}

nlohmann::json to_json(const JacobiField& field)
{
    nlohmann::json modes = nlohmann::json::array();
    for (const FieldMode& m : field.modes())
        modes.push_back({{"j", m.j}, {"coeff", m.coeff}, {"homogeneity", m.homogeneity}, {"poly", to_json(m.poly)}});
    const ConeSpec& c = field.cone();
    return {{"cone", {{"p", c.p}, {"q", c.q}, {"l", c.l}}}, {"gamma", field.gamma()}, {"modes", modes}};
}

} // namespace conelab
