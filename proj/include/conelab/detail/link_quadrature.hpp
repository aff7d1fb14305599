#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace conelab {

namespace detail {

// Gauss-Legendre on [0, pi] applied to a weight sin^{d-1}.
template <class F>
double polar_integral(int d, F&& f)
{
    using rule = boost::math::quadrature::gauss<double, 30>;
    const double half = std::numbers::pi / 2;
    return rule::integrate(
        [&](double x) {
            const double t = half * (x + 1.0);
            return f(t) * std::pow(std::sin(t), d - 1);
        },
        -1.0, 1.0) * half;
}

} // namespace detail

template <class F>
double integrate_over_link(const ConeSpec& cone, F&& f)
{
    const double factor = std::pow(cone.a(), cone.p) * unit_sphere_area(cone.p - 1) *
                          std::pow(cone.b(), cone.q) * unit_sphere_area(cone.q - 1);
    const double value = detail::polar_integral(cone.p, [&](double t1) {
        return detail::polar_integral(cone.q, [&](double t2) { return f(t1, t2); });
    });
    return factor * value;
}

} // namespace conelab
