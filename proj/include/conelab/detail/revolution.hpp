#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "conelab/curvature.hpp"

namespace conelab::detail {

// Gnomonic chart of S^k around the first basis vector.
inline VectorXd sphere_point(const VectorXd& w, int offset, int k)
{
    VectorXd x(k + 1);
    x[0] = 1.0;
    for (int i = 0; i < k; ++i) x[i + 1] = w[offset + i];
    return x / x.norm();
}

// O(p+1) x O(q+1)-invariant hypersurface generated by a planar profile. `profile(w0)`
// returns (u, v, theta); the remaining parameters chart the two orbit spheres.
inline SurfacePatch revolution_patch(int p, int q,
                                     std::function<std::array<double, 3>(double)> profile)
{
    SurfacePatch patch;
    patch.dim = p + q + 1;
    patch.map = [=](const VectorXd& w) {
        const auto [u, v, th] = profile(w[0]);
        (void)th;
        VectorXd x(p + q + 2);
        x.head(p + 1) = u * sphere_point(w, 1, p);
        x.tail(q + 1) = v * sphere_point(w, 1 + p, q);
        return x;
    };
    patch.orientation = [=](const VectorXd& w) {
        const auto [u, v, th] = profile(w[0]);
        (void)u;
        (void)v;
        VectorXd o(p + q + 2);
        o.head(p + 1) = std::sin(th) * sphere_point(w, 1, p);
        o.tail(q + 1) = -std::cos(th) * sphere_point(w, 1 + p, q);
        return o;
    };
    return patch;
}

} // namespace conelab::detail
