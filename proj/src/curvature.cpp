#include "conelab/curvature.hpp"

#include <cmath>

#include "conelab/errors.hpp"

namespace conelab {

namespace {

constexpr double kD1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
constexpr double kD2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};

} // namespace

SurfaceJet finite_difference_jet(const SurfacePatch& patch, const VectorXd& u, double step)
{
    return finite_difference_jet(patch, u, VectorXd::Constant(patch.dim, step).eval());
}

SurfaceJet finite_difference_jet(const SurfacePatch& patch, const VectorXd& u,
                                 const VectorXd& steps)
{
    const int k = patch.dim;
    SurfaceJet jet;
    jet.x = patch.map(u);
    const int N = static_cast<int>(jet.x.size());
    jet.d1 = MatrixXd::Zero(N, k);
    jet.d2.assign(static_cast<std::size_t>(k) * k, VectorXd::Zero(N));

    // Values along each coordinate axis, reused for d1 and the diagonal of d2.
    for (int i = 0; i < k; ++i) {
        VectorXd acc1 = VectorXd::Zero(N);
        VectorXd acc2 = VectorXd::Zero(N);
        for (int s = -2; s <= 2; ++s) {
            VectorXd w = u;
            w[i] += s * steps[i];
            const VectorXd f = s == 0 ? jet.x : patch.map(w);
            acc1 += kD1[s + 2] * f;
            acc2 += kD2[s + 2] * f;
        }
        jet.d1.col(i) = acc1 / steps[i];
        jet.d2[i * k + i] = acc2 / (steps[i] * steps[i]);
    }
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            VectorXd acc = VectorXd::Zero(N);
            for (int si = -2; si <= 2; ++si) {
                if (si == 0) continue;
                for (int sj = -2; sj <= 2; ++sj) {
                    if (sj == 0) continue;
                    VectorXd w = u;
                    w[i] += si * steps[i];
                    w[j] += sj * steps[j];
                    acc += kD1[si + 2] * kD1[sj + 2] * patch.map(w);
                }
            }
            jet.d2[i * k + j] = jet.d2[j * k + i] = acc / (steps[i] * steps[j]);
        }
    return jet;
}

PointGeometry point_geometry(const SurfaceJet& jet, const VectorXd& orientation)
{
    const int N = static_cast<int>(jet.x.size());
    const int k = static_cast<int>(jet.d1.cols());
    if (N != k + 1) throw InvalidArgument("patch must have codimension one");

    Eigen::JacobiSVD<MatrixXd> svd(jet.d1, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    if (!(sv[k - 1] > 1e-10 * sv[0]))
        throw DegenerateMetric("tangent frame is rank deficient");

    PointGeometry g;
    g.x = jet.x;
    g.normal = svd.matrixU().col(k);
    if (g.normal.dot(orientation) < 0) g.normal = -g.normal;
    g.metric = jet.d1.transpose() * jet.d1;
    g.sff.resize(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) g.sff(i, j) = -jet.d2[i * k + j].dot(g.normal);
    g.mean_curvature = g.metric.ldlt().solve(g.sff).trace();
    return g;
}

PointGeometry patch_geometry(const SurfacePatch& patch, const VectorXd& u)
{
    const SurfaceJet jet = patch.jet ? patch.jet(u) : finite_difference_jet(patch, u, kOracleStep);
    return point_geometry(jet, patch.orientation(u));
}

double fd_mean_curvature(const SurfacePatch& patch, const VectorXd& u, double step)
{
    return fd_mean_curvature(patch, u, VectorXd::Constant(patch.dim, step).eval());
}

double fd_mean_curvature(const SurfacePatch& patch, const VectorXd& u, const VectorXd& steps)
{
    if (steps.size() != patch.dim || !(steps.minCoeff() > 0))
        throw InvalidArgument("finite-difference steps must be positive, one per coordinate");
    const SurfaceJet jet = finite_difference_jet(patch, u, steps);
    try {
        return point_geometry(jet, patch.orientation(u)).mean_curvature;
    } catch (const DegenerateMetric& e) {
        throw StepUnderflow(std::string("local graphing failed: ") + e.what());
    }
}

double warped_mean_curvature(const WarpSpec& spec, const VectorXd& u, const VectorXd& y)
{
    const double f = spec.f.value(y);
    if (!(f > 0)) throw InvalidArgument("warp function must be positive");
    const VectorXd Df = spec.f.gradient(y);
    const MatrixXd D2f = spec.f.hessian(y);

    const PointGeometry S = patch_geometry(spec.patch, u);
    const SurfaceJet jet = spec.patch.jet ? spec.patch.jet(u)
                                          : finite_difference_jet(spec.patch, u, kOracleStep);
    const double xnu = S.x.dot(S.normal);
    // Coordinates of the tangential part of the position vector.
    const VectorXd xt = S.metric.ldlt().solve(jet.d1.transpose() * S.x);
    const double h_xt = xt.dot(S.sff * xt);

    const double grad2 = Df.squaredNorm();
    const double E = 1.0 + grad2 * xnu * xnu;
    if (!(E > 0)) throw DegenerateMetric("E = 1 + |Df|^2 (x.nu)^2 is not positive");

    const double hess_term = xnu * (-D2f.trace() + xnu * xnu * Df.dot(D2f * Df) / E);
    return (S.mean_curvature / f + grad2 * h_xt / (f * E) + hess_term) / std::sqrt(E);
}

SurfacePatch warped_patch(const WarpSpec& spec)
{
    const int k = spec.patch.dim;
    SurfacePatch out;
    out.dim = k + spec.l;
    auto base = spec.patch;
    auto f = spec.f.value;
    out.map = [base, f, k](const VectorXd& w) {
        const VectorXd u = w.head(k);
        const VectorXd y = w.tail(w.size() - k);
        const VectorXd x = base.map(u);
        VectorXd z(x.size() + y.size());
        z << f(y) * x, y;
        return z;
    };
    out.orientation = [base, k](const VectorXd& w) {
        const VectorXd o = base.orientation(w.head(k));
        VectorXd z = VectorXd::Zero(w.size() + 1);
        z.head(o.size()) = o;
        return z;
    };
    return out;
}

SurfacePatch sphere_patch(int k, double radius, bool outward)
{
    SurfacePatch s;
    s.dim = k;
    auto omega = [k](const VectorXd& a) {
        VectorXd v(k + 1);
        v << 1.0, a;
        return VectorXd(v / v.norm());
    };
    s.map = [omega, radius](const VectorXd& a) { return VectorXd(radius * omega(a)); };
    s.jet = [k, radius](const VectorXd& a) {
        VectorXd v(k + 1);
        v << 1.0, a;
        const double nv = v.norm();
        SurfaceJet jet;
        jet.x = radius * v / nv;
        jet.d1.resize(k + 1, k);
        jet.d2.assign(static_cast<std::size_t>(k) * k, VectorXd::Zero(k + 1));
        const double n3 = nv * nv * nv;
        const double n5 = n3 * nv * nv;
        for (int i = 0; i < k; ++i) {
            VectorXd ei = VectorXd::Zero(k + 1);
            ei[i + 1] = 1.0;
            jet.d1.col(i) = radius * (ei / nv - v * a[i] / n3);
            for (int j = 0; j < k; ++j) {
                VectorXd ej = VectorXd::Zero(k + 1);
                ej[j + 1] = 1.0;
                VectorXd d2 = -ei * a[j] / n3 - ej * a[i] / n3 + 3.0 * v * a[i] * a[j] / n5;
                if (i == j) d2 -= v / n3;
                jet.d2[i * k + j] = radius * d2;
            }
        }
        return jet;
    };
    s.orientation = [omega, outward](const VectorXd& a) {
        return VectorXd(outward ? omega(a) : VectorXd(-omega(a)));
    };
    return s;
}

SurfacePatch graph_patch(int k, GraphFunction w)
{
    SurfacePatch s;
    s.dim = k;
    s.map = [w, k](const VectorXd& u) {
        VectorXd x(k + 1);
        x << u, w.value(u);
        return x;
    };
    s.jet = [w, k](const VectorXd& u) {
        SurfaceJet jet;
        jet.x.resize(k + 1);
        jet.x << u, w.value(u);
        jet.d1 = MatrixXd::Zero(k + 1, k);
        jet.d1.topRows(k).setIdentity();
        jet.d1.row(k) = w.gradient(u).transpose();
        const MatrixXd H = w.hessian(u);
        jet.d2.assign(static_cast<std::size_t>(k) * k, VectorXd::Zero(k + 1));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) jet.d2[i * k + j][k] = H(i, j);
        return jet;
    };
    s.orientation = [k](const VectorXd&) {
        VectorXd o = VectorXd::Zero(k + 1);
        o[k] = 1.0;
        return o;
    };
    return s;
}

SurfacePatch simons_cone_patch(int p, int q)
{
    const double A = std::sqrt(static_cast<double>(p) / (p + q));
    const double B = std::sqrt(static_cast<double>(q) / (p + q));
    auto omega = [](const VectorXd& a) {
        VectorXd v(a.size() + 1);
        v << 1.0, a;
        return VectorXd(v / v.norm());
    };
    SurfacePatch s;
    s.dim = p + q + 1;
    s.map = [=](const VectorXd& w) {
        const double r = w[0];
        VectorXd x(p + q + 2);
        x << r * A * omega(w.segment(1, p)), r * B * omega(w.segment(1 + p, q));
        return x;
    };
    s.orientation = [=](const VectorXd& w) {
        VectorXd o(p + q + 2);
        o << B * omega(w.segment(1, p)), -A * omega(w.segment(1 + p, q));
        return o;
    };
    return s;
}

} // namespace conelab
