#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "conelab/beta_harmonic.hpp"
#include "conelab/foliation.hpp"

namespace conelab {

/// Homogeneities q_i (strictly increasing) with amplitudes b_i.
class ModeVector {
public:
    ModeVector() = default;
    /// Throws InvalidArgument unless q is strictly increasing and sizes match.
    ModeVector(std::vector<double> q, std::vector<double> b);

    const std::vector<double>& q() const { return q_; }
    const std::vector<double>& b() const { return b_; }
    std::size_t size() const { return q_.size(); }

    /// psi(t) = sum b_i^2 e^{2 q_i t}.
    double psi(double t) const;
    /// log psi(t), -inf when every b_i vanishes.
    double log_psi(double t) const;
    /// min{q_2 - q_1, 1}; 1 with fewer than two entries.
    double eps0() const;

private:
    std::vector<double> q_;
    std::vector<double> b_;
};

/// Sample point of a test surface: quadrant coordinates u = |x_1|, v = |x_2|,
/// w = |y|, and the foliation parameter t of the point.
struct SurfacePoint {
    double u = 0.0;
    double v = 0.0;
    double w = 0.0;
    double t = 0.0;

    double radius() const;
};

/// Ball (inner = 0) or annulus {inner <= |X| < outer}.
struct Region {
    double inner = 0.0;
    double outer = 1.0;

    static Region ball(double R) { return {0.0, R}; }
    static Region annulus(double r1, double r2) { return {r1, r2}; }
};

/// Piece of H(t) x R^l over the x-radii [r_lo, r_hi].
struct LeafPiece {
    double t = 0.0;
    double r_lo = 0.0;
    double r_hi = 1.0;
};

/// Sampled hypersurface in R^{n+1} x R^l with the foliation parameter of every point.
/// Leaf-type surfaces are products with R^l: only x is sampled and every y is admitted.
class TestSurface {
public:
    /// Minimum number of samples per annulus {e^k <= |x| < e^{k+1}}.
    static constexpr int kMinDensity = 1000;

    /// H(t) x R^l for |x| <= r_max; t = 0 is the cone.
    static TestSurface leaf(const Foliation& foliation, double t, double r_max);
    /// Union of leaf pieces.
    static TestSurface leaf_pieces(const Foliation& foliation, std::span<const LeafPiece> pieces);
    /// Normal graph of delta v over the cone for cone radii in [r_lo, r_hi], positive
    /// heights towards the first factor. Throws GraphFailure if a point leaves the quadrant.
    static TestSurface jacobi_graph(const Foliation& foliation, const JacobiField& field, double delta,
                                    double r_lo, double r_hi);

    /// c M with parameters recomputed from the foliation.
    TestSurface scaled(double c, const Foliation& foliation) const;

    const std::vector<SurfacePoint>& points() const { return points_; }
    bool cylindrical() const { return cylindrical_; }
    double gamma() const { return gamma_; }
    bool contains(const SurfacePoint& x, const Region& U) const;

private:
    std::vector<SurfacePoint> points_;
    bool cylindrical_ = true;
    int l_ = 0;
    double gamma_ = 0.0;
};

/// Least d with M cap U between H(lambda - d) and H(lambda + d): the largest
/// |t - lambda| over the samples in U. Throws EmptyIntersection.
double trap_distance(const TestSurface& M, double lambda, const Region& U);

/// R^{gamma - 1} trap_distance(M, lambda, B_R).
double excess(const TestSurface& M, double lambda, double R);

struct ThreeAnnulusResult {
    bool premise = false;
    bool conclusion = false;
    bool holds() const { return !premise || conclusion; }
};

/// premise psi(t+T) >= e^{2(q_k+eps)T} psi(t), conclusion psi(t+2T) >= e^{2(q_{k+1}-eps)T} psi(t+T),
/// with k zero-based and q_{k+1} = +inf for the last entry. Throws PreconditionViolated
/// unless 3 eps < q_{k+1} - q_k and T >= 1/eps.
ThreeAnnulusResult three_annulus_check(const ModeVector& modes, int k, double eps, double T, double t);

struct ThreeAnnulusInstance {
    std::uint64_t seed = 0;
    ModeVector modes;
    int k = 0;
    double eps = 0.0;
    double T = 0.0;
    double t = 0.0;
    ThreeAnnulusResult result;
};

/// Random admissible instance drawn from its own seed.
ThreeAnnulusInstance random_three_annulus(std::uint64_t seed);

/// Seed of trial i under a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i);

nlohmann::json to_json(const ThreeAnnulusInstance& x);

struct DichotomyRow {
    double R = 0.0;
    double N = 0.0;
    /// log-slope of N from the previous scale, NaN on the first row.
    double slope = 0.0;
    /// Doubling condition N(RL) >= L^{gamma-1+eps} N(R) on the triple starting here.
    bool condition_triggered = false;
    /// N(RL^2) >= L^{gamma-1+eps0-eps} N(RL), meaningful when triggered.
    bool conclusion_holds = true;
    /// N(R) R^{1-gamma-eps2}.
    double floor_ratio = 0.0;
};

struct DichotomyReport {
    double gamma = 0.0;
    double eps = 0.0;
    double eps0 = 0.0;
    /// Not computable; the gap eps0 is the operative constant.
    bool eps1_available = false;
    double eps2 = 0.0;
    double L = 0.0;
    bool pure_lowest = false;
    bool has_higher = false;
    std::vector<DichotomyRow> rows;
    int implication_failures = 0;
    /// For a pure lowest mode: N(LR) <= c L^{gamma-1} N(R) with c = 1 + 1e-9 on every pair.
    bool decay_ceiling_holds = true;
    /// First row from which floor_ratio is nondecreasing.
    int growth_floor_from = 0;
};

/// Gap eps0 = min{q_2 - q_1, 1} over the homogeneities of Jacobi fields on the cone.
double spectral_gap_eps0(const ConeSpec& cone);

/// N(R) = R^{gamma-1} sup ||x|^{-gamma} v| on the standard grid of C cap B_R.
double linear_excess(const JacobiField& field, double R);

/// Throws InsufficientScales unless R_list is geometric with at least three entries
/// and ratio >= e^{2/eps}.
DichotomyReport dichotomy_experiment(const JacobiField& field, std::span<const double> R_list, double eps);

std::string to_csv(const DichotomyReport& report);
nlohmann::json to_json(const DichotomyReport& report);

/// Smallest R in 1, 2, 4, ... (and R_max) with grid_min(field, R) < 0, none up to R_max.
std::optional<double> negativity_radius(const JacobiField& field, double R_max);

} // namespace conelab
