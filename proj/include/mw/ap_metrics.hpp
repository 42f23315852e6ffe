#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mw/domain.hpp"
#include "mw/weight.hpp"

namespace mw {

/// Deterministic discretization of the complex unit sphere in C^n.
/// n = 2 uses an (angle, phase) lattice; higher n uses seeded normalized
/// Gaussian vectors. Estimates built on it are lower bounds.
std::vector<CVector> sphere_directions(int n, int count, std::uint64_t seed);

/// rho_t(x) = |W^{1/p}(t) x|.
double rho(const MatrixWeight& w, const LebesgueExponent& p, const Point& t, const CVector& x);

/// rho*_t(x) = |W^{-1/p}(t) x| (the dual norm of rho_t).
double rho_dual(const MatrixWeight& w, const LebesgueExponent& p, const Point& t,
                const CVector& x);

/// rho_{p,E}(x): the L^p average of rho_t(x) over E.
double rho_avg(const MatrixWeight& w, const LebesgueExponent& p, const AveragingSet& e,
               const CVector& x, const QuadSpec& quad);

/// rho*_{q,E}(x): the L^q average of rho*_t(x) over E.
double rho_dual_avg(const MatrixWeight& w, const LebesgueExponent& p, const AveragingSet& e,
                    const CVector& x, const QuadSpec& quad);

/// (rho_{p,E})*(x): dual norm of the averaged metric, estimated from below
/// over a sphere discretization.
double dual_of_avg(const MatrixWeight& w, const LebesgueExponent& p, const AveragingSet& e,
                   const CVector& x, int sphere_count, const QuadSpec& quad,
                   std::uint64_t seed);

/// Result of the direct A_p test: sup over sets and directions of
/// rho*_{q,E}(x) / (rho_{p,E})*(x). A lower bound for the constant C.
struct ApEstimate {
    double c_hat = 0.0;
    std::vector<double> per_set;
    std::size_t argmax_set = 0;
    std::string argmax_set_desc;
    CVector argmax_direction;
    int sphere_count = 0;
    bool torus_radius_capped = false;
};

/// Three-level coarse screen for local integrability of |W| and |W^{-q/p}|
/// (uniform meshes; ratio test). Severe blow-ups fail; borderline divergent
/// weights pass and are left to the divergence-rate machinery.
struct IntegrabilityCheck {
    bool passed = false;
    std::vector<double> weight_integrals;
    std::vector<double> dual_integrals;
};
IntegrabilityCheck local_integrability_screen(const MatrixWeight& w, const LebesgueExponent& p,
                                              int base_points = 48);

ApEstimate ap_condition_check(const MatrixWeight& w, const LebesgueExponent& p,
                              const SetFamilySpec& family, int sphere_count,
                              const QuadSpec& quad, std::uint64_t seed, int extra_levels = 0);

/// Refinement-ladder verdict for a constant estimator: values per level,
/// the fitted log-level slope, and the divergence flag (>= 3 levels and
/// slope > 0.1).
struct ConstantTrend {
    std::vector<double> values;
    double slope = 0.0;
    bool divergence = false;
    double final_value() const { return values.empty() ? 0.0 : values.back(); }
    double max_value() const;
};

ConstantTrend ap_condition_trend(const MatrixWeight& w, const LebesgueExponent& p,
                                 const SetFamilySpec& family, int sphere_count,
                                 const QuadSpec& quad, std::uint64_t seed, int levels);

/// Roudenko's double-integral constant per set and its supremum.
struct RoudenkoEstimate {
    double c_hat = 0.0;
    std::vector<double> per_set;
    std::size_t argmax_set = 0;
    std::string argmax_set_desc;
    int points_per_axis = 0;
    bool torus_radius_capped = false;
};

/// Matrix norm used inside the Roudenko integrand.
enum class MatrixNormKind { Spectral, Frobenius };

RoudenkoEstimate roudenko_constant(const MatrixWeight& w, const LebesgueExponent& p,
                                   const SetFamilySpec& family, const QuadSpec& quad,
                                   MatrixNormKind norm = MatrixNormKind::Spectral,
                                   int extra_levels = 0);

ConstantTrend roudenko_trend(const MatrixWeight& w, const LebesgueExponent& p,
                             const SetFamilySpec& family, const QuadSpec& quad, int levels,
                             MatrixNormKind norm = MatrixNormKind::Spectral);

/// (1/|E|) integral of W^s over E.
HermitianMatrix averaged_power(const MatrixWeight& w, double s, const AveragingSet& e,
                               const QuadSpec& quad);

/// p = 2 only: sup over E of |(avg_E W)^{1/2} (avg_E W^{-1})^{1/2}|_F.
struct A2AveragedEstimate {
    double sup = 0.0;
    std::vector<double> per_set;
    std::size_t argmax_set = 0;
    std::string argmax_set_desc;
};
A2AveragedEstimate a2_averaged_matrix_constant(const MatrixWeight& w,
                                               const SetFamilySpec& family,
                                               const QuadSpec& quad, int extra_levels = 0);

/// The duality transform of Remark (eq:dual): W at p maps to W^{-q/p} at q.
std::pair<MatrixWeight, LebesgueExponent> duality_transform(const MatrixWeight& w,
                                                            const LebesgueExponent& p);

/// Weight on one factor of a product domain obtained by freezing the other
/// factor's coordinates. `keep_x` selects which factor stays free.
MatrixWeight slice_weight(const MatrixWeight& w, bool keep_x, const Point& frozen);

/// Per-slice Roudenko constants across a lattice of frozen coordinates.
struct SliceReport {
    std::vector<Point> frozen_points;
    std::vector<double> per_slice;
    double sup = 0.0;
};
SliceReport uniform_slice_check(const MatrixWeight& w, const LebesgueExponent& p, bool keep_x,
                                int slice_samples, const SetFamilySpec& family_on_factor,
                                const QuadSpec& quad);

}  // namespace mw
