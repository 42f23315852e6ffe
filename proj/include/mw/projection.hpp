#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mw/domain.hpp"
#include "mw/weight.hpp"

namespace mw {

/// Unit-vector-valued direction field r(t). Custom fields are normalized on
/// input; every evaluation asserts |r| = 1 within 1e-10.
class DirectionField {
public:
    using Evaluator = std::function<CVector(const Point&)>;

    DirectionField(int n, std::string name, Evaluator evaluator);

    int dim() const { return n_; }
    const std::string& name() const { return name_; }
    CVector evaluate(const Point& t) const;

private:
    int n_;
    std::string name_;
    Evaluator evaluator_;
};

/// r(t) = e_k (0-based).
DirectionField coordinate_direction(int n, int k);

/// r(t) = i-th eigenvector of W(t), eigenvalues ascending, phase fixed by the
/// largest-modulus entry. Requires a clean spectral gap at evaluation points.
DirectionField eigenvector_direction(const MatrixWeight& w, int i);

/// Arbitrary field, normalized pointwise.
DirectionField custom_direction(int n, std::string name, DirectionField::Evaluator raw);

enum class EssSupVerdict { BoundedAtResolution, DivergenceSuspected, Inconclusive };

struct EssSupLevel {
    int level = 0;
    std::size_t grid_points = 0;
    std::size_t skipped = 0;    // samples inside the eigenvalue floor
    double min_distance = 0.0;  // closest evaluated distance to a singularity
    double max_value = 0.0;     // cumulative max of the criterion up to this level
    Point argmax;
};

/// One-sided ess-sup estimate of a criterion function over a grid ladder.
/// B_hat is a max over samples (never an upper bound); the divergence rate is
/// the fitted power-law exponent of the criterion against the sampled
/// distance to the singularity.
struct EssSupEstimate {
    double b_hat = 0.0;
    Point argmax;
    EssSupVerdict verdict = EssSupVerdict::Inconclusive;
    double rate = 0.0;
    std::vector<EssSupLevel> trace;
    /// finest-level profile (first coordinate, criterion value), for plots
    std::vector<std::pair<double, double>> profile;
};

struct GridLadder {
    GridSpec base;
    int levels = 3;
};

/// Theorem criterion for P_r: L^p(W) -> L^p(w): the ess-sup of
/// g(t) = w(t)^{1/p} |W^{-1/p}(t) r(t)|. A Bounded verdict's B_hat is the
/// claimed operator-norm bound at the sampled resolution.
EssSupEstimate projection_bound(const MatrixWeight& w_matrix, const ScalarWeight& w_scalar,
                                const LebesgueExponent& p, const DirectionField& r,
                                const GridLadder& ladder);

/// Coordinate specialization. EntryOfW pairs e_k with w = w_kk;
/// EntryOfPowerTarget pairs it with w = (w_kk^{(2/p)})^{p/2}. Both use
/// |W^{-1/p} e_k|^2 = w_kk^{(-2/p)}.
enum class CoordinateTarget { EntryOfW, EntryOfPowerTarget };

EssSupEstimate coordinate_projection_bound(const MatrixWeight& w, const LebesgueExponent& p,
                                           int k, CoordinateTarget target,
                                           const GridLadder& ladder);

/// Checks lambda_i^{1/p} |W^{-1/p} v_i| = 1 over a grid. Points with a
/// near-degenerate spectrum are flagged and skipped.
struct EigenCheckReport {
    double max_deviation = 0.0;
    std::size_t checked = 0;
    std::size_t flagged = 0;
};
EigenCheckReport eigen_projection_check(const MatrixWeight& w, const LebesgueExponent& p, int i,
                                        const SampleGrid& grid);

/// Near-extremal family from the necessity proof: triangular bumps of unit
/// mass concentrated at t0, shaped by W^{-2/p} r / |W^{-1/p} r|.
struct WitnessFamily {
    Point t0;
    std::vector<double> epsilons;
    std::vector<std::vector<CVector>> functions;  // per epsilon, per grid point
    std::vector<double> lp_norms;                 // |f_eps|_{L^p(W)} by quadrature
};

WitnessFamily generate_witness(const MatrixWeight& w_matrix, const ScalarWeight& w_scalar,
                               const LebesgueExponent& p, const DirectionField& r,
                               const Point& t0, const std::vector<double>& epsilons,
                               const SampleGrid& grid);

/// |<f, r>|_{L^p(w)} / |f|_{L^p(W)} by grid quadrature.
double measure_ratio(const std::vector<CVector>& f, const MatrixWeight& w_matrix,
                     const ScalarWeight& w_scalar, const LebesgueExponent& p,
                     const DirectionField& r, const SampleGrid& grid);

}  // namespace mw
