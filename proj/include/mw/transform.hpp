#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mw/domain.hpp"
#include "mw/weight.hpp"

namespace mw {

/// Uniform periodic lattice on the unit torus, one point per cell at
/// (index + offset)/count per axis. All transforms live here; Euclidean
/// statements are probed through a torus transplant with singularities
/// placed in the interior.
struct PeriodicGrid {
    std::vector<int> counts;
    double offset = 0.0;    // lattice offset in cells (0 or 1/2)
    int factor_split = 0;   // axes [0, split) form the x-factor; 0: non-product

    int axes() const { return static_cast<int>(counts.size()); }
    std::size_t size() const;
    double cell_volume() const;
    Point point(std::size_t flat) const;
    std::vector<int> index(std::size_t flat) const;
    /// Per-axis signed integer frequency of a flattened DFT bin.
    std::vector<int> signed_freq(std::size_t flat) const;
};

PeriodicGrid make_periodic_grid(std::vector<int> counts, double offset = 0.0,
                                int factor_split = 0);

/// Offset chosen so that no lattice point hits a declared singular
/// coordinate of the weight.
PeriodicGrid periodic_grid_for_weight(std::vector<int> counts, const MatrixWeight& w,
                                      int factor_split = 0);

/// Sampled vector-valued function on a periodic grid.
struct DiscreteGridFunction {
    PeriodicGrid grid;
    int components = 1;
    Eigen::MatrixXcd values;  // size x components

    DiscreteGridFunction() = default;
    DiscreteGridFunction(PeriodicGrid g, int n_components);
};

DiscreteGridFunction sample_function(const PeriodicGrid& grid, int components,
                                     const std::function<CVector(const Point&)>& f);

/// Fourier multiplier operator: one complex factor per frequency bin.
/// Hilbert/Riesz multipliers are unimodular off zero and annihilate the zero
/// frequency (and Nyquist bins, to preserve realness on even grids).
struct FourierMultiplierOp {
    PeriodicGrid grid;
    CVector multiplier;
    std::string name;
};

/// -i sgn(xi) on a one-axis grid (cos -> sin convention).
FourierMultiplierOp hilbert_op(const PeriodicGrid& grid);

/// i xi_j / |xi| over the full frequency vector.
FourierMultiplierOp riesz_op(const PeriodicGrid& grid, int axis);

/// Riesz transform in one factor tensored with the identity on the other:
/// the multiplier depends only on that factor's frequency block.
FourierMultiplierOp partial_riesz_op(const PeriodicGrid& grid, bool x_factor,
                                     int axis_in_factor);

/// Componentwise DFT -> multiply -> inverse DFT.
DiscreteGridFunction apply_multiplier(const FourierMultiplierOp& op,
                                      const DiscreteGridFunction& f);

/// The scalar operator lifted to N components (acts coordinate-wise).
DiscreteGridFunction lifted_apply(const FourierMultiplierOp& op,
                                  const DiscreteGridFunction& f);

/// |f|_{L^p(W)} on the grid (uniform cell measure).
double lp_weight_norm(const DiscreteGridFunction& f, const MatrixWeight& w,
                      const LebesgueExponent& p);

/// Lower-bound estimate of |op|_{L^p(W) -> L^p(W)}. p = 2 uses power
/// iteration on the weighted conjugation composed with its adjoint; p != 2
/// uses a seeded multi-start nonlinear power ascent. Deterministic given
/// the seed; reported values never decrease in trials or iterations.
struct NormEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    int restarts = 0;
};

NormEstimate weighted_operator_norm(const FourierMultiplierOp& op, const MatrixWeight& w,
                                    const LebesgueExponent& p, int trials, int max_iterations,
                                    std::uint64_t seed);

}  // namespace mw
