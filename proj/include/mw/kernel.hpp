#pragma once

#include <cstdint>
#include <limits>
#include <functional>
#include <string>
#include <vector>

#include "mw/transform.hpp"

namespace mw {

/// Closed-form product kernel K(x, y) on R^n x R^m, locally integrable away
/// from the cross {x=0} u {y=0}. m = 0 marks a single-factor kernel K(x).
struct KernelRule {
    int n = 1;
    int m = 1;
    std::string name;
    std::function<double(const std::vector<double>& x, const std::vector<double>& y)> k;
};

/// Kernel catalog: product_hilbert = 1/(x y), single_hilbert = 1/x.
KernelRule kernel_catalog(const std::string& name);
std::vector<std::string> kernel_catalog_names();

/// K restricted to the truncation annuli eps_i < |.| < N_i per factor.
/// eps = N gives the (valid) zero operator.
struct TruncatedKernel {
    KernelRule rule;
    double eps1 = 0.0, n1 = 0.0;
    double eps2 = 0.0, n2 = 0.0;

    double evaluate(const std::vector<double>& x, const std::vector<double>& y) const;
};

TruncatedKernel truncate_kernel(KernelRule rule, double eps1, double n1, double eps2 = 0,
                                double n2 = 0);

/// Direct discrete convolution with the sampled truncated kernel on a
/// periodic grid (quadrature weights absorbed). Linear in f.
DiscreteGridFunction truncated_convolution(const DiscreteGridFunction& f,
                                           const TruncatedKernel& tk);

/// The same operator as a Fourier multiplier (DFT of the sampled kernel);
/// identical values on the periodic grid, at FFT cost.
FourierMultiplierOp multiplier_from_truncated_kernel(const PeriodicGrid& grid,
                                                     const TruncatedKernel& tk);

/// Sweep ranges for the kernel-condition estimates: dyadic ladders 2^j for
/// the annulus bounds and difference offsets, and quadrature resolution.
struct KernelSweepSpec {
    int dyadic_min = -6;
    int dyadic_max = 2;
    int quad_points = 96;    // annulus quadrature cells per factor
    int angular_points = 16; // for 2-D factors
};

/// Estimated constants of the five product-kernel conditions (lattice
/// maxima over the sweep; lower bounds for the true constants).
struct KernelConditionEstimate {
    double c1 = 0.0;
    double c2_bound = 0.0;
    double c2_diff = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double c5 = 0.0;
    double eta = 0.0;
    bool pass = false;
    double budget = 0.0;
};

KernelConditionEstimate kernel_condition_estimates(
    const KernelRule& kernel, const KernelSweepSpec& sweep, double eta,
    double budget = std::numeric_limits<double>::infinity());

/// Cauchy-difference probe of the truncated-integral limits along an eps
/// ladder (the convergence hypotheses are checked, not proven).
struct TruncationLimitProbe {
    std::vector<double> double_integral;  // per ladder step
    std::vector<double> partial_x;        // int over alpha-annulus in x at a sample y
    std::vector<double> partial_y;
    double max_cauchy_difference = 0.0;
};
TruncationLimitProbe truncation_limit_probe(const KernelRule& kernel,
                                            const std::vector<double>& eps_ladder,
                                            double big_n, const KernelSweepSpec& sweep);

/// Norm estimates of the lifted truncated operators across an (eps, N)
/// ladder on L^p(W).
struct SweepEntry {
    double eps = 0.0;
    double big_n = 0.0;
    NormEstimate estimate;
};
struct BoundednessSweep {
    std::vector<SweepEntry> entries;  // all (eps, N) pairs, row-major in (eps, N)
    double max_norm = 0.0;
    double diagonal_trend_slope = 0.0;  // log-norm along the refining diagonal
};
BoundednessSweep uniform_boundedness_sweep(const KernelRule& kernel, const MatrixWeight& w,
                                           const LebesgueExponent& p, const PeriodicGrid& grid,
                                           const std::vector<double>& eps_ladder,
                                           const std::vector<double>& n_ladder, int trials,
                                           int max_iterations, std::uint64_t seed);

}  // namespace mw
