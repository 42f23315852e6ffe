#include "mw/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mw/errors.hpp"
#include "mw/fft.hpp"
#include "mw/numerics.hpp"

namespace mw {

KernelRule kernel_catalog(const std::string& name) {
    if (name == "product_hilbert") {
        KernelRule r;
        r.n = 1;
        r.m = 1;
        r.name = name;
        r.k = [](const std::vector<double>& x, const std::vector<double>& y) {
            return 1.0 / (x[0] * y[0]);
        };
        return r;
    }
    if (name == "single_hilbert") {
        KernelRule r;
        r.n = 1;
        r.m = 0;
        r.name = name;
        r.k = [](const std::vector<double>& x, const std::vector<double>&) {
            return 1.0 / x[0];
        };
        return r;
    }
    throw ConfigError("unknown kernel '" + name + "'");
}

std::vector<std::string> kernel_catalog_names() { return {"product_hilbert", "single_hilbert"}; }

namespace {

double block_norm(const std::vector<double>& v) {
    double s = 0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

}  // namespace

double TruncatedKernel::evaluate(const std::vector<double>& x,
                                 const std::vector<double>& y) const {
    const double rx = block_norm(x);
    if (!(rx > eps1 && rx < n1)) return 0.0;
    if (rule.m > 0) {
        const double ry = block_norm(y);
        if (!(ry > eps2 && ry < n2)) return 0.0;
    }
    return rule.k(x, y);
}

TruncatedKernel truncate_kernel(KernelRule rule, double eps1, double n1, double eps2,
                                double n2) {
    TruncatedKernel tk;
    if (!(eps1 > 0) || !(n1 >= eps1)) throw ConfigError("invalid x-factor truncation");
    if (rule.m > 0 && (!(eps2 > 0) || !(n2 >= eps2)))
        throw ConfigError("invalid y-factor truncation");
    tk.rule = std::move(rule);
    tk.eps1 = eps1;
    tk.n1 = n1;
    tk.eps2 = eps2;
    tk.n2 = n2;
    return tk;
}

namespace {

// separation vector on the unit torus, mapped to [-1/2, 1/2) per axis.
// The index is made signed before dividing so that opposite separations are
// exactly opposite floating-point values (truncation indicators must treat
// +d and -d identically).
std::vector<double> torus_separation(const PeriodicGrid& grid, const std::vector<int>& di) {
    std::vector<double> d(grid.axes());
    for (int i = 0; i < grid.axes(); ++i) {
        int k = di[i] % grid.counts[i];
        if (k < 0) k += grid.counts[i];
        if (2 * k >= grid.counts[i]) k -= grid.counts[i];
        d[i] = double(k) / grid.counts[i];
    }
    return d;
}

void split_factors(const TruncatedKernel& tk, const std::vector<double>& sep,
                   std::vector<double>& x, std::vector<double>& y) {
    x.assign(sep.begin(), sep.begin() + tk.rule.n);
    y.assign(sep.begin() + tk.rule.n, sep.end());
}

CVector sampled_kernel(const PeriodicGrid& grid, const TruncatedKernel& tk) {
    if (grid.axes() != tk.rule.n + tk.rule.m)
        throw ShapeMismatchError("kernel factors do not match the grid axes");
    if (tk.n1 > 0.5 + 1e-12 || (tk.rule.m > 0 && tk.n2 > 0.5 + 1e-12))
        throw SupportOverflowError("truncation support exceeds the periodic window");
    CVector k(static_cast<Eigen::Index>(grid.size()));
    std::vector<double> x, y;
    for (std::size_t l = 0; l < grid.size(); ++l) {
        const auto sep = torus_separation(grid, grid.index(l));
        split_factors(tk, sep, x, y);
        k[static_cast<Eigen::Index>(l)] = tk.evaluate(x, y);
    }
    return k;
}

}  // namespace

DiscreteGridFunction truncated_convolution(const DiscreteGridFunction& f,
                                           const TruncatedKernel& tk) {
    const PeriodicGrid& grid = f.grid;
    const CVector k = sampled_kernel(grid, tk);
    const double dv = grid.cell_volume();
    DiscreteGridFunction out(grid, f.components);

    const std::size_t total = grid.size();
    std::vector<int> di(grid.axes());
    for (std::size_t i = 0; i < total; ++i) {
        const auto ii = grid.index(i);
        Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(f.components);
        for (std::size_t j = 0; j < total; ++j) {
            const auto jj = grid.index(j);
            std::size_t flat = 0;
            for (int a = 0; a < grid.axes(); ++a) {
                int d = ii[a] - jj[a];
                if (d < 0) d += grid.counts[a];
                flat = flat * grid.counts[a] + static_cast<std::size_t>(d);
            }
            const Complex kv = k[static_cast<Eigen::Index>(flat)];
            if (kv != 0.0) acc += kv * f.values.row(j);
        }
        out.values.row(i) = acc * dv;
    }
    return out;
}

FourierMultiplierOp multiplier_from_truncated_kernel(const PeriodicGrid& grid,
                                                     const TruncatedKernel& tk) {
    FourierMultiplierOp op;
    op.grid = grid;
    op.name = "conv[" + tk.rule.name + "]";
    op.multiplier = sampled_kernel(grid, tk);
    fft_forward(grid.counts, op.multiplier);
    op.multiplier *= grid.cell_volume();
    return op;
}

// ---------------------------------------------------------------------------
// condition estimates

namespace {

struct AnnulusSample {
    std::vector<double> point;
    double weight;
};

// quadrature over {a1 < |t| < a2} in dimension 1 or 2
std::vector<AnnulusSample> annulus_quadrature(int dim, double a1, double a2, int cells,
                                              int angular) {
    std::vector<AnnulusSample> out;
    const double ratio = std::pow(a2 / a1, 1.0 / cells);
    if (dim == 1) {
        double lo = a1;
        for (int i = 0; i < cells; ++i) {
            const double hi = (i == cells - 1) ? a2 : lo * ratio;
            const double mid = 0.5 * (lo + hi), w = hi - lo;
            out.push_back({{mid}, w});
            out.push_back({{-mid}, w});
            lo = hi;
        }
        return out;
    }
    if (dim == 2) {
        double lo = a1;
        for (int i = 0; i < cells; ++i) {
            const double hi = (i == cells - 1) ? a2 : lo * ratio;
            const double rmid = 0.5 * (lo + hi), dr = hi - lo;
            for (int j = 0; j < angular; ++j) {
                const double th = 2 * std::numbers::pi * (j + 0.5) / angular;
                out.push_back({{rmid * std::cos(th), rmid * std::sin(th)},
                               rmid * dr * 2 * std::numbers::pi / angular});
            }
            lo = hi;
        }
        return out;
    }
    throw ConfigError("kernel factors of dimension > 2 are out of scope");
}

// lattice of probe points (no weights) on dyadic shells
std::vector<std::vector<double>> dyadic_lattice(int dim, int jmin, int jmax, int angular) {
    std::vector<std::vector<double>> out;
    for (int j = jmin; j <= jmax; ++j) {
        const double r = std::pow(2.0, j);
        if (dim == 1) {
            out.push_back({r});
            out.push_back({-r});
        } else {
            for (int a = 0; a < angular; ++a) {
                const double th = 2 * std::numbers::pi * a / angular;
                out.push_back({r * std::cos(th), r * std::sin(th)});
            }
        }
    }
    return out;
}

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(a);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

using Kfn = std::function<double(const std::vector<double>&, const std::vector<double>&)>;

double partial_integral_y(const Kfn& k, const std::vector<double>& x, int mdim, double b1,
                          double b2, const KernelSweepSpec& sweep) {
    double acc = 0;
    for (const auto& s : annulus_quadrature(mdim, b1, b2, sweep.quad_points, sweep.angular_points))
        acc += s.weight * k(x, s.point);
    return acc;
}

double partial_integral_x(const Kfn& k, const std::vector<double>& y, int ndim, double a1,
                          double a2, const KernelSweepSpec& sweep) {
    double acc = 0;
    for (const auto& s : annulus_quadrature(ndim, a1, a2, sweep.quad_points, sweep.angular_points))
        acc += s.weight * k(s.point, y);
    return acc;
}

}  // namespace

KernelConditionEstimate kernel_condition_estimates(const KernelRule& kernel,
                                                   const KernelSweepSpec& sweep, double eta,
                                                   double budget) {
    if (kernel.m < 1) throw ConfigError("kernel conditions need a two-factor kernel");
    if (kernel.n > 2 || kernel.m > 2)
        throw ConfigError("kernel factors of dimension > 2 are out of scope");
    if (!(eta > 0)) throw ConfigError("eta must be positive");

    KernelConditionEstimate est;
    est.eta = eta;
    est.budget = budget;
    const int n = kernel.n, m = kernel.m;

    std::vector<double> dyadic;
    for (int j = sweep.dyadic_min; j <= sweep.dyadic_max; ++j) dyadic.push_back(std::pow(2.0, j));

    // C.1: double integrals over annulus rectangles
    for (std::size_t i = 0; i + 1 < dyadic.size(); ++i) {
        for (std::size_t j = i + 1; j < dyadic.size(); ++j) {
            for (std::size_t bi = 0; bi + 1 < dyadic.size(); ++bi) {
                for (std::size_t bj = bi + 1; bj < dyadic.size(); ++bj) {
                    double acc = 0;
                    for (const auto& sx : annulus_quadrature(n, dyadic[i], dyadic[j],
                                                             sweep.quad_points,
                                                             sweep.angular_points))
                        acc += sx.weight * partial_integral_y(kernel.k, sx.point, m, dyadic[bi],
                                                              dyadic[bj], sweep);
                    est.c1 = std::max(est.c1, std::abs(acc));
                }
            }
        }
    }

    const auto xs = dyadic_lattice(n, sweep.dyadic_min, sweep.dyadic_max, 8);
    const auto ys = dyadic_lattice(m, sweep.dyadic_min, sweep.dyadic_max, 8);
    const auto hs = dyadic_lattice(n, sweep.dyadic_min, sweep.dyadic_max, 4);
    const auto ks = dyadic_lattice(m, sweep.dyadic_min, sweep.dyadic_max, 4);

    // C.2: size and smoothness of the partial integrals K1, K2
    for (std::size_t bi = 0; bi + 1 < dyadic.size(); ++bi) {
        for (std::size_t bj = bi + 1; bj < dyadic.size(); ++bj) {
            for (const auto& x : xs) {
                const double k1 = partial_integral_y(kernel.k, x, m, dyadic[bi], dyadic[bj], sweep);
                est.c2_bound = std::max(est.c2_bound,
                                        std::abs(k1) * std::pow(block_norm(x), n));
                for (const auto& h : hs) {
                    if (block_norm(x) < 2.0 * block_norm(h)) continue;
                    const double k1h = partial_integral_y(kernel.k, add(x, h), m, dyadic[bi],
                                                          dyadic[bj], sweep);
                    est.c2_diff = std::max(
                        est.c2_diff, std::abs(k1h - k1) * std::pow(block_norm(x), n + eta) /
                                         std::pow(block_norm(h), eta));
                }
            }
            for (const auto& y : ys) {
                const double k2 = partial_integral_x(kernel.k, y, n, dyadic[bi], dyadic[bj], sweep);
                est.c2_bound = std::max(est.c2_bound,
                                        std::abs(k2) * std::pow(block_norm(y), m));
                for (const auto& k : ks) {
                    if (block_norm(y) < 2.0 * block_norm(k)) continue;
                    const double k2k = partial_integral_x(kernel.k, add(y, k), n, dyadic[bi],
                                                          dyadic[bj], sweep);
                    est.c2_diff = std::max(
                        est.c2_diff, std::abs(k2k - k2) * std::pow(block_norm(y), m + eta) /
                                         std::pow(block_norm(k), eta));
                }
            }
        }
    }

    // C.3: pointwise size
    for (const auto& x : xs)
        for (const auto& y : ys)
            est.c3 = std::max(est.c3, std::abs(kernel.k(x, y)) * std::pow(block_norm(x), n) *
                                          std::pow(block_norm(y), m));

    // C.4: first differences in each factor
    for (const auto& x : xs) {
        for (const auto& y : ys) {
            const double base = kernel.k(x, y);
            for (const auto& h : hs) {
                if (block_norm(x) < 2.0 * block_norm(h)) continue;
                const double d = kernel.k(add(x, h), y) - base;
                est.c4 = std::max(est.c4, std::abs(d) * std::pow(block_norm(x), n + eta) *
                                              std::pow(block_norm(y), m) /
                                              std::pow(block_norm(h), eta));
            }
            for (const auto& k : ks) {
                if (block_norm(y) < 2.0 * block_norm(k)) continue;
                const double d = kernel.k(x, add(y, k)) - base;
                est.c4 = std::max(est.c4, std::abs(d) * std::pow(block_norm(x), n) *
                                              std::pow(block_norm(y), m + eta) /
                                              std::pow(block_norm(k), eta));
            }
        }
    }

    // C.5: the mixed double difference
    for (const auto& x : xs) {
        for (const auto& y : ys) {
            for (const auto& h : hs) {
                if (block_norm(x) < 2.0 * block_norm(h)) continue;
                for (const auto& k : ks) {
                    if (block_norm(y) < 2.0 * block_norm(k)) continue;
                    const double d = kernel.k(add(x, h), add(y, k)) - kernel.k(add(x, h), y) -
                                     kernel.k(x, add(y, k)) + kernel.k(x, y);
                    est.c5 = std::max(
                        est.c5, std::abs(d) * std::pow(block_norm(x), n + eta) *
                                    std::pow(block_norm(y), m + eta) /
                                    std::pow(block_norm(h) * block_norm(k), eta));
                }
            }
        }
    }

    const double worst =
        std::max({est.c1, est.c2_bound, est.c2_diff, est.c3, est.c4, est.c5});
    est.pass = std::isfinite(worst) && worst <= budget;
    return est;
}

TruncationLimitProbe truncation_limit_probe(const KernelRule& kernel,
                                            const std::vector<double>& eps_ladder,
                                            double big_n, const KernelSweepSpec& sweep) {
    if (kernel.m < 1) throw ConfigError("limit probe needs a two-factor kernel");
    TruncationLimitProbe probe;
    const double a1 = 0.02, a2 = 0.8 * big_n;
    const std::vector<double> x0(kernel.n, 0.3 * big_n);
    const std::vector<double> y0(kernel.m, 0.3 * big_n);
    for (double eps : eps_ladder) {
        const double lo = std::max(eps, a1);
        double dbl = 0;
        for (const auto& sx :
             annulus_quadrature(kernel.n, lo, a2, sweep.quad_points, sweep.angular_points))
            dbl += sx.weight * partial_integral_y(kernel.k, sx.point, kernel.m, lo, a2, sweep);
        probe.double_integral.push_back(dbl);
        probe.partial_x.push_back(partial_integral_x(kernel.k, y0, kernel.n, lo, a2, sweep));
        probe.partial_y.push_back(partial_integral_y(kernel.k, x0, kernel.m, lo, a2, sweep));
    }
    auto cauchy = [&](const std::vector<double>& v) {
        double worst = 0;
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            worst = std::max(worst, std::abs(v[i + 1] - v[i]));
        return worst;
    };
    probe.max_cauchy_difference =
        std::max({cauchy(probe.double_integral), cauchy(probe.partial_x),
                  cauchy(probe.partial_y)});
    return probe;
}

BoundednessSweep uniform_boundedness_sweep(const KernelRule& kernel, const MatrixWeight& w,
                                           const LebesgueExponent& p, const PeriodicGrid& grid,
                                           const std::vector<double>& eps_ladder,
                                           const std::vector<double>& n_ladder, int trials,
                                           int max_iterations, std::uint64_t seed) {
    BoundednessSweep sweep;
    for (double eps : eps_ladder) {
        for (double big_n : n_ladder) {
            SweepEntry entry;
            entry.eps = eps;
            entry.big_n = big_n;
            if (eps >= big_n) {
                entry.estimate.value = 0.0;  // empty annulus: the zero operator
                entry.estimate.converged = true;
            } else {
                const TruncatedKernel tk =
                    truncate_kernel(kernel, eps, big_n, kernel.m > 0 ? eps : 0,
                                    kernel.m > 0 ? big_n : 0);
                const FourierMultiplierOp op = multiplier_from_truncated_kernel(grid, tk);
                entry.estimate =
                    weighted_operator_norm(op, w, p, trials, max_iterations, seed);
            }
            sweep.max_norm = std::max(sweep.max_norm, entry.estimate.value);
            sweep.entries.push_back(std::move(entry));
        }
    }
    // refinement trend along the diagonal (eps shrinking, N growing)
    std::vector<double> diag;
    const std::size_t levels = std::min(eps_ladder.size(), n_ladder.size());
    for (std::size_t i = 0; i < levels; ++i) {
        const std::size_t idx = i * n_ladder.size() + i;
        if (sweep.entries[idx].estimate.value > 0)
            diag.push_back(sweep.entries[idx].estimate.value);
    }
    sweep.diagonal_trend_slope = diag.size() >= 2 ? log_level_slope(diag) : 0.0;
    return sweep;
}

}  // namespace mw
