#include "mw/transform.hpp"

#include <algorithm>
#include <cmath>

#include "mw/errors.hpp"
#include "mw/fft.hpp"
#include "mw/numerics.hpp"

namespace mw {

std::size_t PeriodicGrid::size() const {
    std::size_t total = 1;
    for (int c : counts) total *= static_cast<std::size_t>(c);
    return total;
}

double PeriodicGrid::cell_volume() const {
    double v = 1.0;
    for (int c : counts) v /= c;
    return v;
}

std::vector<int> PeriodicGrid::index(std::size_t flat) const {
    std::vector<int> idx(counts.size());
    for (int i = axes() - 1; i >= 0; --i) {
        idx[i] = static_cast<int>(flat % counts[i]);
        flat /= counts[i];
    }
    return idx;
}

Point PeriodicGrid::point(std::size_t flat) const {
    const auto idx = index(flat);
    Point p(counts.size());
    for (int i = 0; i < axes(); ++i) {
        double x = (idx[i] + offset) / counts[i];
        x -= std::floor(x);
        p[i] = x;
    }
    return p;
}

std::vector<int> PeriodicGrid::signed_freq(std::size_t flat) const {
    auto idx = index(flat);
    for (int i = 0; i < axes(); ++i)
        if (idx[i] > counts[i] / 2) idx[i] -= counts[i];
    return idx;
}

PeriodicGrid make_periodic_grid(std::vector<int> counts, double offset, int factor_split) {
    if (counts.empty()) throw ConfigError("periodic grid needs at least one axis");
    for (int c : counts)
        if (c < 2) throw ConfigError("periodic grid counts must be >= 2");
    if (factor_split < 0 || factor_split >= static_cast<int>(counts.size()) + 1)
        throw ConfigError("invalid factor split");
    PeriodicGrid g;
    g.counts = std::move(counts);
    g.offset = offset;
    g.factor_split = factor_split;
    return g;
}

PeriodicGrid periodic_grid_for_weight(std::vector<int> counts, const MatrixWeight& w,
                                      int factor_split) {
    double offset = 0.0;
    for (std::size_t ax = 0; ax < counts.size() && ax < w.axis_singular().size(); ++ax) {
        for (double s : w.axis_singular()[ax]) {
            const double frac = (s - std::floor(s)) * counts[ax];
            if (std::abs(frac - std::round(frac)) < 0.25) offset = 0.5;
        }
    }
    return make_periodic_grid(std::move(counts), offset, factor_split);
}

DiscreteGridFunction::DiscreteGridFunction(PeriodicGrid g, int n_components)
    : grid(std::move(g)), components(n_components) {
    if (components < 1) throw ConfigError("grid function needs >= 1 components");
    values = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()), components);
}

DiscreteGridFunction sample_function(const PeriodicGrid& grid, int components,
                                     const std::function<CVector(const Point&)>& f) {
    DiscreteGridFunction out(grid, components);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const CVector v = f(grid.point(j));
        if (v.size() != components)
            throw ShapeMismatchError("sampled function has wrong component count");
        out.values.row(j) = v.transpose();
    }
    return out;
}

namespace {

bool is_nyquist(int k, int count) { return count % 2 == 0 && (k == count / 2 || k == -count / 2); }

void check_unimodular(const CVector& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
        if (std::abs(m[i]) > 1.0 + 1e-12)
            throw ShapeMismatchError("transform multiplier exceeds modulus 1");
}

}  // namespace

FourierMultiplierOp hilbert_op(const PeriodicGrid& grid) {
    if (grid.axes() != 1) throw ShapeMismatchError("hilbert_op expects a one-axis grid");
    FourierMultiplierOp op;
    op.grid = grid;
    op.name = "hilbert";
    op.multiplier = CVector::Zero(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const int k = grid.signed_freq(j)[0];
        if (k == 0 || is_nyquist(k, grid.counts[0])) continue;
        op.multiplier[static_cast<Eigen::Index>(j)] = Complex(0.0, k > 0 ? -1.0 : 1.0);
    }
    check_unimodular(op.multiplier);
    return op;
}

namespace {

FourierMultiplierOp riesz_like(const PeriodicGrid& grid, int block_begin, int block_end,
                               int axis, const std::string& name) {
    FourierMultiplierOp op;
    op.grid = grid;
    op.name = name;
    op.multiplier = CVector::Zero(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto xi = grid.signed_freq(j);
        double norm2 = 0;
        for (int i = block_begin; i < block_end; ++i) norm2 += double(xi[i]) * xi[i];
        if (norm2 == 0) continue;
        if (is_nyquist(xi[axis], grid.counts[axis])) continue;  // keep real inputs real
        op.multiplier[static_cast<Eigen::Index>(j)] =
            Complex(0.0, xi[axis] / std::sqrt(norm2));
    }
    check_unimodular(op.multiplier);
    return op;
}

}  // namespace

FourierMultiplierOp riesz_op(const PeriodicGrid& grid, int axis) {
    if (axis < 0 || axis >= grid.axes()) throw ShapeMismatchError("riesz axis out of range");
    return riesz_like(grid, 0, grid.axes(), axis, "riesz_" + std::to_string(axis + 1));
}

FourierMultiplierOp partial_riesz_op(const PeriodicGrid& grid, bool x_factor,
                                     int axis_in_factor) {
    if (grid.factor_split <= 0)
        throw ShapeMismatchError("partial_riesz_op requires a product grid");
    const int begin = x_factor ? 0 : grid.factor_split;
    const int end = x_factor ? grid.factor_split : grid.axes();
    const int axis = begin + axis_in_factor;
    if (axis_in_factor < 0 || axis >= end)
        throw ShapeMismatchError("partial riesz axis out of range");
    return riesz_like(grid, begin, end, axis,
                      std::string(x_factor ? "riesz_x_" : "riesz_y_") +
                          std::to_string(axis_in_factor + 1));
}

DiscreteGridFunction apply_multiplier(const FourierMultiplierOp& op,
                                      const DiscreteGridFunction& f) {
    if (op.grid.counts != f.grid.counts)
        throw ShapeMismatchError("multiplier and function grids differ");
    DiscreteGridFunction out(f.grid, f.components);
    CVector work(static_cast<Eigen::Index>(f.grid.size()));
    for (int c = 0; c < f.components; ++c) {
        work = f.values.col(c);
        fft_forward(f.grid.counts, work);
        work.array() *= op.multiplier.array();
        fft_inverse(f.grid.counts, work);
        out.values.col(c) = work;
    }
    return out;
}

DiscreteGridFunction lifted_apply(const FourierMultiplierOp& op,
                                  const DiscreteGridFunction& f) {
    return apply_multiplier(op, f);
}

namespace {

// cached W^{s} matrices over the lattice
std::vector<CMatrix> weight_powers(const MatrixWeight& w, const PeriodicGrid& grid, double s) {
    std::vector<CMatrix> out;
    out.reserve(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        out.push_back(fractional_power(w.eigensystem_at(grid.point(j)), s).matrix());
    return out;
}

void multiply_rows(Eigen::MatrixXcd& values, const std::vector<CMatrix>& mats) {
    for (std::size_t j = 0; j < mats.size(); ++j)
        values.row(j) = (mats[j] * values.row(j).transpose()).transpose();
}

double lp_norm(const Eigen::MatrixXcd& values, double p) {
    double acc = 0;
    for (Eigen::Index j = 0; j < values.rows(); ++j)
        acc += std::pow(values.row(j).norm(), p);
    return std::pow(acc, 1.0 / p);
}

// duality map of the mixed l^p(l^2) norm
void duality_map(Eigen::MatrixXcd& values, double p) {
    for (Eigen::Index j = 0; j < values.rows(); ++j) {
        const double n = values.row(j).norm();
        if (n > 0) values.row(j) *= std::pow(n, p - 2.0);
    }
}

}  // namespace

double lp_weight_norm(const DiscreteGridFunction& f, const MatrixWeight& w,
                      const LebesgueExponent& p) {
    if (f.components != w.dim())
        throw ShapeMismatchError("grid function components do not match the weight dimension");
    const auto wp = weight_powers(w, f.grid, 1.0 / p.p());
    double acc = 0;
    for (std::size_t j = 0; j < f.grid.size(); ++j)
        acc += std::pow((wp[j] * f.values.row(j).transpose()).norm(), p.p());
    return std::pow(acc * f.grid.cell_volume(), 1.0 / p.p());
}

NormEstimate weighted_operator_norm(const FourierMultiplierOp& op, const MatrixWeight& w,
                                    const LebesgueExponent& p, int trials, int max_iterations,
                                    std::uint64_t seed) {
    const PeriodicGrid& grid = op.grid;
    if (static_cast<int>(grid.counts.size()) != w.domain().total_dim())
        throw ShapeMismatchError("operator grid does not match the weight's domain");
    const int n = w.dim();
    const auto wp = weight_powers(w, grid, 1.0 / p.p());
    const auto wm = weight_powers(w, grid, -1.0 / p.p());

    FourierMultiplierOp adjoint = op;
    adjoint.multiplier = op.multiplier.conjugate();

    // B = M_{W^{1/p}} T M_{W^{-1/p}} on the unweighted mixed norm
    auto apply_b = [&](const DiscreteGridFunction& f) {
        DiscreteGridFunction g = f;
        multiply_rows(g.values, wm);
        g = apply_multiplier(op, g);
        multiply_rows(g.values, wp);
        return g;
    };
    auto apply_b_adjoint = [&](const DiscreteGridFunction& f) {
        DiscreteGridFunction g = f;
        multiply_rows(g.values, wp);
        g = apply_multiplier(adjoint, g);
        multiply_rows(g.values, wm);
        return g;
    };

    auto rng = seeded_rng(seed);
    std::normal_distribution<double> gauss;
    auto random_start = [&]() {
        DiscreteGridFunction f(grid, n);
        for (Eigen::Index j = 0; j < f.values.rows(); ++j)
            for (int c = 0; c < n; ++c) f.values(j, c) = Complex(gauss(rng), gauss(rng));
        f.values /= lp_norm(f.values, p.p());
        return f;
    };

    NormEstimate est;

    if (p.p() == 2.0) {
        est.restarts = 1;  // deterministic power iteration
        // power iteration on B* B
        DiscreteGridFunction v = random_start();
        double prev = 0;
        for (int it = 0; it < max_iterations; ++it) {
            ++est.iterations;
            DiscreteGridFunction bv = apply_b(v);
            const double sigma = bv.values.norm() / v.values.norm();
            est.value = std::max(est.value, sigma);
            if (it > 2 && std::abs(sigma - prev) <= 1e-11 * std::max(sigma, 1e-30)) {
                est.converged = true;
                break;
            }
            prev = sigma;
            DiscreteGridFunction btbv = apply_b_adjoint(bv);
            const double nrm = btbv.values.norm();
            if (nrm == 0) {
                est.converged = true;  // null operator
                break;
            }
            btbv.values /= nrm;
            v = btbv;
        }
        return est;
    }

    // nonlinear power ascent for p != 2: x <- J_q(B* J_p(B x))
    est.restarts = std::max(1, trials);
    const double q = p.q();
    for (int trial = 0; trial < est.restarts; ++trial) {
        DiscreteGridFunction x = random_start();
        double prev = 0;
        bool settled = false;
        for (int it = 0; it < max_iterations; ++it) {
            ++est.iterations;
            DiscreteGridFunction bx = apply_b(x);
            const double ratio = lp_norm(bx.values, p.p()) / lp_norm(x.values, p.p());
            est.value = std::max(est.value, ratio);
            if (it > 4 && std::abs(ratio - prev) <= 1e-9 * std::max(ratio, 1e-30)) {
                settled = true;
                break;
            }
            prev = ratio;
            duality_map(bx.values, p.p());
            DiscreteGridFunction y = apply_b_adjoint(bx);
            duality_map(y.values, q);
            const double nrm = lp_norm(y.values, p.p());
            if (nrm == 0) {
                settled = true;
                break;
            }
            y.values /= nrm;
            x = y;
        }
        est.converged = est.converged || settled;
    }
    return est;
}

}  // namespace mw
