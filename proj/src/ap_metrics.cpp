#include "mw/ap_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mw/errors.hpp"
#include "mw/numerics.hpp"

namespace mw {

namespace {

// rho from a precomputed eigensystem: |W^{1/p} x|^2 = sum lambda^{2/p} |u_i* x|^2
double rho_from_eigensystem(const Eigensystem& es, double inv_p, const CVector& x) {
    const CVector g = es.vectors.adjoint() * x;
    double s = 0;
    for (int i = 0; i < es.values.size(); ++i)
        s += std::pow(es.values[i], 2.0 * inv_p) * std::norm(g[i]);
    return std::sqrt(s);
}

struct SetCache {
    std::vector<Eigensystem> eigensystems;
    std::vector<double> mu;  // weights normalized by |E|
    double min_singular_distance = 0;
};

SetCache build_set_cache(const MatrixWeight& w, const AveragingSet& e, const QuadSpec& quad) {
    SetCache cache;
    const SampleGrid grid = set_quadrature(w.domain(), e, quad, w.axis_singular());
    cache.eigensystems.reserve(grid.size());
    cache.mu.reserve(grid.size());
    cache.min_singular_distance = grid.min_singular_distance;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        cache.eigensystems.push_back(w.eigensystem_at(grid.points[j]));
        cache.mu.push_back(grid.weights[j] / e.volume);
    }
    return cache;
}

double spectral_norm_2x2(const CMatrix& c) {
    // singular values of a 2x2 from the invariants of C* C
    const double f2 = c.squaredNorm();
    const double det = std::abs(c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0));
    const double disc = std::max(f2 * f2 - 4.0 * det * det, 0.0);
    return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

double product_spectral_norm(const CMatrix& a, const CMatrix& b) {
    const CMatrix c = a * b;
    if (c.rows() == 1) return std::abs(c(0, 0));
    if (c.rows() == 2) return spectral_norm_2x2(c);
    return spectral_norm(c);
}

}  // namespace

std::vector<CVector> sphere_directions(int n, int count, std::uint64_t seed) {
    if (n < 1) throw ConfigError("sphere dimension must be >= 1");
    if (count < 1) throw ConfigError("sphere count must be >= 1");
    std::vector<CVector> out;
    if (n == 1) {
        CVector v(1);
        v[0] = 1.0;
        out.push_back(v);
        return out;
    }
    if (n == 2) {
        // (theta, phase) lattice on (cos t, sin t e^{i phi}); the global
        // phase is irrelevant to every metric built from norms
        const int ntheta = std::max(2, static_cast<int>(std::lround(std::sqrt(count / 2.0))));
        const int nphi = std::max(4, (count + ntheta - 1) / ntheta);
        for (int i = 0; i < ntheta; ++i) {
            const double th = (i + 0.5) * (std::numbers::pi / 2) / ntheta;
            for (int j = 0; j < nphi; ++j) {
                const double ph = 2 * std::numbers::pi * j / nphi;
                CVector v(2);
                v[0] = std::cos(th);
                v[1] = std::sin(th) * Complex(std::cos(ph), std::sin(ph));
                out.push_back(v);
            }
        }
        // include the coordinate axes
        CVector e1(2), e2(2);
        e1 << 1.0, 0.0;
        e2 << 0.0, 1.0;
        out.push_back(e1);
        out.push_back(e2);
        return out;
    }
    auto rng = seeded_rng(seed);
    std::normal_distribution<double> g;
    for (int k = 0; k < count; ++k) {
        CVector v(n);
        for (int i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
        v /= v.norm();
        out.push_back(v);
    }
    for (int i = 0; i < n; ++i) {
        CVector e = CVector::Zero(n);
        e[i] = 1.0;
        out.push_back(e);
    }
    return out;
}

double rho(const MatrixWeight& w, const LebesgueExponent& p, const Point& t, const CVector& x) {
    return rho_from_eigensystem(w.eigensystem_at(t), 1.0 / p.p(), x);
}

double rho_dual(const MatrixWeight& w, const LebesgueExponent& p, const Point& t,
                const CVector& x) {
    return rho_from_eigensystem(w.eigensystem_at(t), -1.0 / p.p(), x);
}

double rho_avg(const MatrixWeight& w, const LebesgueExponent& p, const AveragingSet& e,
               const CVector& x, const QuadSpec& quad) {
    const SetCache cache = build_set_cache(w, e, quad);
    double acc = 0;
    for (std::size_t j = 0; j < cache.mu.size(); ++j)
        acc += cache.mu[j] *
               std::pow(rho_from_eigensystem(cache.eigensystems[j], 1.0 / p.p(), x), p.p());
    return std::pow(acc, 1.0 / p.p());
}

double rho_dual_avg(const MatrixWeight& w, const LebesgueExponent& p, const AveragingSet& e,
                    const CVector& x, const QuadSpec& quad) {
    const SetCache cache = build_set_cache(w, e, quad);
    double acc = 0;
    for (std::size_t j = 0; j < cache.mu.size(); ++j)
        acc += cache.mu[j] *
               std::pow(rho_from_eigensystem(cache.eigensystems[j], -1.0 / p.p(), x), p.q());
    return std::pow(acc, 1.0 / p.q());
}

namespace {

double rho_avg_from_cache(const SetCache& cache, double pval, const CVector& y) {
    double acc = 0;
    for (std::size_t j = 0; j < cache.mu.size(); ++j)
        acc += cache.mu[j] *
               std::pow(rho_from_eigensystem(cache.eigensystems[j], 1.0 / pval, y), pval);
    return std::pow(acc, 1.0 / pval);
}

// avg_E W^{2/p}: for p = 2 the averaged metric is exactly |M_E^{1/2} y|, and
// M_E^{-1} x is the maximizing direction of the dual norm. For p != 2 it is
// a well-informed candidate; the sphere lattice still guards the maximum.
CMatrix averaged_metric_matrix(const SetCache& cache, double pval) {
    const int n = cache.eigensystems.empty() ? 1 : cache.eigensystems[0].values.size();
    CMatrix acc = CMatrix::Zero(n, n);
    for (std::size_t j = 0; j < cache.mu.size(); ++j) {
        const Eigensystem& es = cache.eigensystems[j];
        RVector powered(es.values.size());
        for (int i = 0; i < es.values.size(); ++i)
            powered[i] = std::pow(es.values[i], 2.0 / pval);
        acc += cache.mu[j] * (es.vectors * powered.asDiagonal() * es.vectors.adjoint());
    }
    return 0.5 * (acc + acc.adjoint().eval());
}

double dual_from_cache(const SetCache& cache, double pval, const CVector& x,
                       const std::vector<CVector>& ys, const std::vector<double>& rho_avg_ys,
                       const CMatrix* metric_inverse) {
    double best = 0;
    for (std::size_t l = 0; l < ys.size(); ++l) {
        if (rho_avg_ys[l] == 0) continue;
        best = std::max(best, std::abs(ys[l].dot(x)) / rho_avg_ys[l]);
    }
    if (metric_inverse) {
        CVector adapted = (*metric_inverse) * x;
        const double nrm = adapted.norm();
        if (nrm > 0) {
            adapted /= nrm;
            const double denom = rho_avg_from_cache(cache, pval, adapted);
            if (denom > 0) best = std::max(best, std::abs(adapted.dot(x)) / denom);
        }
    }
    return best;
}

}  // namespace

double dual_of_avg(const MatrixWeight& w, const LebesgueExponent& p, const AveragingSet& e,
                   const CVector& x, int sphere_count, const QuadSpec& quad,
                   std::uint64_t seed) {
    if (sphere_count < 2 * w.dim() * w.dim())
        throw ConfigError("sphere_count must be at least 2 N^2");
    const SetCache cache = build_set_cache(w, e, quad);
    const auto ys = sphere_directions(w.dim(), sphere_count, seed);
    std::vector<double> rho_avg_ys;
    rho_avg_ys.reserve(ys.size());
    for (const auto& y : ys) rho_avg_ys.push_back(rho_avg_from_cache(cache, p.p(), y));
    const CMatrix metric = averaged_metric_matrix(cache, p.p());
    const CMatrix inv = fractional_power(HermitianMatrix(metric), -1.0).matrix();
    return dual_from_cache(cache, p.p(), x, ys, rho_avg_ys, &inv);
}

IntegrabilityCheck local_integrability_screen(const MatrixWeight& w, const LebesgueExponent& p,
                                              int base_points) {
    IntegrabilityCheck check;
    const double qp = p.q() / p.p();
    for (int level = 0; level < 3; ++level) {
        GridSpec spec;
        spec.counts.assign(w.domain().total_dim(), base_points << level);
        const SampleGrid grid = build_grid(w.domain(), spec);
        double iw = 0, idual = 0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            try {
                const Eigensystem es = w.eigensystem_at(grid.points[j]);
                const double lmax = es.values.maxCoeff();
                const double lmin = es.values.minCoeff();
                iw += grid.weights[j] * lmax;
                idual += grid.weights[j] * std::pow(lmin, -qp);
            } catch (const SingularPointError&) {
                // measure-zero lattice collision
            } catch (const DegenerateSampleError&) {
                idual = std::numeric_limits<double>::infinity();
            }
        }
        check.weight_integrals.push_back(iw);
        check.dual_integrals.push_back(idual);
    }
    auto ratios_ok = [](const std::vector<double>& v) {
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            if (!std::isfinite(v[i + 1])) return false;
            if (v[i + 1] > 10.0 * std::max(v[i], 1e-300)) return false;
        }
        return true;
    };
    check.passed = ratios_ok(check.weight_integrals) && ratios_ok(check.dual_integrals);
    return check;
}

ApEstimate ap_condition_check(const MatrixWeight& w, const LebesgueExponent& p,
                              const SetFamilySpec& family, int sphere_count,
                              const QuadSpec& quad, std::uint64_t seed, int extra_levels) {
    if (sphere_count < 2 * w.dim() * w.dim())
        throw ConfigError("sphere_count must be at least 2 N^2");
    const IntegrabilityCheck integ = local_integrability_screen(w, p);
    if (!integ.passed)
        throw NotIntegrableError("weight " + w.name() +
                                 " not locally integrable at declared resolution");

    const EnumeratedFamily fam = enumerate_sets(family, w.domain(), extra_levels);
    const auto ys = sphere_directions(w.dim(), sphere_count, seed);
    const int nk = static_cast<int>(ys.size());

    ApEstimate est;
    est.sphere_count = nk;
    est.torus_radius_capped = fam.torus_radius_capped;

    CMatrix y_mat(w.dim(), nk);
    for (int k = 0; k < nk; ++k) y_mat.col(k) = ys[k];

    // averaged metrics for all directions in one pass per grid point
    auto averaged_norms = [&](const SetCache& cache, const CMatrix& dirs, double expo_sign,
                              double outer) {
        std::vector<double> acc(dirs.cols(), 0.0);
        CMatrix g;
        RVector powered;
        for (std::size_t j = 0; j < cache.mu.size(); ++j) {
            const Eigensystem& es = cache.eigensystems[j];
            g.noalias() = es.vectors.adjoint() * dirs;
            powered.resize(es.values.size());
            for (int i = 0; i < es.values.size(); ++i)
                powered[i] = std::pow(es.values[i], expo_sign * 2.0 / p.p());
            for (Eigen::Index k = 0; k < dirs.cols(); ++k) {
                double s = 0;
                for (int i = 0; i < es.values.size(); ++i) s += powered[i] * std::norm(g(i, k));
                acc[k] += cache.mu[j] * std::pow(s, outer / 2.0);
            }
        }
        for (auto& v : acc) v = std::pow(v, 1.0 / outer);
        return acc;
    };

    for (std::size_t si = 0; si < fam.sets.size(); ++si) {
        const SetCache cache = build_set_cache(w, fam.sets[si], quad);
        const std::vector<double> avg_p = averaged_norms(cache, y_mat, +1.0, p.p());
        const std::vector<double> avg_q = averaged_norms(cache, y_mat, -1.0, p.q());

        const CMatrix metric = averaged_metric_matrix(cache, p.p());
        const CMatrix metric_inv = fractional_power(HermitianMatrix(metric), -1.0).matrix();
        CMatrix adapted = metric_inv * y_mat;
        for (int k = 0; k < nk; ++k) {
            const double nrm = adapted.col(k).norm();
            if (nrm > 0) adapted.col(k) /= nrm;
        }
        const std::vector<double> avg_p_adapted = averaged_norms(cache, adapted, +1.0, p.p());
        const CMatrix gram = (y_mat.adjoint() * y_mat).cwiseAbs();

        double set_worst = 0.0;
        int set_arg = 0;
        for (int k = 0; k < nk; ++k) {
            double dual = 0;
            for (int l = 0; l < nk; ++l)
                if (avg_p[l] > 0) dual = std::max(dual, gram(l, k).real() / avg_p[l]);
            if (avg_p_adapted[k] > 0)
                dual = std::max(dual,
                                std::abs(adapted.col(k).dot(y_mat.col(k))) / avg_p_adapted[k]);
            if (dual == 0) continue;
            const double ratio = avg_q[k] / dual;
            if (ratio > set_worst) {
                set_worst = ratio;
                set_arg = k;
            }
        }
        est.per_set.push_back(set_worst);
        if (set_worst > est.c_hat) {
            est.c_hat = set_worst;
            est.argmax_set = si;
            est.argmax_set_desc = fam.sets[si].describe();
            est.argmax_direction = ys[set_arg];
        }
    }
    return est;
}

double ConstantTrend::max_value() const {
    double m = 0;
    for (double v : values) m = std::max(m, v);
    return m;
}

namespace {

ConstantTrend make_trend(std::vector<double> values) {
    ConstantTrend t;
    t.values = std::move(values);
    t.slope = log_level_slope(t.values);
    t.divergence = divergence_suspected(t.values);
    return t;
}

}  // namespace

ConstantTrend ap_condition_trend(const MatrixWeight& w, const LebesgueExponent& p,
                                 const SetFamilySpec& family, int sphere_count,
                                 const QuadSpec& quad, std::uint64_t seed, int levels) {
    std::vector<double> values;
    for (int level = 0; level < levels; ++level) {
        QuadSpec q = quad;
        q.points_per_axis = quad.points_per_axis << level;
        values.push_back(
            ap_condition_check(w, p, family, sphere_count, q, seed, level).c_hat);
    }
    return make_trend(std::move(values));
}

RoudenkoEstimate roudenko_constant(const MatrixWeight& w, const LebesgueExponent& p,
                                   const SetFamilySpec& family, const QuadSpec& quad,
                                   MatrixNormKind norm, int extra_levels) {
    const EnumeratedFamily fam = enumerate_sets(family, w.domain(), extra_levels);
    RoudenkoEstimate est;
    est.points_per_axis = quad.points_per_axis;
    est.torus_radius_capped = fam.torus_radius_capped;

    for (std::size_t si = 0; si < fam.sets.size(); ++si) {
        const SetCache cache = build_set_cache(w, fam.sets[si], quad);
        const std::size_t m = cache.mu.size();
        std::vector<CMatrix> wp(m), wm(m);
        for (std::size_t j = 0; j < m; ++j) {
            wp[j] = fractional_power(cache.eigensystems[j], 1.0 / p.p()).matrix();
            wm[j] = fractional_power(cache.eigensystems[j], -1.0 / p.p()).matrix();
        }
        double outer = 0;
        for (std::size_t jx = 0; jx < m; ++jx) {
            double inner = 0;
            for (std::size_t jt = 0; jt < m; ++jt) {
                const double s = norm == MatrixNormKind::Spectral
                                     ? product_spectral_norm(wp[jx], wm[jt])
                                     : (wp[jx] * wm[jt]).norm();
                inner += cache.mu[jt] * std::pow(s, p.q());
            }
            outer += cache.mu[jx] * std::pow(inner, p.p() / p.q());
        }
        est.per_set.push_back(outer);
        if (outer > est.c_hat) {
            est.c_hat = outer;
            est.argmax_set = si;
            est.argmax_set_desc = fam.sets[si].describe();
        }
    }
    return est;
}

ConstantTrend roudenko_trend(const MatrixWeight& w, const LebesgueExponent& p,
                             const SetFamilySpec& family, const QuadSpec& quad, int levels,
                             MatrixNormKind norm) {
    std::vector<double> values;
    for (int level = 0; level < levels; ++level) {
        QuadSpec q = quad;
        q.points_per_axis = quad.points_per_axis << level;
        values.push_back(roudenko_constant(w, p, family, q, norm, level).c_hat);
    }
    return make_trend(std::move(values));
}

HermitianMatrix averaged_power(const MatrixWeight& w, double s, const AveragingSet& e,
                               const QuadSpec& quad) {
    const SampleGrid grid = set_quadrature(w.domain(), e, quad, w.axis_singular());
    CMatrix acc = CMatrix::Zero(w.dim(), w.dim());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const Eigensystem es = w.eigensystem_at(grid.points[j]);
        const double mu = grid.weights[j] / e.volume;
        if (s == 1.0) {
            acc += mu * (es.vectors * es.values.asDiagonal() * es.vectors.adjoint());
        } else {
            acc += mu * fractional_power(es, s).matrix();
        }
    }
    return HermitianMatrix(0.5 * (acc + acc.adjoint().eval()));
}

A2AveragedEstimate a2_averaged_matrix_constant(const MatrixWeight& w,
                                               const SetFamilySpec& family,
                                               const QuadSpec& quad, int extra_levels) {
    const EnumeratedFamily fam = enumerate_sets(family, w.domain(), extra_levels);
    A2AveragedEstimate est;
    for (std::size_t si = 0; si < fam.sets.size(); ++si) {
        const HermitianMatrix avg_w = averaged_power(w, 1.0, fam.sets[si], quad);
        const HermitianMatrix avg_winv = averaged_power(w, -1.0, fam.sets[si], quad);
        const CMatrix prod =
            fractional_power(avg_w, 0.5).matrix() * fractional_power(avg_winv, 0.5).matrix();
        const double value = prod.norm();
        est.per_set.push_back(value);
        if (value > est.sup) {
            est.sup = value;
            est.argmax_set = si;
            est.argmax_set_desc = fam.sets[si].describe();
        }
    }
    return est;
}

std::pair<MatrixWeight, LebesgueExponent> duality_transform(const MatrixWeight& w,
                                                            const LebesgueExponent& p) {
    return {weight_power(w, -p.q() / p.p()), LebesgueExponent(p.q())};
}

MatrixWeight slice_weight(const MatrixWeight& w, bool keep_x, const Point& frozen) {
    if (!w.domain().is_product())
        throw DomainMismatchError("slice_weight requires a weight on a product domain");
    const DomainDescriptor factor = w.domain().factor(keep_x);
    const DomainDescriptor other = w.domain().factor(!keep_x);
    if (static_cast<int>(frozen.size()) != other.total_dim())
        throw ShapeMismatchError("frozen point has wrong dimension");
    if (!other.contains(frozen))
        throw DomainMismatchError("frozen point lies outside the factor window");

    const int m = w.domain().dim_x();
    auto join = [keep_x, m](const Point& free, const Point& fixed) {
        Point t;
        if (keep_x) {
            t = free;
            t.insert(t.end(), fixed.begin(), fixed.end());
        } else {
            t = fixed;
            t.insert(t.end(), free.begin(), free.end());
        }
        (void)m;
        return t;
    };

    auto base = std::make_shared<MatrixWeight>(w);
    std::vector<std::vector<double>> axis_singular;
    const int off = keep_x ? 0 : m;
    for (int i = 0; i < factor.total_dim(); ++i)
        axis_singular.push_back(w.axis_singular()[off + i]);

    std::string name = w.name() + (keep_x ? "|x-slice" : "|y-slice");
    return MatrixWeight(
        factor, w.dim(), std::move(name),
        [base, join, frozen](const Point& t) { return base->evaluate(join(t, frozen)).matrix(); },
        axis_singular,
        [base, join, frozen](const Point& t) { return base->is_singular_point(join(t, frozen)); });
}

SliceReport uniform_slice_check(const MatrixWeight& w, const LebesgueExponent& p, bool keep_x,
                                int slice_samples, const SetFamilySpec& family_on_factor,
                                const QuadSpec& quad) {
    if (!w.domain().is_product())
        throw DomainMismatchError("uniform_slice_check requires a product domain");
    if (slice_samples < 1) throw ConfigError("slice_samples must be >= 1");
    const DomainDescriptor other = w.domain().factor(!keep_x);
    GridSpec spec;
    spec.counts.assign(other.total_dim(), std::max(2, slice_samples));
    const SampleGrid lattice = build_grid(other, spec);

    SliceReport report;
    std::size_t taken = 0;
    for (std::size_t i = 0; i < lattice.size() && taken < static_cast<std::size_t>(slice_samples);
         ++i, ++taken) {
        const Point& frozen = lattice.points[i];
        const MatrixWeight sliced = slice_weight(w, keep_x, frozen);
        const RoudenkoEstimate est = roudenko_constant(sliced, p, family_on_factor, quad);
        report.frozen_points.push_back(frozen);
        report.per_slice.push_back(est.c_hat);
        report.sup = std::max(report.sup, est.c_hat);
    }
    return report;
}

}  // namespace mw
