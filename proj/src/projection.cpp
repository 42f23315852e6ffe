#include "mw/projection.hpp"

#include <algorithm>
#include <cmath>

#include "mw/errors.hpp"
#include "mw/numerics.hpp"

namespace mw {

DirectionField::DirectionField(int n, std::string name, Evaluator evaluator)
    : n_(n), name_(std::move(name)), evaluator_(std::move(evaluator)) {
    if (n_ < 1) throw ConfigError("direction field dimension must be >= 1");
}

CVector DirectionField::evaluate(const Point& t) const {
    CVector v = evaluator_(t);
    if (v.size() != n_) throw ShapeMismatchError("direction field returned wrong dimension");
    if (std::abs(v.norm() - 1.0) > 1e-10)
        throw ShapeMismatchError("direction field " + name_ + " is not unit length");
    return v;
}

DirectionField coordinate_direction(int n, int k) {
    if (k < 0 || k >= n) throw ShapeMismatchError("coordinate direction index out of range");
    return DirectionField(n, "e_" + std::to_string(k + 1), [n, k](const Point&) {
        CVector v = CVector::Zero(n);
        v[k] = 1.0;
        return v;
    });
}

DirectionField eigenvector_direction(const MatrixWeight& w, int i) {
    if (i < 0 || i >= w.dim()) throw ShapeMismatchError("eigenvector index out of range");
    auto base = std::make_shared<MatrixWeight>(w);
    return DirectionField(w.dim(), "v_" + std::to_string(i + 1) + "[" + w.name() + "]",
                          [base, i](const Point& t) {
                              const Eigensystem es = base->eigensystem_at(t);
                              return CVector(es.vectors.col(i));
                          });
}

DirectionField custom_direction(int n, std::string name, DirectionField::Evaluator raw) {
    return DirectionField(n, std::move(name), [raw = std::move(raw)](const Point& t) {
        CVector v = raw(t);
        const double nrm = v.norm();
        if (!(nrm > 0)) throw ShapeMismatchError("custom direction field vanished");
        return CVector(v / nrm);
    });
}

namespace {

// w(t)^{1/p} |W^{-1/p}(t) r(t)|
double criterion_value(const MatrixWeight& wm, const ScalarWeight& ws,
                       const LebesgueExponent& p, const DirectionField& r, const Point& t) {
    const Eigensystem es = wm.eigensystem_at(t);
    const CVector rt = r.evaluate(t);
    const CVector g = es.vectors.adjoint() * rt;
    double s = 0;
    for (int i = 0; i < es.values.size(); ++i)
        s += std::pow(es.values[i], -2.0 / p.p()) * std::norm(g[i]);
    return std::pow(ws.evaluate(t), 1.0 / p.p()) * std::sqrt(s);
}

std::vector<std::vector<double>> merged_axis_singular(const MatrixWeight& wm,
                                                      const ScalarWeight& ws) {
    std::vector<std::vector<double>> merged = wm.axis_singular();
    const auto& other = ws.axis_singular();
    for (std::size_t i = 0; i < merged.size() && i < other.size(); ++i)
        merged[i].insert(merged[i].end(), other[i].begin(), other[i].end());
    return merged;
}

using CriterionFn = std::function<double(const Point&)>;

double point_singular_distance(const DomainDescriptor& domain, const Point& t,
                               const std::vector<std::vector<double>>& axis_singular) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < domain.total_dim() && i < static_cast<int>(axis_singular.size()); ++i)
        for (double s : axis_singular[i])
            best = std::min(best, std::abs(domain.axis_distance(i, t[i], s)));
    return best;
}

EssSupEstimate ess_sup_over_ladder(const DomainDescriptor& domain,
                                   const std::vector<std::vector<double>>& axis_singular,
                                   const GridLadder& ladder, const CriterionFn& criterion) {
    EssSupEstimate est;
    std::vector<double> maxima, distances;
    for (int level = 0; level < ladder.levels; ++level) {
        GridSpec spec = ladder.base;
        if (spec.counts.empty()) spec.counts.assign(domain.total_dim(), 256);
        for (int& c : spec.counts) c <<= level;
        spec.axis_singular = axis_singular;
        const SampleGrid grid = build_grid(domain, spec);

        double level_max = est.b_hat;
        double min_dist = std::numeric_limits<double>::infinity();
        std::size_t skipped = 0;
        Point level_arg = est.argmax;
        std::vector<std::pair<double, double>> profile;
        profile.reserve(grid.size());
        for (const auto& t : grid.points) {
            double g;
            try {
                g = criterion(t);
            } catch (const DegenerateSampleError&) {
                // sample inside the eigenvalue floor: flagged, excluded
                ++skipped;
                continue;
            } catch (const NearSingularError&) {
                ++skipped;
                continue;
            }
            profile.emplace_back(t[0], g);
            min_dist = std::min(min_dist, point_singular_distance(domain, t, axis_singular));
            if (g > level_max) {
                level_max = g;
                level_arg = t;
            }
        }
        est.b_hat = level_max;  // cumulative max: nondecreasing under refinement
        est.argmax = level_arg;
        est.trace.push_back({level, grid.size(), skipped, min_dist, level_max, level_arg});
        maxima.push_back(level_max);
        distances.push_back(min_dist);
        if (level == ladder.levels - 1) est.profile = std::move(profile);
    }

    const double growth =
        maxima.front() > 0 ? maxima.back() / maxima.front() : (maxima.back() > 0 ? 1e300 : 1.0);
    bool have_distances = true;
    for (double d : distances)
        if (!std::isfinite(d)) have_distances = false;
    if (have_distances && ladder.levels >= 3) est.rate = log_log_slope(distances, maxima);

    if (ladder.levels >= 3 && have_distances && est.rate <= -0.1 && growth > 1.2)
        est.verdict = EssSupVerdict::DivergenceSuspected;
    else if (growth <= 1.02)
        est.verdict = EssSupVerdict::BoundedAtResolution;
    else
        est.verdict = EssSupVerdict::Inconclusive;
    return est;
}

}  // namespace

EssSupEstimate projection_bound(const MatrixWeight& w_matrix, const ScalarWeight& w_scalar,
                                const LebesgueExponent& p, const DirectionField& r,
                                const GridLadder& ladder) {
    if (w_matrix.dim() != r.dim())
        throw ShapeMismatchError("direction field dimension does not match the weight");
    return ess_sup_over_ladder(
        w_matrix.domain(), merged_axis_singular(w_matrix, w_scalar), ladder,
        [&](const Point& t) { return criterion_value(w_matrix, w_scalar, p, r, t); });
}

EssSupEstimate coordinate_projection_bound(const MatrixWeight& w, const LebesgueExponent& p,
                                           int k, CoordinateTarget target,
                                           const GridLadder& ladder) {
    if (k < 0 || k >= w.dim()) throw ShapeMismatchError("coordinate index out of range");
    const double s = 2.0 / p.p();
    // criterion g with g^2 = w_kk^{target power} * w_kk^{(-2/p)}, using
    // |W^{-1/p} e_k|^2 = w_kk^{(-2/p)}
    auto criterion = [&w, &p, k, s, target](const Point& t) {
        const Eigensystem es = w.eigensystem_at(t);
        double entry_minus = 0, entry_plus = 0, entry_w = 0;
        for (int i = 0; i < es.values.size(); ++i) {
            const double gi = std::norm(es.vectors(k, i));
            entry_minus += std::pow(es.values[i], -s) * gi;
            entry_plus += std::pow(es.values[i], s) * gi;
            entry_w += es.values[i] * gi;
        }
        const double scalar_part =
            target == CoordinateTarget::EntryOfW ? entry_w : std::pow(entry_plus, p.p() / 2.0);
        return std::pow(scalar_part, 1.0 / p.p()) * std::sqrt(entry_minus);
    };
    return ess_sup_over_ladder(w.domain(), w.axis_singular(), ladder, criterion);
}

EigenCheckReport eigen_projection_check(const MatrixWeight& w, const LebesgueExponent& p, int i,
                                        const SampleGrid& grid) {
    if (i < 0 || i >= w.dim()) throw ShapeMismatchError("eigenvalue index out of range");
    EigenCheckReport report;
    for (const auto& t : grid.points) {
        if (w.is_singular_point(t)) continue;
        const Eigensystem es = w.eigensystem_at(t);
        const double scale = es.values.cwiseAbs().maxCoeff();
        double gap = std::numeric_limits<double>::infinity();
        if (i > 0) gap = std::min(gap, es.values[i] - es.values[i - 1]);
        if (i + 1 < es.values.size()) gap = std::min(gap, es.values[i + 1] - es.values[i]);
        if (!(gap >= 1e-10 * scale)) {
            ++report.flagged;
            continue;
        }
        ++report.checked;
        const CMatrix winv_p = fractional_power(es, -1.0 / p.p()).matrix();
        const double value =
            std::pow(es.values[i], 1.0 / p.p()) * (winv_p * es.vectors.col(i)).norm();
        report.max_deviation = std::max(report.max_deviation, std::abs(value - 1.0));
    }
    return report;
}

namespace {

// unit-mass radial triangular bump on the ball |u| < eps
double bump(const DomainDescriptor& domain, const Point& t, const Point& t0, double eps) {
    double r2 = 0;
    for (int i = 0; i < domain.total_dim(); ++i) {
        const double d = domain.axis_distance(i, t[i], t0[i]);
        r2 += d * d;
    }
    const double r = std::sqrt(r2);
    if (r >= eps) return 0.0;
    const int d = domain.total_dim();
    const double mass = unit_ball_volume(d) / (d + 1.0);  // integral of (1-|u|)+
    return (1.0 - r / eps) / (mass * std::pow(eps, d));
}

}  // namespace

WitnessFamily generate_witness(const MatrixWeight& w_matrix, const ScalarWeight& w_scalar,
                               const LebesgueExponent& p, const DirectionField& r,
                               const Point& t0, const std::vector<double>& epsilons,
                               const SampleGrid& grid) {
    (void)w_scalar;
    const auto& domain = w_matrix.domain();
    for (double eps : epsilons) {
        if (!(eps > 0)) throw ConfigError("bump width must be positive");
        if (!domain.is_torus()) {
            for (int i = 0; i < domain.total_dim(); ++i) {
                if (t0[i] - eps < domain.axis_lo(i) || t0[i] + eps > domain.axis_hi(i))
                    throw SupportOverflowError("bump support escapes the window");
            }
        }
    }

    WitnessFamily fam;
    fam.t0 = t0;
    fam.epsilons = epsilons;
    for (double eps : epsilons) {
        std::vector<CVector> f(grid.size(), CVector::Zero(w_matrix.dim()));
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const Point& t = grid.points[j];
            const double phi = bump(domain, t, t0, eps);
            if (phi == 0.0) continue;
            const Eigensystem es = w_matrix.eigensystem_at(t);
            const CVector rt = r.evaluate(t);
            const CVector g = es.vectors.adjoint() * rt;
            double nrm2 = 0;
            CVector shaped = CVector::Zero(w_matrix.dim());
            RVector pw(es.values.size());
            for (int i = 0; i < es.values.size(); ++i) {
                nrm2 += std::pow(es.values[i], -2.0 / p.p()) * std::norm(g[i]);
                pw[i] = std::pow(es.values[i], -2.0 / p.p());
            }
            shaped = es.vectors * (pw.asDiagonal() * g);  // W^{-2/p} r
            f[j] = std::pow(phi, 1.0 / p.p()) / std::sqrt(nrm2) * shaped;
        }
        // |f_eps|_{L^p(W)}^p collapses to the bump mass by construction
        double acc = 0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            if (f[j].isZero()) continue;
            const Eigensystem es = w_matrix.eigensystem_at(grid.points[j]);
            acc += grid.weights[j] *
                   std::pow(weighted_vector_norm(es, 1.0 / p.p(), f[j]), p.p());
        }
        fam.functions.push_back(std::move(f));
        fam.lp_norms.push_back(std::pow(acc, 1.0 / p.p()));
    }
    return fam;
}

double measure_ratio(const std::vector<CVector>& f, const MatrixWeight& w_matrix,
                     const ScalarWeight& w_scalar, const LebesgueExponent& p,
                     const DirectionField& r, const SampleGrid& grid) {
    if (f.size() != grid.size())
        throw ShapeMismatchError("function and grid have different sizes");
    double num = 0, den = 0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (f[j].isZero()) continue;
        const Point& t = grid.points[j];
        const Eigensystem es = w_matrix.eigensystem_at(t);
        const CVector rt = r.evaluate(t);
        num += grid.weights[j] * std::pow(std::abs(rt.dot(f[j])), p.p()) * w_scalar.evaluate(t);
        den += grid.weights[j] *
               std::pow(weighted_vector_norm(es, 1.0 / p.p(), f[j]), p.p());
    }
    if (!(den > 0)) throw Error("zero_norm", "measure_ratio: |f| in L^p(W) vanishes");
    return std::pow(num / den, 1.0 / p.p());
}

}  // namespace mw
