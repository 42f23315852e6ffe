#include "mw/sufficiency.hpp"

#include <cmath>
#include <sstream>

#include "mw/errors.hpp"
#include "mw/numerics.hpp"

namespace mw {

ScalarApEstimate scalar_muckenhoupt_constant(const ScalarWeight& w, const LebesgueExponent& p,
                                             const SetFamilySpec& family, const QuadSpec& quad,
                                             int extra_levels) {
    const EnumeratedFamily fam = enumerate_sets(family, w.domain(), extra_levels);
    const double qp = p.q() / p.p();
    ScalarApEstimate est;
    for (std::size_t si = 0; si < fam.sets.size(); ++si) {
        const SampleGrid grid =
            set_quadrature(w.domain(), fam.sets[si], quad, w.axis_singular());
        double avg_w = 0, avg_dual = 0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double v = w.evaluate(grid.points[j]);
            const double mu = grid.weights[j] / fam.sets[si].volume;
            avg_w += mu * v;
            avg_dual += mu * std::pow(v, -qp);
        }
        const double value = avg_w * std::pow(avg_dual, p.p() / p.q());
        est.per_set.push_back(value);
        if (value > est.c_hat) {
            est.c_hat = value;
            est.argmax_set = si;
            est.argmax_set_desc = fam.sets[si].describe();
        }
    }
    return est;
}

ConstantTrend scalar_muckenhoupt_trend(const ScalarWeight& w, const LebesgueExponent& p,
                                       const SetFamilySpec& family, const QuadSpec& quad,
                                       int levels) {
    ConstantTrend trend;
    for (int level = 0; level < levels; ++level) {
        QuadSpec q = quad;
        q.points_per_axis = quad.points_per_axis << level;
        trend.values.push_back(
            scalar_muckenhoupt_constant(w, p, family, q, level).c_hat);
    }
    trend.slope = log_level_slope(trend.values);
    trend.divergence = divergence_suspected(trend.values);
    return trend;
}

SufficiencyReport sufficient_ap_check(const MatrixWeight& w, const LebesgueExponent& p,
                                      const SetFamilySpec& family, const GridLadder& ladder,
                                      const QuadSpec& quad, int trend_levels) {
    SufficiencyReport report;
    bool all_hold = true;
    for (int k = 0; k < w.dim(); ++k) {
        EssSupEstimate cond_i = coordinate_projection_bound(
            w, p, k, CoordinateTarget::EntryOfPowerTarget, ladder);
        if (cond_i.verdict != EssSupVerdict::BoundedAtResolution) {
            all_hold = false;
            std::ostringstream os;
            os << "condition (i) failed for k=" << (k + 1);
            if (cond_i.verdict == EssSupVerdict::DivergenceSuspected)
                os << " (criterion rate " << cond_i.rate << ", squared-criterion rate "
                   << 2.0 * cond_i.rate << ")";
            else
                os << " (inconclusive at resolution)";
            report.failed_checks.push_back(os.str());
        }
        report.condition_i.push_back(std::move(cond_i));

        const ScalarWeight target = entry_power_weight(w, 2.0 / p.p(), k, p.p() / 2.0);
        ConstantTrend cond_ii = scalar_muckenhoupt_trend(target, p, family, quad, trend_levels);
        if (cond_ii.divergence || !std::isfinite(cond_ii.final_value())) {
            all_hold = false;
            std::ostringstream os;
            os << "condition (ii) failed for k=" << (k + 1) << " (slope " << cond_ii.slope
               << ")";
            report.failed_checks.push_back(os.str());
        }
        report.condition_ii.push_back(std::move(cond_ii));
    }
    report.verdict = all_hold ? SufficiencyVerdict::SufficientConditionsHold
                              : SufficiencyVerdict::Indeterminate;
    return report;
}

NonNecessityReport non_necessity_demo(const SetFamilySpec& family, const GridLadder& ladder,
                                      const QuadSpec& quad, int levels) {
    Window win;
    win.lo = {0.0};
    win.hi = {1.0};
    const auto domain = DomainDescriptor::euclidean(1, win);
    const MatrixWeight w =
        catalog_weight("paper_example", nlohmann::json::object(), domain);

    NonNecessityReport report;
    report.sufficiency = sufficient_ap_check(w, LebesgueExponent(2.0), family, ladder, quad);
    report.bound = 2.0 * std::sqrt(2.0) / std::sqrt(3.0);
    for (int level = 0; level < levels; ++level) {
        QuadSpec q = quad;
        q.points_per_axis = quad.points_per_axis << level;
        const auto est = a2_averaged_matrix_constant(w, family, q, level);
        report.a2_values.push_back(est.sup);
        report.a2_sup = std::max(report.a2_sup, est.sup);
    }
    report.within_bound = report.a2_sup <= report.bound + 1e-6;
    return report;
}

}  // namespace mw
