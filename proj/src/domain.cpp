#include "mw/domain.hpp"


#include <Eigen/Dense>
#include <array>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mw/errors.hpp"

namespace mw {

namespace {

constexpr double kTorusRadiusCap = 0.5;

Window unit_window(int d) {
    Window w;
    w.lo.assign(d, 0.0);
    w.hi.assign(d, 1.0);
    return w;
}

void validate_window(const Window& w, int d) {
    if (static_cast<int>(w.lo.size()) != d || static_cast<int>(w.hi.size()) != d)
        throw ConfigError("window has wrong dimension");
    for (int i = 0; i < d; ++i)
        if (!(w.hi[i] > w.lo[i])) throw ConfigError("window must have positive volume");
}

double wrap01(double x) {
    double y = x - std::floor(x);
    if (y >= 1.0) y = 0.0;
    return y;
}

}  // namespace

DomainDescriptor DomainDescriptor::euclidean(int d, Window window) {
    if (d < 1) throw ConfigError("dimension must be >= 1");
    validate_window(window, d);
    return DomainDescriptor(DomainKind::EuclideanLine, d, 0, std::move(window));
}

DomainDescriptor DomainDescriptor::torus(int d) {
    if (d < 1) throw ConfigError("dimension must be >= 1");
    return DomainDescriptor(DomainKind::Torus, d, 0, unit_window(d));
}

DomainDescriptor DomainDescriptor::product_euclidean(int m, int n, Window window) {
    if (m < 1 || n < 1) throw ConfigError("factor dimensions must be >= 1");
    validate_window(window, m + n);
    return DomainDescriptor(DomainKind::ProductEuclidean, m, n, std::move(window));
}

DomainDescriptor DomainDescriptor::product_torus(int m, int n) {
    if (m < 1 || n < 1) throw ConfigError("factor dimensions must be >= 1");
    return DomainDescriptor(DomainKind::ProductTorus, m, n, unit_window(m + n));
}

double DomainDescriptor::axis_lo(int axis) const { return window_.lo.at(axis); }
double DomainDescriptor::axis_hi(int axis) const { return window_.hi.at(axis); }

double DomainDescriptor::window_volume() const {
    double v = 1.0;
    for (int i = 0; i < total_dim(); ++i) v *= axis_hi(i) - axis_lo(i);
    return v;
}

bool DomainDescriptor::contains(const Point& t) const {
    if (static_cast<int>(t.size()) != total_dim()) return false;
    if (is_torus()) return true;  // coordinates are reduced mod 1
    for (int i = 0; i < total_dim(); ++i)
        if (t[i] < axis_lo(i) || t[i] > axis_hi(i)) return false;
    return true;
}

double DomainDescriptor::axis_distance(int axis, double a, double b) const {
    (void)axis;
    double d = a - b;
    if (is_torus()) {
        d = wrap01(d);
        if (d > 0.5) d -= 1.0;
    }
    return d;
}

DomainDescriptor DomainDescriptor::factor(bool keep_x) const {
    if (!is_product()) throw DomainMismatchError("factor() requires a product domain");
    const int off = keep_x ? 0 : dim_x_;
    const int d = keep_x ? dim_x_ : dim_y_;
    if (kind_ == DomainKind::ProductTorus) return torus(d);
    Window w;
    for (int i = 0; i < d; ++i) {
        w.lo.push_back(window_.lo[off + i]);
        w.hi.push_back(window_.hi[off + i]);
    }
    return euclidean(d, std::move(w));
}

std::string DomainDescriptor::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case DomainKind::EuclideanLine: os << "R^" << dim_x_; break;
        case DomainKind::Torus: os << "T^" << dim_x_; break;
        case DomainKind::ProductEuclidean: os << "R^" << dim_x_ << " x R^" << dim_y_; break;
        case DomainKind::ProductTorus: os << "T^" << dim_x_ << " x T^" << dim_y_; break;
    }
    if (!is_torus()) {
        os << " window";
        for (int i = 0; i < total_dim(); ++i)
            os << " [" << axis_lo(i) << "," << axis_hi(i) << ")";
    }
    return os.str();
}

double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

std::string AveragingSet::describe() const {
    std::ostringstream os;
    os << (kind == Kind::Ball ? "Ball(c=(" : "ProductBall(c=(");
    for (std::size_t i = 0; i < center.size(); ++i) os << (i ? "," : "") << center[i];
    os << "), r=" << radius_x;
    if (kind == Kind::ProductBall) os << ", r'=" << radius_y;
    os << ")";
    return os.str();
}

AveragingSet make_ball(const DomainDescriptor& domain, Point center, double radius) {
    if (domain.is_product()) throw DomainMismatchError("Ball sets require a non-product domain");
    if (!(radius > 0)) throw ConfigError("ball radius must be positive");
    if (domain.is_torus() && radius > kTorusRadiusCap)
        throw ConfigError("torus ball radius must be <= 1/2");
    AveragingSet s;
    s.kind = AveragingSet::Kind::Ball;
    s.center = std::move(center);
    s.radius_x = radius;
    const int d = domain.total_dim();
    s.volume = unit_ball_volume(d) * std::pow(radius, d);
    return s;
}

AveragingSet make_product_ball(const DomainDescriptor& domain, Point center, double radius_x,
                               double radius_y) {
    if (!domain.is_product())
        throw DomainMismatchError("ProductBall sets require a product domain");
    if (!(radius_x > 0) || !(radius_y > 0)) throw ConfigError("ball radius must be positive");
    if (domain.is_torus() && (radius_x > kTorusRadiusCap || radius_y > kTorusRadiusCap))
        throw ConfigError("torus ball radius must be <= 1/2");
    AveragingSet s;
    s.kind = AveragingSet::Kind::ProductBall;
    s.center = std::move(center);
    s.radius_x = radius_x;
    s.radius_y = radius_y;
    s.volume = unit_ball_volume(domain.dim_x()) * std::pow(radius_x, domain.dim_x()) *
               unit_ball_volume(domain.dim_y()) * std::pow(radius_y, domain.dim_y());
    return s;
}

std::vector<double> SetFamilySpec::radii(int extra_levels) const {
    if (!(r_min > 0) || !(r_max >= r_min) || radius_count < 1)
        throw ConfigError("invalid radius ladder");
    std::vector<double> rs;
    if (radius_count == 1 || r_max == r_min) {
        rs.push_back(r_min);
    } else {
        const double ratio = std::pow(r_max / r_min, 1.0 / (radius_count - 1));
        for (int i = 0; i < radius_count; ++i) rs.push_back(r_min * std::pow(ratio, i));
    }
    double r = r_min;
    for (int j = 0; j < extra_levels; ++j) {
        r *= 0.5;
        rs.push_back(r);
    }
    std::sort(rs.begin(), rs.end());
    return rs;
}

namespace {

std::vector<double> axis_centers(const DomainDescriptor& domain, int axis, int count,
                                 double radius) {
    if (count < 1) throw ConfigError("center count must be >= 1");
    std::vector<double> cs;
    if (domain.is_torus()) {
        for (int j = 0; j < count; ++j) cs.push_back(wrap01(double(j) / count));
        return cs;
    }
    const double lo = domain.axis_lo(axis), hi = domain.axis_hi(axis);
    if (2 * radius > hi - lo + 1e-12)
        throw ConfigError("radius " + std::to_string(radius) + " exceeds window axis " +
                          std::to_string(axis));
    const double a = lo + radius, b = hi - radius;
    if (count == 1) {
        cs.push_back(0.5 * (a + b));
    } else {
        for (int j = 0; j < count; ++j) cs.push_back(a + (b - a) * j / (count - 1));
    }
    return cs;
}

void cartesian_centers(const DomainDescriptor& domain, const std::vector<int>& counts,
                       int axis_begin, int axis_end, double radius, Point& prefix,
                       std::vector<Point>& out) {
    if (axis_begin == axis_end) {
        out.push_back(prefix);
        return;
    }
    for (double c : axis_centers(domain, axis_begin, counts[axis_begin], radius)) {
        prefix.push_back(c);
        cartesian_centers(domain, counts, axis_begin + 1, axis_end, radius, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::size_t SetFamilySpec::expected_count(const DomainDescriptor& domain,
                                          int extra_levels) const {
    std::size_t centers = 1;
    for (int c : centers_per_axis) centers *= static_cast<std::size_t>(c);
    const std::size_t nr = radii(extra_levels).size();
    return domain.is_product() ? centers * nr * nr : centers * nr;
}

EnumeratedFamily enumerate_sets(const SetFamilySpec& family, const DomainDescriptor& domain,
                                int extra_levels) {
    if (static_cast<int>(family.centers_per_axis.size()) != domain.total_dim())
        throw DomainMismatchError("centers_per_axis does not match the domain dimension");
    EnumeratedFamily out;
    std::vector<double> rs = family.radii(extra_levels);
    if (domain.is_torus()) {
        for (double& r : rs) {
            if (r > kTorusRadiusCap) {
                r = kTorusRadiusCap;
                out.torus_radius_capped = true;
            }
        }
        std::sort(rs.begin(), rs.end());
        rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    }

    if (!domain.is_product()) {
        for (double r : rs) {
            std::vector<Point> centers;
            Point prefix;
            cartesian_centers(domain, family.centers_per_axis, 0, domain.total_dim(), r, prefix,
                              centers);
            for (auto& c : centers) out.sets.push_back(make_ball(domain, c, r));
        }
        return out;
    }

    const int m = domain.dim_x();
    for (double rx : rs) {
        for (double ry : rs) {
            std::vector<Point> xs, ys;
            {
                Point prefix;
                cartesian_centers(domain, family.centers_per_axis, 0, m, rx, prefix, xs);
            }
            {
                Point prefix;
                cartesian_centers(domain, family.centers_per_axis, m, domain.total_dim(), ry,
                                  prefix, ys);
            }
            for (const auto& cx : xs) {
                for (const auto& cy : ys) {
                    Point c = cx;
                    c.insert(c.end(), cy.begin(), cy.end());
                    out.sets.push_back(make_product_ball(domain, c, rx, ry));
                }
            }
        }
    }
    return out;
}

double holder_conjugate(double p) {
    if (!(p > 1.0)) throw std::domain_error("holder_conjugate requires p > 1");
    return p / (p - 1.0);
}

double SampleGrid::total_weight() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
}

// ---------------------------------------------------------------------------
// meshes

namespace {

// Geometric meshes never produce cells narrower than this; narrower cells
// would place samples inside the eigenvalue floor of the weight calculus.
constexpr double kMinCellWidth = 1e-11;

// Geometric mesh on [a,b]: widths w0 * sigma^i toward the graded endpoint.
// The innermost cell is marked singular-adjacent.
void geometric_cells(double a, double b, int count, double sigma, bool toward_left,
                     std::vector<AxisCell>& out) {
    sigma = std::max(sigma, 1.0 + 1e-12);
    const double len = b - a;
    double w0 = len * (sigma - 1.0) / (std::pow(sigma, count) - 1.0);
    if (w0 < kMinCellWidth) {
        const double arg = len * (sigma - 1.0) / kMinCellWidth + 1.0;
        count = std::max(2, static_cast<int>(std::floor(std::log(arg) / std::log(sigma))));
        w0 = len * (sigma - 1.0) / (std::pow(sigma, count) - 1.0);
    }
    std::vector<AxisCell> cells;
    double x = toward_left ? a : b;
    double w = w0;
    const int side = toward_left ? -1 : +1;
    for (int i = 0; i < count; ++i) {
        if (toward_left) {
            const double x1 = (i == count - 1) ? b : x + w;
            cells.push_back({0.5 * (x + x1), x1 - x, side, x - a});
            x = x1;
        } else {
            const double x0 = (i == count - 1) ? a : x - w;
            cells.push_back({0.5 * (x0 + x), x - x0, side, b - x});
            x = x0;
        }
        w *= sigma;
    }
    if (!toward_left) std::reverse(cells.begin(), cells.end());
    out.insert(out.end(), cells.begin(), cells.end());
}

// Mesh on [a,b] with boundaries at geometric distances from a singular
// coordinate s outside the interval, so cell widths track the distance to
// the singularity; near-uniform when s is far away.
void distance_cells(double a, double b, double s, int count, std::vector<AxisCell>& out) {
    const bool left = s <= a;
    const double d0 = left ? (a - s) : (s - b);
    const double d1 = left ? (b - s) : (s - a);
    const double rho = std::pow(d1 / d0, 1.0 / count);
    std::vector<AxisCell> cells;
    double prev = left ? a : b;
    for (int i = 1; i <= count; ++i) {
        double x = left ? s + d0 * std::pow(rho, i) : s - d0 * std::pow(rho, i);
        if (i == count) x = left ? b : a;
        cells.push_back({0.5 * (prev + x), std::abs(x - prev), 0, 0.0});
        prev = x;
    }
    if (!left) std::reverse(cells.begin(), cells.end());
    out.insert(out.end(), cells.begin(), cells.end());
}

void uniform_cells(double a, double b, int count, std::vector<AxisCell>& out) {
    const double h = (b - a) / count;
    for (int i = 0; i < count; ++i) out.push_back({a + (i + 0.5) * h, h, 0, 0.0});
}

// Mesh graded toward a single singular coordinate at or beyond an endpoint.
void segment_cells(double a, double b, double s, int count, double sigma,
                   std::vector<AxisCell>& out) {
    const double tol = 1e-14 * std::max(1.0, std::abs(b - a));
    if (std::abs(s - a) <= tol)
        geometric_cells(a, b, count, sigma, true, out);
    else if (std::abs(s - b) <= tol)
        geometric_cells(a, b, count, sigma, false, out);
    else
        distance_cells(a, b, s, count, out);
}

}  // namespace

std::vector<AxisCell> axis_cells(double a, double b, int count, double grading_ratio,
                                 const std::vector<double>& singular_coords) {
    if (!(b > a)) throw ConfigError("axis interval must have positive length");
    if (count < 2) throw ConfigError("axis sample count must be >= 2");
    std::vector<AxisCell> out;
    out.reserve(count);

    std::vector<double> inside, outside;
    for (double s : singular_coords) {
        if (s > a + 1e-14 && s < b - 1e-14)
            inside.push_back(s);
        else
            outside.push_back(s);
    }
    std::sort(inside.begin(), inside.end());
    inside.erase(std::unique(inside.begin(), inside.end()), inside.end());

    if (inside.empty()) {
        if (outside.empty()) {
            uniform_cells(a, b, count, out);
            return out;
        }
        double s_near = outside[0];
        auto edge_dist = [&](double s) { return std::min(std::abs(s - a), std::abs(s - b)); };
        for (double s : outside)
            if (edge_dist(s) < edge_dist(s_near)) s_near = s;
        segment_cells(a, b, s_near, count, grading_ratio, out);
        return out;
    }

    // split at interior singular coordinates; grade each segment toward its
    // singular endpoint (both singular: split at the midpoint)
    std::vector<double> bounds;
    bounds.push_back(a);
    bounds.insert(bounds.end(), inside.begin(), inside.end());
    bounds.push_back(b);
    const int segments = static_cast<int>(bounds.size()) - 1;
    const int per = std::max(4, count / (2 * segments));
    for (int i = 0; i < segments; ++i) {
        const double lo = bounds[i], hi = bounds[i + 1];
        const bool left_singular = i > 0;
        const bool right_singular = i < segments - 1;
        if (left_singular && right_singular) {
            const double mid = 0.5 * (lo + hi);
            geometric_cells(lo, mid, per, grading_ratio, true, out);
            geometric_cells(mid, hi, per, grading_ratio, false, out);
        } else if (left_singular) {
            geometric_cells(lo, hi, 2 * per, grading_ratio, true, out);
        } else {
            geometric_cells(lo, hi, 2 * per, grading_ratio, false, out);
        }
    }
    return out;
}

namespace {

struct AxisMesh {
    std::vector<double> points;
    std::vector<double> weights;
};

double nearest_singular_distance(double x, const std::vector<double>& singular, bool torus) {
    double best = std::numeric_limits<double>::infinity();
    for (double s : singular) {
        double d = std::abs(x - s);
        if (torus) d = std::min(wrap01(x - s), wrap01(s - x));
        best = std::min(best, d);
    }
    return best;
}

// Endpoint rule for the innermost graded cell: nodes at fixed fractions of
// the cell from the singular edge, weights exact for 1, x^(1/2), x^(-1/2)
// and x on the unit cell. Exact for the half-power entries of the built-in
// weights; a few percent of the (tiny) cell mass for other exponents.
constexpr double kEndpointNode[4] = {0.125, 1.0 / 3.0, 0.625, 0.9375};

const std::array<double, 4>& endpoint_rule_weights() {
    static const std::array<double, 4> weights = [] {
        Eigen::Matrix4d v;
        Eigen::Vector4d m;
        const double expo[4] = {-0.5, 0.0, 0.5, 1.0};
        const double moments[4] = {2.0, 1.0, 2.0 / 3.0, 0.5};
        for (int r = 0; r < 4; ++r) {
            m[r] = moments[r];
            for (int c = 0; c < 4; ++c) v(r, c) = std::pow(kEndpointNode[c], expo[r]);
        }
        const Eigen::Vector4d a = v.fullPivLu().solve(m);
        return std::array<double, 4>{a[0], a[1], a[2], a[3]};
    }();
    return weights;
}

AxisMesh euclidean_axis_mesh(double a, double b, int count, double sigma,
                             const std::vector<double>& singular,
                             bool endpoint_rule = false) {
    AxisMesh m;
    const auto& ew = endpoint_rule_weights();
    for (const AxisCell& c : axis_cells(a, b, count, sigma, singular)) {
        const bool near_singular = c.graded_side != 0 && c.width > 0.02 * c.offset;
        if (endpoint_rule && near_singular && c.offset == 0.0) {
            const bool left = c.graded_side < 0;
            const double edge = left ? c.mid - 0.5 * c.width : c.mid + 0.5 * c.width;
            const double dir = left ? 1.0 : -1.0;
            for (int k = 0; k < 4; ++k) {
                const int kk = left ? k : 3 - k;  // ascending positions
                m.points.push_back(edge + dir * kEndpointNode[kk] * c.width);
                m.weights.push_back(c.width * ew[kk]);
            }
        } else if (endpoint_rule && near_singular) {
            // two-point rule exact for 1 and dist^{-1/2}: width-floored cells
            // near the singularity are wide relative to their offset, where
            // the midpoint value underestimates inverse-root integrands
            const bool left = c.graded_side < 0;
            const double dir = left ? 1.0 : -1.0;
            const double s = left ? c.mid - 0.5 * c.width - c.offset
                                  : c.mid + 0.5 * c.width + c.offset;
            const double x1 = c.offset + c.width / 3.0;
            const double x2 = c.offset + 2.0 * c.width / 3.0;
            const double m0 = c.width;
            const double mh = 2.0 * (std::sqrt(c.offset + c.width) - std::sqrt(c.offset));
            const double r1 = 1.0 / std::sqrt(x1), r2 = 1.0 / std::sqrt(x2);
            const double wa = (mh - m0 * r2) / (r1 - r2);
            const double wb = m0 - wa;
            m.points.push_back(s + dir * (left ? x1 : x2));
            m.weights.push_back(left ? wa : wb);
            m.points.push_back(s + dir * (left ? x2 : x1));
            m.weights.push_back(left ? wb : wa);
        } else {
            m.points.push_back(c.mid);
            m.weights.push_back(c.width);
        }
    }
    return m;
}

AxisMesh torus_axis_mesh(int count, const std::vector<double>& singular) {
    AxisMesh m;
    double offset = 0.0;
    const double h = 1.0 / count;
    for (double s : singular) {
        const double frac = wrap01(s) / h;
        if (std::abs(frac - std::round(frac)) < 0.25) {
            offset = 0.5;
            break;
        }
    }
    for (int k = 0; k < count; ++k) {
        const double x = wrap01((k + offset) * h);
        if (nearest_singular_distance(x, singular, true) < 1e-12)
            throw SingularPointError("torus lattice cannot avoid a declared singular point");
        m.points.push_back(x);
        m.weights.push_back(h);
    }
    return m;
}

SampleGrid tensor_grid(const std::vector<AxisMesh>& axes,
                       const std::vector<std::vector<double>>& axis_singular, bool torus) {
    SampleGrid g;
    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.points.size();
    g.points.reserve(total);
    g.weights.reserve(total);
    for (const auto& ax : axes) g.axis_points.push_back(ax.points);

    const int d = static_cast<int>(axes.size());
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Point p(d);
        double w = 1.0;
        for (int i = 0; i < d; ++i) {
            p[i] = axes[i].points[idx[i]];
            w *= axes[i].weights[idx[i]];
        }
        g.points.push_back(std::move(p));
        g.weights.push_back(w);
        for (int i = d - 1; i >= 0; --i) {  // last axis fastest
            if (++idx[i] < axes[i].points.size()) break;
            idx[i] = 0;
        }
    }
    for (int i = 0; i < d && i < static_cast<int>(axis_singular.size()); ++i) {
        if (axis_singular[i].empty()) continue;
        for (double x : axes[i].points)
            g.min_singular_distance = std::min(
                g.min_singular_distance, nearest_singular_distance(x, axis_singular[i], torus));
    }
    return g;
}

std::vector<std::vector<double>> per_axis_coords(const std::vector<Point>& points, int d) {
    std::vector<std::vector<double>> out(d);
    for (const auto& p : points)
        for (int i = 0; i < d && i < static_cast<int>(p.size()); ++i) out[i].push_back(p[i]);
    return out;
}

// Nearest mod-1 representatives of singular coordinates inside [a,b].
std::vector<double> unwrap_singular(const std::vector<double>& singular, double a, double b,
                                    bool torus) {
    if (!torus) return singular;
    std::vector<double> out;
    const double mid = 0.5 * (a + b);
    for (double s : singular) out.push_back(s + std::round(mid - s));
    return out;
}

// Local quadrature for one d-dimensional ball factor. Points carry local
// coordinates for axes [axis_offset, axis_offset + d).
SampleGrid ball_quadrature(const DomainDescriptor& domain, const Point& center, double radius,
                           int axis_offset, int d, const QuadSpec& quad,
                           const std::vector<std::vector<double>>& axis_singular,
                           double target_volume) {
    const bool torus = domain.is_torus();
    std::vector<AxisMesh> axes;
    std::vector<std::vector<double>> local_singular(d);
    for (int i = 0; i < d; ++i) {
        const double a = center[axis_offset + i] - radius;
        const double b = center[axis_offset + i] + radius;
        std::vector<double> sing;
        if (axis_offset + i < static_cast<int>(axis_singular.size()))
            sing = unwrap_singular(axis_singular[axis_offset + i], a, b, torus);
        local_singular[i] = sing;
        // Gauss boundary refinement only where points are cell midpoints
        // (d >= 2 cell-fraction correction assumes one point per cell).
        axes.push_back(euclidean_axis_mesh(a, b, quad.points_per_axis, quad.grading_ratio, sing,
                                           quad.singular_endpoint_rule && d == 1));
    }

    SampleGrid g;
    if (d == 1) {
        g = tensor_grid(axes, local_singular, false);
    } else {
        // product mesh restricted to the ball: per-cell inside fraction by
        // subsampling, then normalized to the analytic volume
        SampleGrid full = tensor_grid(axes, local_singular, false);
        const int ns = std::max(1, quad.ball_subsamples);
        int totalsub = 1;
        for (int i = 0; i < d; ++i) totalsub *= ns;
        std::vector<std::size_t> sizes(d);
        for (int i = 0; i < d; ++i) sizes[i] = axes[i].points.size();

        std::vector<Point> pts;
        std::vector<double> ws;
        double sumw = 0.0;
        for (std::size_t flat = 0; flat < full.points.size(); ++flat) {
            std::size_t rem = flat;
            std::vector<std::size_t> idx(d);
            for (int i = d - 1; i >= 0; --i) {
                idx[i] = rem % sizes[i];
                rem /= sizes[i];
            }
            const Point& mid = full.points[flat];
            int inside = 0;
            for (int s = 0; s < totalsub; ++s) {
                int r = s;
                double dist2 = 0.0;
                for (int i = 0; i < d; ++i) {
                    const int k = r % ns;
                    r /= ns;
                    const double w = axes[i].weights[idx[i]];
                    const double x = mid[i] - 0.5 * w + (k + 0.5) * w / ns;
                    const double dx = x - center[axis_offset + i];
                    dist2 += dx * dx;
                }
                if (dist2 <= radius * radius) ++inside;
            }
            if (inside == 0) continue;
            pts.push_back(mid);
            ws.push_back(full.weights[flat] * inside / totalsub);
            sumw += ws.back();
        }
        const double scale = target_volume / sumw;
        for (double& w : ws) w *= scale;
        g.points = std::move(pts);
        g.weights = std::move(ws);
        g.min_singular_distance = full.min_singular_distance;
    }

    if (torus) {
        for (auto& p : g.points)
            for (int i = 0; i < d; ++i) p[i] = wrap01(p[i]);
        g.axis_points.clear();
    }
    return g;
}

}  // namespace

SampleGrid set_quadrature(const DomainDescriptor& domain, const AveragingSet& set,
                          const QuadSpec& quad,
                          const std::vector<std::vector<double>>& axis_singular) {
    if (set.kind == AveragingSet::Kind::Ball) {
        if (domain.is_product())
            throw DomainMismatchError("Ball quadrature on a product domain");
        return ball_quadrature(domain, set.center, set.radius_x, 0, domain.total_dim(), quad,
                               axis_singular, set.volume);
    }
    if (!domain.is_product())
        throw DomainMismatchError("ProductBall quadrature on a non-product domain");

    const int m = domain.dim_x(), n = domain.dim_y();
    const double vx = unit_ball_volume(m) * std::pow(set.radius_x, m);
    const double vy = unit_ball_volume(n) * std::pow(set.radius_y, n);
    SampleGrid gx = ball_quadrature(domain, set.center, set.radius_x, 0, m, quad, axis_singular, vx);
    SampleGrid gy =
        ball_quadrature(domain, set.center, set.radius_y, m, n, quad, axis_singular, vy);

    SampleGrid g;
    g.min_singular_distance = std::min(gx.min_singular_distance, gy.min_singular_distance);
    g.points.reserve(gx.size() * gy.size());
    g.weights.reserve(gx.size() * gy.size());
    for (std::size_t i = 0; i < gx.size(); ++i) {
        for (std::size_t j = 0; j < gy.size(); ++j) {
            Point p;
            p.reserve(m + n);
            p.insert(p.end(), gx.points[i].begin(), gx.points[i].end());
            p.insert(p.end(), gy.points[j].begin(), gy.points[j].end());
            g.points.push_back(std::move(p));
            g.weights.push_back(gx.weights[i] * gy.weights[j]);
        }
    }
    return g;
}

SampleGrid build_grid(const DomainDescriptor& domain, const GridSpec& spec) {
    const int d = domain.total_dim();
    if (static_cast<int>(spec.counts.size()) != d)
        throw ConfigError("grid counts do not match the domain dimension");
    for (int c : spec.counts)
        if (c < 2) throw ConfigError("grid counts must be >= 2 per axis");
    for (const auto& s : spec.singular_points) {
        if (static_cast<int>(s.size()) != d)
            throw ConfigError("singular point has wrong dimension");
        if (!domain.is_torus()) {
            for (int i = 0; i < d; ++i)
                if (s[i] < domain.axis_lo(i) - 1e-12 || s[i] > domain.axis_hi(i) + 1e-12)
                    throw SingularPointError("declared singular point lies outside the window");
        }
    }

    auto axis_singular = per_axis_coords(spec.singular_points, d);
    for (int i = 0; i < d && i < static_cast<int>(spec.axis_singular.size()); ++i)
        axis_singular[i].insert(axis_singular[i].end(), spec.axis_singular[i].begin(),
                                spec.axis_singular[i].end());
    std::vector<AxisMesh> axes;
    for (int i = 0; i < d; ++i) {
        if (domain.is_torus())
            axes.push_back(torus_axis_mesh(spec.counts[i], axis_singular[i]));
        else
            axes.push_back(euclidean_axis_mesh(domain.axis_lo(i), domain.axis_hi(i),
                                               spec.counts[i], spec.grading_ratio,
                                               axis_singular[i]));
    }
    return tensor_grid(axes, axis_singular, domain.is_torus());
}

}  // namespace mw
