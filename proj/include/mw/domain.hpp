#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace mw {

using Point = std::vector<double>;

enum class DomainKind { EuclideanLine, Torus, ProductEuclidean, ProductTorus };

/// Computational window for Euclidean axes: half-open [lo, hi) per axis.
/// Torus axes are always the normalized circle [0, 1).
struct Window {
    std::vector<double> lo;
    std::vector<double> hi;
};

/// The domain D: a line/torus of dimension d, or a product of two factors
/// of dimensions m and n. Every Euclidean kind carries a finite window; all
/// suprema are taken over sets inside it and reports state the window.
class DomainDescriptor {
public:
    static DomainDescriptor euclidean(int d, Window window);
    static DomainDescriptor torus(int d);
    static DomainDescriptor product_euclidean(int m, int n, Window window);
    static DomainDescriptor product_torus(int m, int n);

    DomainKind kind() const { return kind_; }
    bool is_product() const {
        return kind_ == DomainKind::ProductEuclidean || kind_ == DomainKind::ProductTorus;
    }
    bool is_torus() const {
        return kind_ == DomainKind::Torus || kind_ == DomainKind::ProductTorus;
    }
    /// Dimension of the x-factor (the full dimension for non-product kinds).
    int dim_x() const { return dim_x_; }
    /// Dimension of the y-factor (0 for non-product kinds).
    int dim_y() const { return dim_y_; }
    int total_dim() const { return dim_x_ + dim_y_; }

    double axis_lo(int axis) const;
    double axis_hi(int axis) const;
    const Window& window() const { return window_; }
    double window_volume() const;

    bool contains(const Point& t) const;
    /// Signed separation on one axis, torus-wrapped for torus kinds.
    double axis_distance(int axis, double a, double b) const;

    /// The factor domain obtained by keeping only the x- or y-factor axes.
    DomainDescriptor factor(bool keep_x) const;

    std::string describe() const;

private:
    DomainDescriptor(DomainKind kind, int m, int n, Window w)
        : kind_(kind), dim_x_(m), dim_y_(n), window_(std::move(w)) {}

    DomainKind kind_;
    int dim_x_;
    int dim_y_;
    Window window_;
};

/// One averaging set E from the family S_D: a ball (interval in d=1) or a
/// product of two balls on product domains. Volume is cached analytically.
struct AveragingSet {
    enum class Kind { Ball, ProductBall };

    Kind kind = Kind::Ball;
    Point center;          // full-domain coordinates
    double radius_x = 0.0; // ball radius (x-factor radius for ProductBall)
    double radius_y = 0.0; // y-factor radius (ProductBall only)
    double volume = 0.0;

    std::string describe() const;
};

/// Euclidean unit-ball volume in dimension d (interval length 2 for d=1).
double unit_ball_volume(int d);

/// Builds a Ball set with its analytic volume; validates radius and kind.
AveragingSet make_ball(const DomainDescriptor& domain, Point center, double radius);
AveragingSet make_product_ball(const DomainDescriptor& domain, Point center, double radius_x,
                               double radius_y);

/// Deterministic family of averaging sets: a per-axis center lattice and a
/// geometric (log-spaced) radius ladder. On product domains the ladder is
/// applied per factor and paired cartesianly.
struct SetFamilySpec {
    std::vector<int> centers_per_axis;  // one entry per full-domain axis
    double r_min = 0.05;
    double r_max = 0.4;
    int radius_count = 4;

    /// The geometric ladder, optionally extended downward by `extra_levels`
    /// halvings of r_min (the base ladder stays a subset, so refined
    /// families are supersets of coarser ones).
    std::vector<double> radii(int extra_levels = 0) const;

    std::size_t expected_count(const DomainDescriptor& domain, int extra_levels = 0) const;
};

/// Enumerates the family. Deterministic: identical specs yield identical
/// sequences. Torus radii above 1/2 are capped (reported via the flag).
struct EnumeratedFamily {
    std::vector<AveragingSet> sets;
    bool torus_radius_capped = false;
};

EnumeratedFamily enumerate_sets(const SetFamilySpec& family, const DomainDescriptor& domain,
                                int extra_levels = 0);

/// The Hoelder conjugate q of p: 1/p + 1/q = 1. Throws std::domain_error
/// for p <= 1.
double holder_conjugate(double p);

/// Exponent pair (p, q) with q = p's Hoelder conjugate.
class LebesgueExponent {
public:
    explicit LebesgueExponent(double p) : p_(p), q_(holder_conjugate(p)) {}
    double p() const { return p_; }
    double q() const { return q_; }
    LebesgueExponent conjugate() const { return LebesgueExponent(q_); }

private:
    double p_;
    double q_;
};

/// Sampling grid: points with quadrature weights (composite midpoint;
/// geometrically graded toward declared singular coordinates). Weights sum
/// to the covered volume.
struct SampleGrid {
    std::vector<Point> points;
    std::vector<double> weights;
    std::vector<std::vector<double>> axis_points;  // tensor structure, row-major (last axis fastest)
    double min_singular_distance = std::numeric_limits<double>::infinity();

    std::size_t size() const { return points.size(); }
    double total_weight() const;
};

/// Grid request for a whole-window grid: per-axis counts plus optional
/// singular points the mesh must grade toward (and never sample).
/// `axis_singular` declares singular coordinates per axis directly (the form
/// weights carry); both declarations are merged.
struct GridSpec {
    std::vector<int> counts;
    std::vector<Point> singular_points;
    std::vector<std::vector<double>> axis_singular;
    double grading_ratio = 1.05;
};

SampleGrid build_grid(const DomainDescriptor& domain, const GridSpec& spec);

/// Resolution for set-local quadratures. Cells adjacent to a graded
/// singular endpoint are integrated with a 4-point rule exact on
/// span{1, x^(-1/2), x^(1/2), x} relative to the singular edge: the midpoint
/// value on the innermost cell otherwise dominates the error of every
/// singular average, and cell widths there are floored by the eigenvalue
/// floor of the weight calculus.
struct QuadSpec {
    int points_per_axis = 600;
    double grading_ratio = 1.01;
    int ball_subsamples = 4;  // cell-fraction subsampling for d>=2 balls
    bool singular_endpoint_rule = true;
};

/// Local quadrature over an averaging set, graded toward the declared
/// per-axis singular coordinates. Integrating 1 returns |E| within 1e-10
/// relative (d>=2 ball weights are normalized to the analytic volume).
SampleGrid set_quadrature(const DomainDescriptor& domain, const AveragingSet& set,
                          const QuadSpec& quad,
                          const std::vector<std::vector<double>>& axis_singular = {});

/// 1-D composite-midpoint cells on [a, b], graded toward the singular
/// coordinates. Exposed for tests of the mesh geometry.
/// Cells of a geometric run graded toward a singular endpoint carry the side
/// of that endpoint (-1: singular at the left end of the run, +1: right) and
/// their offset from it; geometric cell widths never shrink below an
/// absolute floor so that samples stay clear of the eigenvalue floor of the
/// weight calculus.
struct AxisCell {
    double mid;
    double width;
    int graded_side = 0;
    double offset = 0.0;  // distance from the singular endpoint to the near edge
};
std::vector<AxisCell> axis_cells(double a, double b, int count, double grading_ratio,
                                 const std::vector<double>& singular_coords);

}  // namespace mw
