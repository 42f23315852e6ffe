#include "mw/weight.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mw/errors.hpp"

namespace mw {

using nlohmann::json;

namespace {

std::string point_str(const Point& t) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
    os << ")";
    return os.str();
}

// Euclidean norm of a coordinate block, torus-wrapped per axis when needed.
double block_norm(const DomainDescriptor& domain, const Point& t, int begin, int count,
                  const Point* center = nullptr) {
    double s = 0;
    for (int i = 0; i < count; ++i) {
        const double c = center ? (*center)[i] : 0.0;
        const double d = domain.axis_distance(begin + i, t[begin + i], c);
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

MatrixWeight::MatrixWeight(DomainDescriptor domain, int n, std::string name, Evaluator evaluator,
                           std::vector<std::vector<double>> axis_singular,
                           SingularPredicate is_singular, bool restrict_to_window)
    : domain_(std::move(domain)),
      n_(n),
      name_(std::move(name)),
      evaluator_(std::move(evaluator)),
      axis_singular_(std::move(axis_singular)),
      is_singular_(std::move(is_singular)),
      restrict_to_window_(restrict_to_window) {
    if (n_ < 1) throw ConfigError("matrix weight dimension must be >= 1");
    axis_singular_.resize(domain_.total_dim());
}

bool MatrixWeight::is_singular_point(const Point& t) const {
    return is_singular_ && is_singular_(t);
}

HermitianMatrix MatrixWeight::evaluate(const Point& t) const {
    if (static_cast<int>(t.size()) != domain_.total_dim())
        throw ShapeMismatchError("point dimension does not match the weight's domain");
    if (is_singular_point(t))
        throw SingularPointError("weight " + name_ + " evaluated at declared singular point " +
                                 point_str(t));
    if (restrict_to_window_ && !domain_.contains(t))
        throw DomainMismatchError("tabulated weight evaluated outside its window at " +
                                  point_str(t));
    HermitianMatrix h(evaluator_(t));
    const RVector ev = h.eigenvalues();
    const double lmin = ev.minCoeff();
    const double lmax = ev.cwiseAbs().maxCoeff();
    if (!(lmin > kEigenvalueFloor * lmax)) {
        std::ostringstream os;
        os << "degenerate sample of weight " << name_ << " at " << point_str(t)
           << ": min eigenvalue " << lmin;
        throw DegenerateSampleError(os.str(), t, lmin);
    }
    return h;
}

Eigensystem MatrixWeight::eigensystem_at(const Point& t) const {
    if (static_cast<int>(t.size()) != domain_.total_dim())
        throw ShapeMismatchError("point dimension does not match the weight's domain");
    if (is_singular_point(t))
        throw SingularPointError("weight " + name_ + " evaluated at declared singular point " +
                                 point_str(t));
    if (restrict_to_window_ && !domain_.contains(t))
        throw DomainMismatchError("tabulated weight evaluated outside its window at " +
                                  point_str(t));
    Eigensystem es = hermitian_eigensystem(HermitianMatrix(evaluator_(t)));
    const double lmin = es.values.minCoeff();
    const double lmax = es.values.cwiseAbs().maxCoeff();
    if (!(lmin > kEigenvalueFloor * lmax)) {
        std::ostringstream os;
        os << "degenerate sample of weight " << name_ << " at " << point_str(t)
           << ": min eigenvalue " << lmin;
        throw DegenerateSampleError(os.str(), t, lmin);
    }
    return es;
}

HermitianMatrix MatrixWeight::power_at(const Point& t, double s) const {
    return fractional_power(eigensystem_at(t), s);
}

Complex MatrixWeight::entry_of_power_at(const Point& t, double s, int i, int j) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_)
        throw ShapeMismatchError("entry index out of range");
    return power_at(t, s).entry(i, j);
}

MatrixWeight weight_power(const MatrixWeight& base, double s) {
    auto base_copy = std::make_shared<MatrixWeight>(base);
    std::ostringstream name;
    name << base.name() << "^(" << s << ")";
    return MatrixWeight(
        base.domain(), base.dim(), name.str(),
        [base_copy, s](const Point& t) { return base_copy->power_at(t, s).matrix(); },
        base.axis_singular(),
        [base_copy](const Point& t) { return base_copy->is_singular_point(t); });
}

// ---------------------------------------------------------------------------
// scalar weights

ScalarWeight::ScalarWeight(DomainDescriptor domain, std::string name, Evaluator evaluator,
                           std::vector<std::vector<double>> axis_singular,
                           SingularPredicate is_singular)
    : domain_(std::move(domain)),
      name_(std::move(name)),
      evaluator_(std::move(evaluator)),
      axis_singular_(std::move(axis_singular)),
      is_singular_(std::move(is_singular)) {
    axis_singular_.resize(domain_.total_dim());
}

bool ScalarWeight::is_singular_point(const Point& t) const {
    return is_singular_ && is_singular_(t);
}

double ScalarWeight::evaluate(const Point& t) const {
    if (is_singular_point(t))
        throw SingularPointError("scalar weight " + name_ +
                                 " evaluated at declared singular point " + point_str(t));
    const double v = evaluator_(t);
    if (!(v > 0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << "degenerate sample of scalar weight " << name_ << " at " << point_str(t) << ": "
           << v;
        throw DegenerateSampleError(os.str(), t, v);
    }
    return v;
}

ScalarWeight constant_scalar_weight(const DomainDescriptor& domain, double value) {
    if (!(value > 0)) throw ConfigError("constant scalar weight must be positive");
    return ScalarWeight(domain, "constant", [value](const Point&) { return value; });
}

ScalarWeight diagonal_entry_weight(const MatrixWeight& w, int k) {
    if (k < 0 || k >= w.dim()) throw ShapeMismatchError("diagonal index out of range");
    auto base = std::make_shared<MatrixWeight>(w);
    std::ostringstream name;
    name << "w_" << (k + 1) << (k + 1) << "[" << w.name() << "]";
    return ScalarWeight(
        w.domain(), name.str(),
        [base, k](const Point& t) { return base->evaluate(t).entry(k, k).real(); },
        w.axis_singular(), [base](const Point& t) { return base->is_singular_point(t); });
}

ScalarWeight entry_power_weight(const MatrixWeight& w, double s, int k, double outer) {
    if (k < 0 || k >= w.dim()) throw ShapeMismatchError("diagonal index out of range");
    auto base = std::make_shared<MatrixWeight>(w);
    std::ostringstream name;
    name << "(w_" << (k + 1) << (k + 1) << "^(" << s << "))^" << outer << "[" << w.name() << "]";
    return ScalarWeight(
        w.domain(), name.str(),
        [base, s, k, outer](const Point& t) {
            const double e = base->entry_of_power_at(t, s, k, k).real();
            return std::pow(e, outer);
        },
        w.axis_singular(), [base](const Point& t) { return base->is_singular_point(t); });
}

MatrixWeight as_matrix_weight(const ScalarWeight& w) {
    auto base = std::make_shared<ScalarWeight>(w);
    return MatrixWeight(
        w.domain(), 1, w.name(),
        [base](const Point& t) {
            CMatrix m(1, 1);
            m(0, 0) = base->evaluate(t);
            return m;
        },
        w.axis_singular(), [base](const Point& t) { return base->is_singular_point(t); });
}

// ---------------------------------------------------------------------------
// catalog

namespace {

double require_number(const json& params, const std::string& key) {
    if (!params.contains(key) || !params[key].is_number())
        throw ConfigError("catalog weight parameter '" + key + "' missing or not a number");
    return params[key].get<double>();
}

std::vector<double> require_vector(const json& params, const std::string& key) {
    if (!params.contains(key) || !params[key].is_array())
        throw ConfigError("catalog weight parameter '" + key + "' missing or not an array");
    std::vector<double> v;
    for (const auto& e : params[key]) {
        if (!e.is_number()) throw ConfigError("catalog weight parameter '" + key + "' must hold numbers");
        v.push_back(e.get<double>());
    }
    if (v.empty()) throw ConfigError("catalog weight parameter '" + key + "' must be non-empty");
    return v;
}

std::vector<std::vector<double>> origin_axis_singular(int d) {
    return std::vector<std::vector<double>>(d, std::vector<double>{0.0});
}

MatrixWeight make_identity(const json& params, const DomainDescriptor& domain) {
    const int n = params.contains("n") ? params["n"].get<int>() : 2;
    if (n < 1 || n > 16) throw ConfigError("identity weight: n must be in [1, 16]");
    return MatrixWeight(domain, n, "identity",
                        [n](const Point&) { return CMatrix(CMatrix::Identity(n, n)); });
}

MatrixWeight make_diag_power(const json& params, const DomainDescriptor& domain) {
    const std::vector<double> alpha = require_vector(params, "alpha");
    if (domain.is_product())
        throw ConfigError("diag_power requires a non-product domain (use product_diag_power)");
    const int n = static_cast<int>(alpha.size());
    const int d = domain.total_dim();
    const bool any = std::any_of(alpha.begin(), alpha.end(), [](double a) { return a != 0.0; });
    DomainDescriptor dom = domain;
    return MatrixWeight(
        domain, n, "diag_power",
        [alpha, n, d, dom](const Point& t) {
            const double r = block_norm(dom, t, 0, d);
            CMatrix m = CMatrix::Zero(n, n);
            for (int k = 0; k < n; ++k) m(k, k) = std::pow(r, alpha[k]);
            return m;
        },
        any ? origin_axis_singular(d) : std::vector<std::vector<double>>{},
        any ? MatrixWeight::SingularPredicate([dom, d](const Point& t) {
            return block_norm(dom, t, 0, d) == 0.0;
        })
            : MatrixWeight::SingularPredicate());
}

MatrixWeight make_scalar_power(const json& params, const DomainDescriptor& domain) {
    const double alpha = require_number(params, "alpha");
    if (domain.is_product()) throw ConfigError("scalar_power requires a non-product domain");
    const int d = domain.total_dim();
    Point center(d, 0.0);
    if (params.contains("center")) {
        if (params["center"].is_number()) {
            center.assign(d, params["center"].get<double>());
        } else {
            const auto c = require_vector(params, "center");
            if (static_cast<int>(c.size()) != d)
                throw ConfigError("scalar_power: center has wrong dimension");
            center = c;
        }
    }
    std::vector<std::vector<double>> axis_sing;
    if (alpha != 0.0)
        for (double c : center) axis_sing.push_back({c});
    DomainDescriptor dom = domain;
    return MatrixWeight(
        domain, 1, "scalar_power",
        [alpha, center, d, dom](const Point& t) {
            const double r = block_norm(dom, t, 0, d, &center);
            CMatrix m(1, 1);
            m(0, 0) = std::pow(r, alpha);
            return m;
        },
        axis_sing,
        alpha != 0.0 ? MatrixWeight::SingularPredicate([dom, center, d](const Point& t) {
            return block_norm(dom, t, 0, d, &center) == 0.0;
        })
                     : MatrixWeight::SingularPredicate());
}

MatrixWeight make_paper_example(const DomainDescriptor& domain) {
    if (domain.is_product() || domain.is_torus() || domain.total_dim() != 1)
        throw ConfigError("paper_example lives on a one-dimensional Euclidean domain");
    if (domain.axis_lo(0) < 0.0 || domain.axis_hi(0) > 1.0 + 1e-12)
        throw ConfigError("paper_example window must lie inside [0, 1]");
    return MatrixWeight(
        domain, 2, "paper_example",
        [](const Point& t) {
            const double x = t[0];
            const double rt = std::sqrt(x);
            const double irt = 1.0 / rt;
            CMatrix m(2, 2);
            m(0, 0) = rt + irt;
            m(0, 1) = Complex(0.0, irt);
            m(1, 0) = Complex(0.0, -irt);
            m(1, 1) = irt;
            return m;
        },
        {{0.0}}, [](const Point& t) { return t[0] <= 0.0; });
}

MatrixWeight make_rotated_power(const json& params, const DomainDescriptor& domain) {
    const std::vector<double> alpha = require_vector(params, "alpha");
    if (alpha.size() != 2) throw ConfigError("rotated_power: alpha must have two entries");
    const double angle = require_number(params, "angle");
    if (domain.is_product()) throw ConfigError("rotated_power requires a non-product domain");
    const int d = domain.total_dim();
    const double c = std::cos(angle), s = std::sin(angle);
    DomainDescriptor dom = domain;
    return MatrixWeight(
        domain, 2, "rotated_power",
        [alpha, c, s, d, dom](const Point& t) {
            const double r = block_norm(dom, t, 0, d);
            Eigen::Matrix2cd u;
            u << c, -s, s, c;
            Eigen::Matrix2cd diag = Eigen::Matrix2cd::Zero();
            diag(0, 0) = std::pow(r, alpha[0]);
            diag(1, 1) = std::pow(r, alpha[1]);
            return CMatrix(u * diag * u.adjoint());
        },
        origin_axis_singular(d),
        [dom, d](const Point& t) { return block_norm(dom, t, 0, d) == 0.0; });
}

MatrixWeight make_product_diag_power(const json& params, const DomainDescriptor& domain) {
    const std::vector<double> alpha = require_vector(params, "alpha");
    const std::vector<double> beta = require_vector(params, "beta");
    if (alpha.size() != beta.size())
        throw ConfigError("product_diag_power: alpha and beta must have equal length");
    if (!domain.is_product()) throw ConfigError("product_diag_power requires a product domain");
    const int n = static_cast<int>(alpha.size());
    const int m = domain.dim_x(), dy = domain.dim_y();
    DomainDescriptor dom = domain;
    return MatrixWeight(
        domain, n, "product_diag_power",
        [alpha, beta, n, m, dy, dom](const Point& t) {
            const double rx = block_norm(dom, t, 0, m);
            const double ry = block_norm(dom, t, m, dy);
            CMatrix mat = CMatrix::Zero(n, n);
            for (int k = 0; k < n; ++k)
                mat(k, k) = std::pow(rx, alpha[k]) * std::pow(ry, beta[k]);
            return mat;
        },
        origin_axis_singular(m + dy),
        [dom, m, dy](const Point& t) {
            return block_norm(dom, t, 0, m) == 0.0 || block_norm(dom, t, m, dy) == 0.0;
        });
}

}  // namespace

MatrixWeight catalog_weight(const std::string& name, const json& params,
                            const DomainDescriptor& domain) {
    if (name == "identity") return make_identity(params, domain);
    if (name == "diag_power") return make_diag_power(params, domain);
    if (name == "scalar_power") return make_scalar_power(params, domain);
    if (name == "paper_example") return make_paper_example(domain);
    if (name == "rotated_power") return make_rotated_power(params, domain);
    if (name == "product_diag_power") return make_product_diag_power(params, domain);
    throw ConfigError("unknown catalog weight '" + name + "'");
}

std::vector<CatalogEntryInfo> weight_catalog() {
    return {
        {"identity", "n (int, default 2)", "constant identity weight I_n"},
        {"diag_power", "alpha (array)", "diag(|t|^alpha_k) on a line or torus"},
        {"scalar_power", "alpha (number), center (number|array, default 0)",
         "N=1 power weight |t-center|^alpha"},
        {"paper_example", "(none)",
         "the 2x2 weight [[sqrt(x)+1/sqrt(x), i/sqrt(x)], [-i/sqrt(x), 1/sqrt(x)]] on (0,1]"},
        {"rotated_power", "alpha (array of 2), angle (number)",
         "rotation-conjugated diag(|t|^alpha_k)"},
        {"product_diag_power", "alpha (array), beta (array)",
         "diag(|x|^alpha_k |y|^beta_k) on a product domain"},
    };
}

// ---------------------------------------------------------------------------
// tabulated weights

namespace {

struct TabulatedData {
    SampleGrid grid;
    std::vector<CMatrix> values;
    int n = 0;

    std::size_t nearest_index(const DomainDescriptor& domain, const Point& t) const {
        // per-axis nearest sample on the tensor structure, row-major flat index
        std::size_t flat = 0;
        for (std::size_t ax = 0; ax < grid.axis_points.size(); ++ax) {
            const auto& xs = grid.axis_points[ax];
            std::size_t best = 0;
            double bestd = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double d =
                    std::abs(domain.axis_distance(static_cast<int>(ax), t[ax], xs[i]));
                if (d < bestd) {
                    bestd = d;
                    best = i;
                }
            }
            flat = flat * xs.size() + best;
        }
        return flat;
    }
};

}  // namespace

MatrixWeight tabulated_weight(DomainDescriptor domain, SampleGrid grid,
                              std::vector<CMatrix> values, std::string name) {
    if (grid.axis_points.empty())
        throw ConfigError("tabulated weight requires a tensor-structured grid");
    if (grid.points.size() != values.size())
        throw ShapeMismatchError("tabulated weight: grid and value counts differ");
    if (values.empty()) throw ConfigError("tabulated weight: empty grid");
    const int n = static_cast<int>(values[0].rows());
    auto data = std::make_shared<TabulatedData>();
    data->grid = std::move(grid);
    data->values = std::move(values);
    data->n = n;
    DomainDescriptor dom = domain;
    return MatrixWeight(
        std::move(domain), n, std::move(name),
        [data, dom](const Point& t) { return data->values[data->nearest_index(dom, t)]; },
        {}, nullptr, /*restrict_to_window=*/true);
}

void save_tabulated_weight(const std::string& path, const MatrixWeight& w,
                           const GridSpec& grid_spec) {
    const SampleGrid grid = build_grid(w.domain(), grid_spec);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out.precision(17);
    const auto& dom = w.domain();
    out << "matweight tabulated v1\n";
    switch (dom.kind()) {
        case DomainKind::EuclideanLine: out << "domain euclidean_line\n"; break;
        case DomainKind::Torus: out << "domain torus\n"; break;
        case DomainKind::ProductEuclidean: out << "domain product_euclidean\n"; break;
        case DomainKind::ProductTorus: out << "domain product_torus\n"; break;
    }
    out << "dims " << dom.dim_x();
    if (dom.is_product()) out << " " << dom.dim_y();
    out << "\n";
    if (!dom.is_torus()) {
        out << "window";
        for (int i = 0; i < dom.total_dim(); ++i)
            out << " " << dom.axis_lo(i) << " " << dom.axis_hi(i);
        out << "\n";
    }
    out << "n " << w.dim() << "\n";
    out << "counts";
    for (const auto& ax : grid.axis_points) out << " " << ax.size();
    out << "\n";
    for (std::size_t ax = 0; ax < grid.axis_points.size(); ++ax) {
        out << "axis " << ax;
        for (double x : grid.axis_points[ax]) out << " " << x;
        out << "\n";
    }
    out << "data\n";
    for (const auto& t : grid.points) {
        const CMatrix m = w.evaluate(t).matrix();
        bool first = true;
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) {
                out << (first ? "" : " ") << m(i, j).real() << " " << m(i, j).imag();
                first = false;
            }
        out << "\n";
    }
}

MatrixWeight load_tabulated_weight(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tabulated weight file '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (line != "matweight tabulated v1")
        throw ConfigError("'" + path + "' is not a matweight tabulated file");

    std::string domain_kind;
    std::vector<int> dims;
    std::vector<double> window_vals;
    int n = 0;
    std::vector<std::size_t> counts;
    std::vector<std::vector<double>> axes;

    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "domain") {
            ls >> domain_kind;
        } else if (key == "dims") {
            int v;
            while (ls >> v) dims.push_back(v);
        } else if (key == "window") {
            double v;
            while (ls >> v) window_vals.push_back(v);
        } else if (key == "n") {
            ls >> n;
        } else if (key == "counts") {
            std::size_t v;
            while (ls >> v) counts.push_back(v);
        } else if (key == "axis") {
            std::size_t idx;
            ls >> idx;
            std::vector<double> xs;
            double v;
            while (ls >> v) xs.push_back(v);
            axes.resize(std::max(axes.size(), idx + 1));
            axes[idx] = std::move(xs);
        } else if (key == "data") {
            break;
        } else if (!key.empty()) {
            throw ConfigError("unknown tabulated-file field '" + key + "' in " + path);
        }
    }
    if (dims.empty() || n < 1 || axes.empty())
        throw ConfigError("incomplete tabulated weight header in '" + path + "'");

    DomainDescriptor dom = [&]() {
        const int m = dims[0];
        const int dy = dims.size() > 1 ? dims[1] : 0;
        const int total = m + dy;
        Window win;
        if (domain_kind == "torus") return DomainDescriptor::torus(m);
        if (domain_kind == "product_torus") return DomainDescriptor::product_torus(m, dy);
        if (static_cast<int>(window_vals.size()) != 2 * total)
            throw ConfigError("tabulated window has wrong arity in '" + path + "'");
        for (int i = 0; i < total; ++i) {
            win.lo.push_back(window_vals[2 * i]);
            win.hi.push_back(window_vals[2 * i + 1]);
        }
        if (domain_kind == "euclidean_line") return DomainDescriptor::euclidean(m, win);
        if (domain_kind == "product_euclidean")
            return DomainDescriptor::product_euclidean(m, dy, win);
        throw ConfigError("unknown tabulated domain kind '" + domain_kind + "'");
    }();

    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.size();
    std::vector<CMatrix> values;
    values.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double re, im;
                if (!(in >> re >> im))
                    throw ConfigError("truncated tabulated data in '" + path + "'");
                m(i, j) = Complex(re, im);
            }
        values.push_back(std::move(m));
    }

    SampleGrid grid;
    grid.axis_points = axes;
    // reconstruct flat points row-major (last axis fastest)
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Point p(axes.size());
        for (std::size_t i = 0; i < axes.size(); ++i) p[i] = axes[i][idx[i]];
        grid.points.push_back(std::move(p));
        grid.weights.push_back(0.0);
        for (int i = static_cast<int>(axes.size()) - 1; i >= 0; --i) {
            if (++idx[i] < axes[i].size()) break;
            idx[i] = 0;
        }
    }
    return tabulated_weight(dom, std::move(grid), std::move(values));
}

PdReport verify_positive_definite(const MatrixWeight& w, const SampleGrid& grid) {
    PdReport report;
    for (const auto& t : grid.points) {
        if (w.is_singular_point(t)) continue;
        ++report.checked;
        try {
            const double lmin = w.evaluate(t).min_eigenvalue();
            if (lmin < report.min_eigenvalue) {
                report.min_eigenvalue = lmin;
                report.argmin = t;
            }
        } catch (const DegenerateSampleError& e) {
            report.failures.emplace_back(t, e.min_eigenvalue());
            if (e.min_eigenvalue() < report.min_eigenvalue) {
                report.min_eigenvalue = e.min_eigenvalue();
                report.argmin = t;
            }
        }
    }
    return report;
}

}  // namespace mw
