#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mw/domain.hpp"
#include "mw/hermitian.hpp"

namespace mw {

/// Matrix weight W: a Hermitian positive-definite-valued map on a domain.
/// The evaluator is either a closed-form catalog rule, a tabulated grid with
/// nearest-sample lookup, or a derived view (power of / slice of another
/// weight). Evaluation rejects declared singular points and flags
/// non-positive-definite samples with their location.
class MatrixWeight {
public:
    using Evaluator = std::function<CMatrix(const Point&)>;
    using SingularPredicate = std::function<bool(const Point&)>;

    MatrixWeight(DomainDescriptor domain, int n, std::string name, Evaluator evaluator,
                 std::vector<std::vector<double>> axis_singular = {},
                 SingularPredicate is_singular = nullptr, bool restrict_to_window = false);

    int dim() const { return n_; }
    const DomainDescriptor& domain() const { return domain_; }
    const std::string& name() const { return name_; }

    /// Per-axis singular coordinates meshes must grade toward.
    const std::vector<std::vector<double>>& axis_singular() const { return axis_singular_; }
    bool is_singular_point(const Point& t) const;

    HermitianMatrix evaluate(const Point& t) const;

    /// Evaluation plus one Hermitian eigendecomposition with the relative
    /// eigenvalue floor applied; the workhorse of every averaged metric.
    Eigensystem eigensystem_at(const Point& t) const;

    /// W^s(t) via the Hermitian functional calculus.
    HermitianMatrix power_at(const Point& t, double s) const;

    /// Entry (i, j) of W^s(t); diagonal entries are real for PD input.
    Complex entry_of_power_at(const Point& t, double s, int i, int j) const;

private:
    DomainDescriptor domain_;
    int n_;
    std::string name_;
    Evaluator evaluator_;
    std::vector<std::vector<double>> axis_singular_;
    SingularPredicate is_singular_;
    bool restrict_to_window_;
};

/// The weight W^s as a weight in its own right (same singular structure).
MatrixWeight weight_power(const MatrixWeight& base, double s);

/// Scalar weight: positive a.e. on the window.
class ScalarWeight {
public:
    using Evaluator = std::function<double(const Point&)>;
    using SingularPredicate = std::function<bool(const Point&)>;

    ScalarWeight(DomainDescriptor domain, std::string name, Evaluator evaluator,
                 std::vector<std::vector<double>> axis_singular = {},
                 SingularPredicate is_singular = nullptr);

    const DomainDescriptor& domain() const { return domain_; }
    const std::string& name() const { return name_; }
    const std::vector<std::vector<double>>& axis_singular() const { return axis_singular_; }
    bool is_singular_point(const Point& t) const;

    /// Value at t; non-positive samples are degenerate-sample errors.
    double evaluate(const Point& t) const;

private:
    DomainDescriptor domain_;
    std::string name_;
    Evaluator evaluator_;
    std::vector<std::vector<double>> axis_singular_;
    SingularPredicate is_singular_;
};

ScalarWeight constant_scalar_weight(const DomainDescriptor& domain, double value = 1.0);

/// w(t) = w_kk(t), the (k,k) entry of W (0-based k).
ScalarWeight diagonal_entry_weight(const MatrixWeight& w, int k);

/// w(t) = (w_kk^{(s)}(t))^{outer}: pointwise scalar power of the diagonal
/// entry of W^s. Never a matrix power of an entry.
ScalarWeight entry_power_weight(const MatrixWeight& w, double s, int k, double outer);

/// Scalar weight viewed as a 1x1 matrix weight.
MatrixWeight as_matrix_weight(const ScalarWeight& w);

/// Built-in weight catalog. Names: identity, diag_power, scalar_power,
/// paper_example, rotated_power, product_diag_power.
MatrixWeight catalog_weight(const std::string& name, const nlohmann::json& params,
                            const DomainDescriptor& domain);

struct CatalogEntryInfo {
    std::string name;
    std::string params;
    std::string description;
};
std::vector<CatalogEntryInfo> weight_catalog();

/// Tabulated weights: nearest-sample lookup on a tensor grid; evaluation
/// outside the grid's window is rejected.
MatrixWeight tabulated_weight(DomainDescriptor domain, SampleGrid grid,
                              std::vector<CMatrix> values, std::string name = "tabulated");

MatrixWeight load_tabulated_weight(const std::string& path);
void save_tabulated_weight(const std::string& path, const MatrixWeight& w,
                           const GridSpec& grid_spec);

/// Positive-definiteness survey over a grid (report-only; never throws for
/// degenerate samples).
struct PdReport {
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    Point argmin;
    std::size_t checked = 0;
    std::vector<std::pair<Point, double>> failures;
};
PdReport verify_positive_definite(const MatrixWeight& w, const SampleGrid& grid);

}  // namespace mw
