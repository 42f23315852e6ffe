#include "mw/numerics.hpp"

#include <algorithm>
#include <limits>

namespace mw {

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

double log_level_slope(const std::vector<double>& values) {
    std::vector<double> xs, ys;
    xs.reserve(values.size());
    ys.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            return std::numeric_limits<double>::infinity();
        xs.push_back(std::log(static_cast<double>(i + 1)));
        ys.push_back(std::log(values[i]));
    }
    return least_squares_slope(xs, ys);
}

double log_log_slope(const std::vector<double>& scales, const std::vector<double>& values) {
    std::vector<double> xs, ys;
    const std::size_t n = std::min(scales.size(), values.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (!(scales[i] > 0.0) || !(values[i] > 0.0)) continue;
        if (!std::isfinite(scales[i]) || !std::isfinite(values[i])) continue;
        xs.push_back(std::log(scales[i]));
        ys.push_back(std::log(values[i]));
    }
    return least_squares_slope(xs, ys);
}

bool divergence_suspected(const std::vector<double>& ladder_values, double threshold) {
    if (ladder_values.size() < 3) return false;
    return log_level_slope(ladder_values) > threshold;
}

}  // namespace mw
