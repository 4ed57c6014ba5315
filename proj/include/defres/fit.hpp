#pragma once

#include <vector>

namespace defres {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;  ///< 0 for two points or exact data
    int n = 0;
};

/// Ordinary least squares y = slope * x + intercept.  Needs >= 2 points with
/// distinct x; throws ConfigError otherwise.
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace defres
