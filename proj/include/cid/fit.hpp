#pragma once

#include <vector>

namespace cid {

struct SlopeFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    double slope_stderr = 0;  // 0 for an exact fit
};

// least-squares fit of log y against log x; needs >= 3 positive pairs with distinct x
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cid
