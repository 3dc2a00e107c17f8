#include "cid/fit.hpp"

#include <algorithm>
#include <cmath>

#include "cid/field.hpp"

namespace cid {

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw Error(ErrorKind::InvalidParameter, "slope fit needs >= 3 pairs");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw Error(ErrorKind::InvalidParameter, "slope fit needs positive data");
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    if (vx <= 0) throw Error(ErrorKind::InvalidParameter, "slope fit needs distinct abscissae");
    SlopeFit f;
    f.slope = cxy / vx;
    f.intercept = (sy - f.slope * sx) / n;
    f.r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
    const double sse = std::max(0.0, vy - f.slope * cxy);
    f.slope_stderr = std::sqrt(sse / (n - 2) / vx);
    return f;
}

}  // namespace cid
