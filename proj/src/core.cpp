#include "chernlab/core.hpp"

#include <cmath>

namespace chernlab {

std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t m = x.size();
    if (m < 2 || y.size() != m) fail("InsufficientRadii", "need >= 2 samples for a fit");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t used = 0;
    std::vector<double> lx, ly;
    for (size_t i = 0; i < m; ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
        ++used;
    }
    if (used < 2) fail("InsufficientRadii", "need >= 2 positive samples for a log fit");
    for (size_t i = 0; i < used; ++i) {
        sx += lx[i]; sy += ly[i];
        sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i];
    }
    const double n = static_cast<double>(used);
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) fail("InsufficientRadii", "degenerate abscissae");
    const double slope = (n * sxy - sx * sy) / denom;
    const double icpt = (sy - slope * sx) / n;
    double rss = 0.0;
    for (size_t i = 0; i < used; ++i) rss += sqr(ly[i] - (icpt + slope * lx[i]));
    return {slope, std::sqrt(rss / n)};
}

}  // namespace chernlab
