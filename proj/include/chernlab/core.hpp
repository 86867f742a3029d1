#ifndef CHERNLAB_CORE_HPP
#define CHERNLAB_CORE_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace chernlab {

using cd = std::complex<double>;
inline constexpr double PI = 3.14159265358979323846;
inline constexpr cd I{0.0, 1.0};

/// Error with a stable machine-readable code in what(), e.g. "SingularMetric: ...".
class Error : public std::runtime_error {
public:
    Error(const std::string& code, const std::string& msg)
        : std::runtime_error(code + ": " + msg), code_(code) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& msg) {
    throw Error(code, msg);
}

/// Square n x n grid, row-major. Index (i,j): i = row (imaginary axis), j = column (real axis).
template <typename T>
struct Grid2D {
    int n = 0;
    std::vector<T> v;

    Grid2D() = default;
    explicit Grid2D(int n_, T fill = T{}) : n(n_), v(static_cast<size_t>(n_) * n_, fill) {}

    T& operator()(int i, int j) { return v[static_cast<size_t>(i) * n + j]; }
    const T& operator()(int i, int j) const { return v[static_cast<size_t>(i) * n + j]; }
    size_t size() const { return v.size(); }
    bool empty() const { return v.empty(); }
};

using GridC = Grid2D<cd>;
using GridR = Grid2D<double>;

/// Pair of complex fields, one per target component.
struct Vec2Field {
    GridC c0, c1;
    Vec2Field() = default;
    explicit Vec2Field(int n) : c0(n), c1(n) {}
    GridC& operator[](int i) { return i == 0 ? c0 : c1; }
    const GridC& operator[](int i) const { return i == 0 ? c0 : c1; }
};

inline double sqr(double x) { return x * x; }
inline double norm2(cd z) { return std::norm(z); }

template <typename T>
double max_abs(const Grid2D<T>& g) {
    double m = 0.0;
    for (const auto& x : g.v) m = std::max(m, std::abs(x));
    return m;
}

/// Least-squares slope of log(y) against log(x); returns {slope, rms residual}.
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace chernlab

#endif
