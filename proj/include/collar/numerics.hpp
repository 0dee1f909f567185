#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace collar {

using cplx = std::complex<double>;

struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Brent's method on [a,b]; f(a) and f(b) must straddle zero.
double brent(const std::function<double(double)>& f, double a, double b,
             double xtol = 1e-14, int maxit = 200);

// Expand [a,b] geometrically around the initial interval until f changes sign;
// returns the bracketing interval. Throws if none found within max_expand doublings.
std::pair<double, double> expand_bracket(const std::function<double(double)>& f,
                                         double a, double b, int max_expand = 60);

// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
struct GaussLegendre {
    std::vector<double> nodes, weights;
};
GaussLegendre gauss_legendre(int n);

// SplitMix64: used to derive independent per-path RNG seeds from (seed, path id).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace collar
