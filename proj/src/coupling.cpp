#include "eqfree/coupling.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include <unsupported/Eigen/FFT>

namespace eqfree {

namespace {

/// Laurent polynomial in E over offsets −p..p (index q ↔ offset q − p).
using Laurent = std::vector<double>;

Laurent convolve_centred(const Laurent& a, const Laurent& b, int p) {
    // Both operands and the result live on offsets −p..p; products that
    // would leave the window are zero by construction of the δ powers.
    Laurent out(a.size(), 0.0);
    const int w = static_cast<int>(a.size());
    for (int i = 0; i < w; ++i) {
        if (a[i] == 0.0) continue;
        for (int j = 0; j < w; ++j) {
            if (b[j] == 0.0) continue;
            const int q = i + j - p;
            if (q >= 0 && q < w) out[q] += a[i] * b[j];
        }
    }
    return out;
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

StencilWeights build_weights(double r, int p, double gamma) {
    const int w = 2 * p + 1;
    Laurent delta2(w, 0.0), mudelta(w, 0.0);
    delta2[p - 1] = 1.0;
    delta2[p] = -2.0;
    delta2[p + 1] = 1.0;
    mudelta[p - 1] = -0.5;
    mudelta[p + 1] = 0.5;

    StencilWeights sw;
    sw.r = r;
    sw.p = p;
    sw.gamma = gamma;
    sw.plus_terms.assign(static_cast<std::size_t>(p + 1), Laurent(w, 0.0));
    sw.minus_terms.assign(static_cast<std::size_t>(p + 1), Laurent(w, 0.0));
    sw.plus_terms[0][p] = 1.0;
    sw.minus_terms[0][p] = 1.0;

    // odd = μδ^{2k−1}, even = δ^{2k}, advanced together with k.
    Laurent odd = mudelta;
    Laurent even = delta2;
    double coef = r;  // r·∏_{j<k}(r²−j²)
    for (int k = 1; k <= p; ++k) {
        if (k > 1) {
            odd = convolve_centred(odd, delta2, p);
            even = convolve_centred(even, delta2, p);
            coef *= r * r - static_cast<double>((k - 1) * (k - 1));
        }
        const double fo = factorial(2 * k - 1);
        const double fe = factorial(2 * k);
        for (int q = 0; q < w; ++q) {
            sw.plus_terms[k][q] = coef * (odd[q] / fo + r * even[q] / fe);
            sw.minus_terms[k][q] = coef * (-odd[q] / fo + r * even[q] / fe);
        }
    }

    sw.plus.assign(w, 0.0);
    sw.minus.assign(w, 0.0);
    double gk = 1.0;
    for (int k = 0; k <= p; ++k) {
        for (int q = 0; q < w; ++q) {
            sw.plus[q] += gk * sw.plus_terms[k][q];
            sw.minus[q] += gk * sw.minus_terms[k][q];
        }
        gk *= gamma;
    }
    return sw;
}

int wrap(int j, int n) {
    const int m = j % n;
    return m < 0 ? m + n : m;
}

}  // namespace

const StencilWeights& stencil_weights(double r, int p, double gamma) {
    if (p < 1 || p > 4) throw ConfigError("p", "stencil half-order must lie in 1..4");
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("ratio", "edge offset r must lie in [0,1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma", "gamma must lie in [0,1]");

    static std::mutex mtx;
    static std::map<std::tuple<double, int, double>, StencilWeights> cache;
    std::lock_guard<std::mutex> lock(mtx);
    const auto key = std::make_tuple(r, p, gamma);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_weights(r, p, gamma)).first;
    return it->second;
}

EdgeValues edge_values_polynomial(const Vec& U, const PatchGrid1D& grid, const CouplingSpec& spec) {
    const int N = static_cast<int>(U.size());
    const int p = spec.half_order();
    if (N != grid.nPatch) throw ConfigError("U", "centre vector length differs from nPatch");
    // With N = 2p the two outermost offsets alias onto the same patch under
    // periodic wrap; fewer patches than that cannot support the order.
    if (N < 2 * p) {
        throw ConfigError("nPatch", "polynomial coupling of order " + std::to_string(2 * p) +
                                        " needs at least " + std::to_string(2 * p) + " patches");
    }
    const StencilWeights& sw = stencil_weights(grid.ratio, p, spec.gamma);
    EdgeValues e{Vec::Zero(N), Vec::Zero(N)};
    for (int j = 0; j < N; ++j) {
        double l = 0.0, r = 0.0;
        for (int off = -p; off <= p; ++off) {
            const double u = U[wrap(j + off, N)];
            l += sw.minus_at(off) * u;
            r += sw.plus_at(off) * u;
        }
        e.left[j] = l;
        e.right[j] = r;
    }
    return e;
}

Vec spectral_shift(const Vec& seq, double s) {
    const int M = static_cast<int>(seq.size());
    if (M <= 1) return seq;
    Eigen::FFT<double> fft;
    std::vector<double> in(seq.data(), seq.data() + M);
    std::vector<std::complex<double>> F;
    fft.fwd(F, in);
    // Eigen's real forward transform may return only the half spectrum.
    if (static_cast<int>(F.size()) != M) {
        F.resize(static_cast<std::size_t>(M));
        for (int m = M / 2 + 1; m < M; ++m) F[m] = std::conj(F[M - m]);
    }
    const double twopi = 2.0 * std::numbers::pi;
    for (int m = 0; m < M; ++m) {
        if (2 * m == M) {
            F[m] *= std::cos(std::numbers::pi * s);
            continue;
        }
        const int k = (2 * m < M) ? m : m - M;
        F[m] *= std::polar(1.0, twopi * k * s / M);
    }
    std::vector<std::complex<double>> out;
    fft.inv(out, F);
    Vec v(M);
    for (int m = 0; m < M; ++m) v[m] = out[m].real();
    return v;
}

EdgeValues edge_values_spectral(const Vec& U, const PatchGrid1D& grid) {
    if (static_cast<int>(U.size()) != grid.nPatch) {
        throw ConfigError("U", "centre vector length differs from nPatch");
    }
    return {spectral_shift(U, -grid.ratio), spectral_shift(U, grid.ratio)};
}

EdgeValues edge_values_staggered(const Vec& U, const PatchGrid1D& grid, const StaggeredTags& tags) {
    const int N = grid.nPatch;
    if (static_cast<int>(U.size()) != N) throw ConfigError("U", "centre vector length differs from nPatch");
    if (N % 2 != 0) throw ConfigError("nPatch", "staggered coupling needs an even number of patches");
    if (tags.nPatch != N || tags.nSubP != grid.nSubP) {
        throw ConfigError("tags", "parity masks do not match the grid");
    }
    const int M = N / 2;
    Vec even(M), odd(M);
    for (int m = 0; m < M; ++m) {
        even[m] = U[2 * m];
        odd[m] = U[2 * m + 1];
    }
    const double r = grid.ratio;
    // Even patch j: neighbour odd centre (j+1)/2 sits at X_j + H, so the edge
    // X_j ± rH lies (−1 ± r)/2 odd-spacings from it.  Odd patch j: the even
    // centre (j−1)/2 sits at X_j − H, offset (1 ± r)/2.
    const Vec oddL = spectral_shift(odd, (-1.0 - r) / 2.0);
    const Vec oddR = spectral_shift(odd, (-1.0 + r) / 2.0);
    const Vec evenL = spectral_shift(even, (1.0 - r) / 2.0);
    const Vec evenR = spectral_shift(even, (1.0 + r) / 2.0);
    EdgeValues e{Vec(N), Vec(N)};
    for (int m = 0; m < M; ++m) {
        e.left[2 * m] = oddL[m];
        e.right[2 * m] = oddR[m];
        e.left[2 * m + 1] = evenL[m];
        e.right[2 * m + 1] = evenR[m];
    }
    return e;
}

EdgeValues edge_values(const Vec& U, const PatchGrid1D& grid, const CouplingSpec& spec) {
    switch (spec.mode) {
    case CouplingMode::Polynomial: return edge_values_polynomial(U, grid, spec);
    case CouplingMode::Spectral: return edge_values_spectral(U, grid);
    case CouplingMode::Staggered: return edge_values_staggered(U, grid, staggered_tags(grid));
    }
    throw ConfigError("mode", "unknown coupling mode");
}

std::string stencil_weights_csv(const StencilWeights& w) {
    std::ostringstream os;
    os.precision(17);
    os << "offset,minus,plus\n";
    for (int off = -w.p; off <= w.p; ++off) {
        os << off << ',' << w.minus_at(off) << ',' << w.plus_at(off) << '\n';
    }
    return os.str();
}

}  // namespace eqfree
