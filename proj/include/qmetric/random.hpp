#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "qmetric/linalg.hpp"

namespace qmetric {

// splitmix64 step; used to derive decorrelated substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic RNG with explicit (stdlib-free) real distributions so that
// identical seeds yield bit-identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Substreams are independent per (seed, index); index may be any value.
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        return Rng(splitmix64(seed + (index + 1) * 0x9e3779b97f4a7c15ULL));
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        // Rejection sampling removes modulo bias.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x > limit);
        return x % n;
    }

    // Standard normal via Box-Muller; the 1 - u shift keeps log away from 0.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    Complex cnormal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Random matrix constructions
// ---------------------------------------------------------------------------

inline Matrix random_complex_matrix(int rows, int cols, Rng& rng) {
    Matrix out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = rng.cnormal();
    return out;
}

inline Matrix random_hermitian(int n, Rng& rng) {
    return hermitize(random_complex_matrix(n, n, rng));
}

// Hermitian with spectrum shifted above a positive margin drawn from [0.1, 1].
inline Matrix random_strictly_positive(int n, Rng& rng) {
    const Matrix H = random_hermitian(n, rng);
    const double shift = std::abs(min_eigenvalue(H)) + rng.uniform(0.1, 1.0);
    return H + shift * Matrix::Identity(n, n);
}

// PSD of the given rank (Gram matrix of a thin Gaussian factor).
inline Matrix random_psd(int n, Rng& rng, int rank) {
    if (rank < 0 || rank > n) throw DimensionMismatch("random_psd: bad rank");
    if (rank == 0) return Matrix::Zero(n, n);
    const Matrix G = random_complex_matrix(n, rank, rng);
    return hermitize(G * G.adjoint());
}

inline Matrix random_psd(int n, Rng& rng) { return random_psd(n, rng, n); }

// Haar-distributed isometry (rows >= cols) via QR with phase-fixed diagonal.
inline Matrix random_isometry(int rows, int cols, Rng& rng) {
    if (rows < cols) throw DimensionMismatch("random_isometry: rows < cols");
    const Matrix G = random_complex_matrix(rows, cols, rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ() * Matrix::Identity(rows, cols);
    const Matrix R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < cols; ++j) {
        const Complex d = R(j, j);
        const double a = std::abs(d);
        Q.col(j) *= (a > 0) ? d / a : Complex(1.0, 0.0);
    }
    return Q;
}

inline Matrix random_unitary(int n, Rng& rng) { return random_isometry(n, n, rng); }

// Spectral norm strictly below 1: Gaussian rescaled by u / ||G||.
inline Matrix random_contraction(int rows, int cols, Rng& rng) {
    const Matrix G = random_complex_matrix(rows, cols, rng);
    const double s = spectral_norm(G);
    const double u = rng.uniform(0.0, 0.999);
    return (s > 0) ? Matrix((u / s) * G) : G;
}

inline Matrix random_unit_trace_psd(int n, Rng& rng) {
    const Matrix W = random_strictly_positive(n, rng);
    return W / W.trace().real();
}

} // namespace qmetric
