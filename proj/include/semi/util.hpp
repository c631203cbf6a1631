#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace semi {

using Complex = std::complex<double>;

// Deterministic pairwise reduction. All quadrature sums and entropy
// accumulations go through this so results are independent of chunking
// and reproducible bit-for-bit across runs.
template <typename Scalar>
Scalar pairwise_sum(const Scalar* data, Eigen::Index n) {
    if (n == 0) return Scalar(0);
    if (n <= 8) {
        Scalar s = data[0];
        for (Eigen::Index i = 1; i < n; ++i) s += data[i];
        return s;
    }
    const Eigen::Index half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const Eigen::VectorXd& v) {
    return pairwise_sum(v.data(), v.size());
}

inline Complex pairwise_sum(const Eigen::VectorXcd& v) {
    return pairwise_sum(v.data(), v.size());
}

// log(sum exp(x_i)) with the usual max shift.
inline double log_sum_exp(const std::vector<double>& xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    double m = xs[0];
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Fixed 17-significant-digit float rendering used by every CSV/JSON writer.
inline std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

// FNV-1a over bytes; used to hash canonical config dumps into manifests.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// x*log(x) with the measure-theoretic convention 0*log 0 = 0.
inline double xlogx(double x) {
    return x > 0.0 ? x * std::log(x) : 0.0;
}

} // namespace semi
