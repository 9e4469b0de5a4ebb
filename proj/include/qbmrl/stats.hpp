#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace qbmrl::stats {

inline double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double stddev(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("stddev: empty input");
    if (v.size() == 1) return 0.0;
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

namespace detail {
inline double median_sorted(std::span<const double> v) {
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace detail

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty input");
    std::sort(v.begin(), v.end());
    return detail::median_sorted(v);
}

struct BoxStats {
    std::size_t count = 0;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// Five-number summary; quartiles are medians of the lower/upper halves,
// excluding the middle element when the count is odd (Tukey hinges).
inline BoxStats box_stats(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("box_stats: empty input");
    std::sort(v.begin(), v.end());
    BoxStats b;
    b.count = v.size();
    b.min = v.front();
    b.max = v.back();
    b.median = detail::median_sorted(v);
    const std::size_t half = v.size() / 2;
    if (half == 0) {
        b.q1 = b.q3 = b.median;
    } else {
        b.q1 = detail::median_sorted(std::span<const double>(v.data(), half));
        b.q3 = detail::median_sorted(std::span<const double>(v.data() + v.size() - half, half));
    }
    return b;
}

// Pearson chi-square statistic for observed counts against a uniform null.
inline double chi_square_uniform(std::span<const std::size_t> counts) {
    if (counts.empty()) throw std::invalid_argument("chi_square_uniform: empty input");
    double total = 0.0;
    for (std::size_t c : counts) total += static_cast<double>(c);
    const double expected = total / static_cast<double>(counts.size());
    if (!(expected > 0.0)) throw std::invalid_argument("chi_square_uniform: no observations");
    double stat = 0.0;
    for (std::size_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

}  // namespace qbmrl::stats
