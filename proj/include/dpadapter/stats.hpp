#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dpadapter {

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean: empty");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v) {
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// mid-ranks for ties
inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = mean(a), mb = mean(b);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    if (da == 0.0 || db == 0.0) return 0.0;
    return num / std::sqrt(da * db);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman: need two equal-length series of length >= 2");
    return pearson(ranks(a), ranks(b));
}

// chi-squared statistic against a uniform expectation
inline double chi_squared_uniform(const std::vector<long>& counts) {
    long total = std::accumulate(counts.begin(), counts.end(), 0L);
    double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (long c : counts) {
        double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

// Unimodal within slack: nondecreasing up to the argmax, nonincreasing after,
// allowing dips of at most `slack`.
inline bool is_unimodal(const std::vector<double>& v, double slack = 0.0) {
    if (v.size() < 3) return true;
    std::size_t peak = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[peak]) peak = i;
    for (std::size_t i = 0; i + 1 <= peak; ++i)
        if (i + 1 <= peak && v[i + 1] < v[i] - slack) return false;
    for (std::size_t i = peak; i + 1 < v.size(); ++i)
        if (v[i + 1] > v[i] + slack) return false;
    return true;
}

inline bool is_nonincreasing(const std::vector<double>& v, double slack = 0.0) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i + 1] > v[i] + slack) return false;
    return true;
}

}  // namespace dpadapter
