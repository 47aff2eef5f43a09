#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dpadapter {

struct PrivacySpec {
    double epsilon = 4.0;
    double delta = 1e-5;
};

// Closed-form Gaussian mechanism calibration for a single query:
// sigma = sqrt(2 ln(1.25/delta)) / epsilon.
inline double gaussian_sigma(const PrivacySpec& spec) {
    if (spec.epsilon <= 0.0) throw std::domain_error("gaussian_sigma: epsilon must be > 0");
    if (spec.delta <= 0.0 || spec.delta >= 1.0)
        throw std::domain_error("gaussian_sigma: delta must be in (0,1)");
    double arg = 1.25 / spec.delta;
    if (arg <= 1.0) throw std::domain_error("gaussian_sigma: log(1.25/delta) nonpositive");
    return std::sqrt(2.0 * std::log(arg)) / spec.epsilon;
}

// RDP of the Poisson-subsampled Gaussian mechanism at integer order alpha,
// via the exact binomial summation evaluated in log space:
//   A(alpha) = sum_k C(alpha,k) (1-q)^(alpha-k) q^k exp(k(k-1)/(2 sigma^2))
//   rdp = log(A) / (alpha - 1)
// q = 1 reduces to the plain Gaussian value alpha / (2 sigma^2).
inline double rdp_subsampled_gaussian(double q, double sigma, int alpha) {
    if (alpha < 2) throw std::invalid_argument("rdp_subsampled_gaussian: order must be >= 2");
    if (q <= 0.0 || q > 1.0) throw std::invalid_argument("rdp_subsampled_gaussian: q in (0,1]");
    if (sigma <= 0.0) throw std::invalid_argument("rdp_subsampled_gaussian: sigma must be > 0");
    if (q == 1.0) return static_cast<double>(alpha) / (2.0 * sigma * sigma);

    double log_q = std::log(q);
    double log_1mq = std::log1p(-q);
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(static_cast<std::size_t>(alpha) + 1);
    for (int k = 0; k <= alpha; ++k) {
        double log_binom = std::lgamma(alpha + 1.0) - std::lgamma(k + 1.0) -
                           std::lgamma(alpha - k + 1.0);
        double t = log_binom + k * log_q + (alpha - k) * log_1mq +
                   (static_cast<double>(k) * (k - 1)) / (2.0 * sigma * sigma);
        terms[static_cast<std::size_t>(k)] = t;
        max_term = std::max(max_term, t);
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - max_term);
    double log_a = max_term + std::log(s);
    return std::max(0.0, log_a / (alpha - 1.0));
}

// Default order grid: integer alpha 2..64 plus 128 and 256.
inline std::vector<int> default_rdp_orders() {
    std::vector<int> orders;
    for (int a = 2; a <= 64; ++a) orders.push_back(a);
    orders.push_back(128);
    orders.push_back(256);
    return orders;
}

// Accumulated RDP ledger for one training run.
struct AccountantState {
    std::vector<int> orders = default_rdp_orders();
    std::vector<double> rdp_ledger;  // accumulated RDP per order
    double sampling_rate = 0.0;      // q = lot / |D|, informational
    long steps = 0;

    AccountantState() { rdp_ledger.assign(orders.size(), 0.0); }
    explicit AccountantState(std::vector<int> ords) : orders(std::move(ords)) {
        rdp_ledger.assign(orders.size(), 0.0);
    }

    // One subsampled-Gaussian query with rate q and noise multiplier sigma.
    void add_step(double q, double sigma) {
        for (std::size_t i = 0; i < orders.size(); ++i)
            rdp_ledger[i] += rdp_subsampled_gaussian(q, sigma, orders[i]);
        sampling_rate = q;
        ++steps;
    }
};

struct ConversionResult {
    double epsilon;
    int order;
};

// RDP -> (eps, delta): eps = min over alpha of [ledger(alpha) + ln(1/delta)/(alpha-1)].
inline ConversionResult compose_and_convert(const AccountantState& state, double delta) {
    if (state.orders.empty()) throw std::invalid_argument("compose_and_convert: empty order list");
    if (delta <= 0.0 || delta >= 1.0)
        throw std::domain_error("compose_and_convert: delta must be in (0,1)");
    double best = std::numeric_limits<double>::infinity();
    int best_order = state.orders.front();
    for (std::size_t i = 0; i < state.orders.size(); ++i) {
        double eps = state.rdp_ledger[i] + std::log(1.0 / delta) / (state.orders[i] - 1.0);
        if (eps < best) {
            best = eps;
            best_order = state.orders[i];
        }
    }
    return {best, best_order};
}

// Epsilon spent by `steps` identical subsampled-Gaussian queries.
inline double accountant_epsilon(double q, double sigma, long steps, double delta) {
    AccountantState st;
    if (steps > 0) {
        st.add_step(q, sigma);
        for (std::size_t i = 0; i < st.rdp_ledger.size(); ++i) st.rdp_ledger[i] *= steps;
        st.steps = steps;
    }
    st.sampling_rate = q;
    return compose_and_convert(st, delta).epsilon;
}

// Binary search for the smallest sigma whose composed epsilon meets the
// budget. Bracket [1e-2, 1e3]; relative slack 1e-3 on the budget.
inline double calibrate_sigma(const PrivacySpec& spec, double q, long steps) {
    double lo = 1e-2, hi = 1e3;
    if (steps <= 0) return lo;
    if (accountant_epsilon(q, hi, steps, spec.delta) > spec.epsilon)
        throw std::runtime_error("calibrate_sigma: no sigma in [1e-2, 1e3] meets the budget");
    if (accountant_epsilon(q, lo, steps, spec.delta) <= spec.epsilon) return lo;
    while (hi / lo > 1.0 + 1e-4) {
        double mid = std::sqrt(lo * hi);
        if (accountant_epsilon(q, mid, steps, spec.delta) <= spec.epsilon)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace dpadapter
