#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/geometric.hpp>
#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"

namespace sharing_queue {

enum class DistKind { Exponential, Deterministic, Erlang };

inline std::string_view to_string(DistKind kind) {
    switch (kind) {
        case DistKind::Exponential: return "exponential";
        case DistKind::Deterministic: return "deterministic";
        case DistKind::Erlang: return "erlang";
    }
    return "unknown";
}

inline DistKind dist_kind_from_string(std::string_view name) {
    if (name == "exponential") return DistKind::Exponential;
    if (name == "deterministic") return DistKind::Deterministic;
    if (name == "erlang") return DistKind::Erlang;
    throw DomainError("unknown distribution kind '" + std::string(name) +
                      "' (expected exponential, deterministic or erlang)");
}

/// Law of the interval between two consecutive batch postings.
///
/// `mean` is the expected interval a. For Erlang the rate of each phase is
/// shape/mean so the mean stays exactly a; the other kinds ignore `shape`.
struct PostingDistribution {
    DistKind kind = DistKind::Exponential;
    double mean = 1.0;
    int shape = 1;

    static PostingDistribution exponential(double mean) {
        return make(DistKind::Exponential, mean, 1);
    }
    static PostingDistribution deterministic(double mean) {
        return make(DistKind::Deterministic, mean, 1);
    }
    static PostingDistribution erlang(int shape, double mean) {
        return make(DistKind::Erlang, mean, shape);
    }

    static PostingDistribution make(DistKind kind, double mean, int shape) {
        if (!(mean > 0.0) || !std::isfinite(mean))
            throw DomainError("posting mean must be a positive finite number");
        if (kind == DistKind::Erlang && shape < 1)
            throw DomainError("erlang shape must be >= 1");
        return PostingDistribution{kind, mean, kind == DistKind::Erlang ? shape : 1};
    }

    // Exponential is Erlang with a single phase; handy for shared formulas.
    int phases() const { return kind == DistKind::Erlang ? shape : 1; }

    friend bool operator==(const PostingDistribution&, const PostingDistribution&) = default;
};

/// CDF A(x).
inline double cdf(const PostingDistribution& dist, double x) {
    if (x < 0.0) return 0.0;
    switch (dist.kind) {
        case DistKind::Deterministic:
            return x >= dist.mean ? 1.0 : 0.0;
        case DistKind::Exponential:
            return -std::expm1(-x / dist.mean);
        case DistKind::Erlang:
            return boost::math::gamma_p(static_cast<double>(dist.shape), dist.shape * x / dist.mean);
    }
    return 0.0;
}

/// Laplace-Stieltjes transform α(θ) = E[exp(-θD)].
inline double lst(const PostingDistribution& dist, double theta) {
    if (theta < 0.0 || std::isnan(theta)) throw DomainError("lst: theta must be >= 0");
    switch (dist.kind) {
        case DistKind::Exponential:
            return 1.0 / (1.0 + dist.mean * theta);
        case DistKind::Deterministic:
            return std::exp(-dist.mean * theta);
        case DistKind::Erlang:
            return std::pow(1.0 + dist.mean * theta / dist.shape, -dist.shape);
    }
    return 1.0;
}

namespace detail {

inline void check_rate(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw DomainError("consumption rate lambda must be a positive finite number");
}

// Exponential: geometric with success probability 1/(1+λa).
// Deterministic: Poisson(λa).
// Erlang(m): negative binomial with m successes and p = m/(m+λa).
inline double psi_closed(const PostingDistribution& dist, double lambda, std::int64_t k) {
    const double load = lambda * dist.mean;
    const auto kk = static_cast<double>(k);
    switch (dist.kind) {
        case DistKind::Exponential:
            return boost::math::pdf(boost::math::geometric_distribution<double>(1.0 / (1.0 + load)), kk);
        case DistKind::Deterministic:
            return boost::math::pdf(boost::math::poisson_distribution<double>(load), kk);
        case DistKind::Erlang: {
            const double m = dist.shape;
            return boost::math::pdf(boost::math::negative_binomial_distribution<double>(m, m / (m + load)), kk);
        }
    }
    return 0.0;
}

// P{more than kmax events in one interval}, evaluated from the complementary
// CDF so it does not inherit the rounding of the summed pmf.
inline double psi_upper_tail(const PostingDistribution& dist, double lambda, std::int64_t kmax) {
    const double load = lambda * dist.mean;
    const auto kk = static_cast<double>(kmax);
    using boost::math::cdf;
    using boost::math::complement;
    switch (dist.kind) {
        case DistKind::Exponential:
            return std::pow(load / (1.0 + load), kk + 1.0);
        case DistKind::Deterministic:
            return cdf(complement(boost::math::poisson_distribution<double>(load), kk));
        case DistKind::Erlang: {
            const double m = dist.shape;
            return cdf(complement(boost::math::negative_binomial_distribution<double>(m, m / (m + load)), kk));
        }
    }
    return 0.0;
}

}  // namespace detail

/// ψ(k) = ∫ exp(-λx) (λx)^k / k! dA(x): probability of exactly k consumption
/// events inside one posting interval.
inline double psi(const PostingDistribution& dist, double lambda, std::int64_t k) {
    detail::check_rate(lambda);
    if (k < 0) throw DomainError("psi: k must be >= 0");
    return detail::psi_closed(dist, lambda, k);
}

/// Same kernel by adaptive quadrature of the defining integral. Closed forms
/// cover every supported kind; this is the fallback and cross-check.
inline double psi_quadrature(const PostingDistribution& dist, double lambda, std::int64_t k) {
    detail::check_rate(lambda);
    if (k < 0) throw DomainError("psi_quadrature: k must be >= 0");
    const double lk = boost::math::lgamma(static_cast<double>(k) + 1.0);
    auto poisson_weight = [&](double x) {
        if (x <= 0.0) return k == 0 ? 1.0 : 0.0;
        return std::exp(-lambda * x + static_cast<double>(k) * std::log(lambda * x) - lk);
    };
    if (dist.kind == DistKind::Deterministic) return poisson_weight(dist.mean);

    // Integrate against the Erlang(m, m/a) density; exponential is m = 1.
    const double m = dist.phases();
    const double rate = m / dist.mean;
    const double lgm = boost::math::lgamma(m);
    auto integrand = [&](double x) {
        if (x <= 0.0) return (k == 0 && m == 1.0) ? rate : 0.0;
        const double log_density = m * std::log(rate) + (m - 1.0) * std::log(x) - rate * x - lgm;
        const double log_weight = -lambda * x + static_cast<double>(k) * std::log(lambda * x) - lk;
        return std::exp(log_density + log_weight);
    };
    // Stop where the posting law has less than 1e-13 mass left.
    const boost::math::gamma_distribution<double> interval(m, 1.0 / rate);
    const double upper = boost::math::quantile(boost::math::complement(interval, 1e-13));
    // Split at the integrand's mode so both pieces are unimodal.
    const double mode = std::clamp((static_cast<double>(k) + m - 1.0) / (lambda + rate), 0.0, upper);
    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    double total = 0.0;
    if (mode > 0.0) total += Quad::integrate(integrand, 0.0, mode, 20, 1e-13);
    total += Quad::integrate(integrand, mode, upper, 20, 1e-13);
    return total;
}

struct PsiRow {
    std::vector<double> values;  // ψ(0..kmax)
    double tail = 0.0;           // P{more than kmax events}
};

inline PsiRow psi_row(const PostingDistribution& dist, double lambda, std::int64_t kmax) {
    detail::check_rate(lambda);
    if (kmax < 0) throw DomainError("psi_row: kmax must be >= 0");
    PsiRow row;
    row.values.reserve(static_cast<std::size_t>(kmax) + 1);
    for (std::int64_t k = 0; k <= kmax; ++k) row.values.push_back(detail::psi_closed(dist, lambda, k));
    row.tail = std::max(0.0, detail::psi_upper_tail(dist, lambda, kmax));
    return row;
}

/// Smallest row whose tail mass is below `tail_tol`.
inline PsiRow psi_row_until(const PostingDistribution& dist, double lambda, double tail_tol = 1e-15) {
    detail::check_rate(lambda);
    std::int64_t kmax = std::max<std::int64_t>(8, static_cast<std::int64_t>(4.0 * lambda * dist.mean));
    while (detail::psi_upper_tail(dist, lambda, kmax) >= tail_tol) kmax *= 2;
    // Shrink back to the first index that meets the tolerance.
    std::int64_t lo = kmax / 2, hi = kmax;
    while (lo + 1 < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (detail::psi_upper_tail(dist, lambda, mid) < tail_tol) hi = mid; else lo = mid;
    }
    return psi_row(dist, lambda, hi);
}

/// Uniform on the open interval (0, 1) from the top 53 bits of one draw.
/// Written out by hand: std:: distribution objects are implementation
/// defined, and simulation output must not depend on the standard library.
inline double open_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double sample(const PostingDistribution& dist, std::mt19937_64& rng) {
    switch (dist.kind) {
        case DistKind::Deterministic:
            return dist.mean;
        case DistKind::Exponential:
            return -dist.mean * std::log(open_uniform(rng));
        case DistKind::Erlang: {
            double log_sum = 0.0;
            for (int i = 0; i < dist.shape; ++i) log_sum += std::log(open_uniform(rng));
            return -dist.mean / dist.shape * log_sum;
        }
    }
    return dist.mean;
}

}  // namespace sharing_queue
