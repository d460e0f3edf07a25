#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embedded.hpp"
#include "errors.hpp"

namespace sharing_queue {

/// How the continuous-time law is obtained from an embedded vector.
///
/// LevelCrossing: embedded law of the capacity-w chain plus the
/// up/down-crossing balance λ π_n = (1/a) Σ_{i=n+1}^{n+v} P_i. Exact for every
/// posting distribution under the clip admission rule.
///
/// AsPrinted: truncated-renormalised P with the three-band 𝒢 ladder and the
/// π_0 = (1 - Σ𝒢)/(1 + w) normalisation, transcribed term by term including
/// its index conventions. Kept for comparison; it disagrees with simulation.
enum class LadderForm { LevelCrossing, AsPrinted };

inline std::string_view to_string(LadderForm f) {
    return f == LadderForm::LevelCrossing ? "level-crossing" : "as-printed";
}

inline LadderForm ladder_form_from_string(std::string_view name) {
    if (name == "level-crossing") return LadderForm::LevelCrossing;
    if (name == "as-printed") return LadderForm::AsPrinted;
    throw DomainError("unknown ladder form '" + std::string(name) + "' (expected level-crossing or as-printed)");
}

struct LimitingDistribution {
    LadderForm form = LadderForm::LevelCrossing;
    std::vector<double> embedded;  // the P the ladder was built from
    std::vector<double> pi;        // customers (w - pool)
    std::vector<double> pi1;       // contractor pool, pi1[k] = pi[w - k]
    std::vector<double> gVector;   // 𝒢_1..𝒢_w, i.e. pi[n] - pi[0]
    bool valid = true;
    std::vector<int> negativeStates;
};

inline constexpr double kNegativeTolerance = -1e-9;

/// B̂_l = (1/a) Σ_{i=1}^{l} P_i.
inline double bhat(std::span<const double> P, double mean, int l) {
    if (l < 0 || static_cast<std::size_t>(l) >= P.size())
        throw DomainError("bhat: index l out of range 0..w");
    if (!(mean > 0.0)) throw DomainError("bhat: mean must be > 0");
    double s = 0.0;
    for (int i = 1; i <= l; ++i) s += P[static_cast<std::size_t>(i)];
    return s / mean;
}

namespace detail {

// P_i with P_i = 0 outside 0..w; empty or reversed ranges sum to 0.
inline double range_sum(std::span<const double> P, long from, long to) {
    double s = 0.0;
    const long hi = std::min<long>(to, static_cast<long>(P.size()) - 1);
    for (long i = std::max<long>(from, 0); i <= hi; ++i) s += P[static_cast<std::size_t>(i)];
    return s;
}

inline void check_embedded(const SystemParams& params, std::span<const double> P) {
    params.validate();
    if (P.size() != static_cast<std::size_t>(params.w) + 1)
        throw DomainError("embedded vector must have w+1 entries");
}

inline LimitingDistribution finish(LadderForm form, std::span<const double> P, std::vector<double> pi) {
    LimitingDistribution out;
    out.form = form;
    out.embedded.assign(P.begin(), P.end());
    out.gVector.reserve(pi.size() - 1);
    for (std::size_t n = 1; n < pi.size(); ++n) out.gVector.push_back(pi[n] - pi[0]);
    out.pi1.assign(pi.rbegin(), pi.rend());
    for (std::size_t k = 0; k < pi.size(); ++k) {
        if (pi[k] < kNegativeTolerance) {
            out.valid = false;
            out.negativeStates.push_back(static_cast<int>(k));
        }
    }
    out.pi = std::move(pi);
    return out;
}

}  // namespace detail

/// 𝒢_1..𝒢_w of the printed three-band ladder (already divided by λ).
/// Sums over P read P_i = 0 for i > w and treat empty ranges as 0.
inline std::vector<double> g_vector(const SystemParams& params, std::span<const double> P) {
    detail::check_embedded(params, P);
    const long v = params.v;
    const long w = params.w;
    const double a = params.posting.mean;
    const double pw = P[static_cast<std::size_t>(w)];
    const double bv1 = bhat(P, a, static_cast<int>(v - 1));

    std::vector<double> g(static_cast<std::size_t>(w), 0.0);
    for (long n = 1; n <= w; ++n) {
        double lg = 0.0;
        if (model_type(params) == ModelType::Type1) {
            if (n <= v) {
                lg = detail::range_sum(P, v, v + n - 1) / a - bhat(P, a, static_cast<int>(n));
            } else if (n <= w - v) {
                // Σ_{j=v+1}^{n-v} P_{v+j}
                lg = detail::range_sum(P, 2 * v + 1, n) / a - bv1;
            } else {
                lg = static_cast<double>(n - w + v) * pw / a - bv1;
            }
        } else {
            if (n <= w - v) {
                lg = detail::range_sum(P, v, v + n - 1) / a - bhat(P, a, static_cast<int>(n));
            } else if (n <= v) {
                // Σ_{j=1}^{w-v} P_{v+j}
                lg = detail::range_sum(P, v + 1, w) / a + static_cast<double>(n - w + v) * pw / a -
                     bhat(P, a, static_cast<int>(n));
            } else {
                // Σ_{j=n-v+1}^{w-v} P_{v+j}
                lg = detail::range_sum(P, n + 1, w) / a + static_cast<double>(n - w + v) * pw / a - bv1;
            }
        }
        g[static_cast<std::size_t>(n - 1)] = lg / params.lambda;
    }
    return g;
}

/// π from the printed ladder: π_0 = (1 - Σ𝒢)/(1 + w), π_n = 𝒢_n + π_0.
inline LimitingDistribution printed_ladder_pi(const SystemParams& params, std::span<const double> P) {
    const std::vector<double> g = g_vector(params, P);
    const double sum_g = std::accumulate(g.begin(), g.end(), 0.0);
    const double pi0 = (1.0 - sum_g) / (1.0 + params.w);
    std::vector<double> pi(static_cast<std::size_t>(params.w) + 1);
    pi[0] = pi0;
    for (std::size_t n = 1; n < pi.size(); ++n) pi[n] = g[n - 1] + pi0;
    auto out = detail::finish(LadderForm::AsPrinted, P, std::move(pi));
    out.gVector = g;
    return out;
}

/// π from level crossings between n and n+1: consumptions cross upward at
/// rate λ π_n, postings cross downward at rate (1/a) P{n < X <= n+v}.
inline LimitingDistribution level_crossing_pi(const SystemParams& params, std::span<const double> P) {
    detail::check_embedded(params, P);
    const long v = params.v;
    const long w = params.w;
    const double load = params.load();
    std::vector<double> pi(static_cast<std::size_t>(w) + 1, 0.0);
    double below_top = 0.0;
    for (long n = 0; n < w; ++n) {
        pi[static_cast<std::size_t>(n)] = detail::range_sum(P, n + 1, n + v) / load;
        below_top += pi[static_cast<std::size_t>(n)];
    }
    pi[static_cast<std::size_t>(w)] = 1.0 - below_top;
    return detail::finish(LadderForm::LevelCrossing, P, std::move(pi));
}

inline LimitingDistribution limiting_pi(const SystemParams& params, std::span<const double> P, LadderForm form) {
    return form == LadderForm::AsPrinted ? printed_ladder_pi(params, P) : level_crossing_pi(params, P);
}

/// Printed ladder applied to an EmbeddedSolution from embedded_P.
inline LimitingDistribution limiting_pi(const SystemParams& params, const EmbeddedSolution& embedded) {
    return printed_ladder_pi(params, embedded.P);
}

/// Full pipeline for one instance. AsPrinted needs λa/v < 1 (it goes
/// through the infinite-queue vector); LevelCrossing works for any load.
inline LimitingDistribution solve_limiting(const SystemParams& params, LadderForm form = LadderForm::LevelCrossing,
                                           double eps = 1e-12) {
    if (form == LadderForm::AsPrinted) return printed_ladder_pi(params, embedded_P(params, eps).P);
    return level_crossing_pi(params, capacity_chain_P(params));
}

}  // namespace sharing_queue
