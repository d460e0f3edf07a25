#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cost.hpp"
#include "dist.hpp"
#include "embedded.hpp"
#include "errors.hpp"
#include "limiting.hpp"

namespace sharing_queue {

/// What a posting does when the pool has fewer than v free places.
enum class AdmissionPolicy {
    Clip,               // admit min(v, free room)
    RejectIfNoFullRoom  // admit all v or none
};

inline std::string_view to_string(AdmissionPolicy p) {
    return p == AdmissionPolicy::Clip ? "clip" : "reject-if-no-full-room";
}

inline AdmissionPolicy admission_policy_from_string(std::string_view name) {
    if (name == "clip") return AdmissionPolicy::Clip;
    if (name == "reject-if-no-full-room") return AdmissionPolicy::RejectIfNoFullRoom;
    throw DomainError("unknown admission policy '" + std::string(name) +
                      "' (expected clip or reject-if-no-full-room)");
}

struct SimConfig {
    std::uint64_t seed = 1;
    std::int64_t numPostings = 1'000'000;
    double warmupFraction = 0.1;
    AdmissionPolicy admissionPolicy = AdmissionPolicy::Clip;

    std::int64_t warmupPostings() const {
        return static_cast<std::int64_t>(std::floor(warmupFraction * static_cast<double>(numPostings)));
    }

    void validate() const {
        if (numPostings < 1) throw DomainError("numPostings must be >= 1");
        if (!(warmupFraction >= 0.0 && warmupFraction < 1.0)) throw DomainError("warmupFraction must lie in [0, 1)");
    }
};

struct SimResult {
    std::vector<double> timeAvgDist;   // fraction of time with pool = k
    std::vector<double> embeddedDist;  // pool just before a posting
    double lostCustomerRate = 0.0;
    double avgCostRate = 0.0;
    double totalSimTime = 0.0;
    std::uint64_t seedEcho = 0;
    std::int64_t postingsObserved = 0;
    double meanPool = 0.0;
};

/// Event-driven simulation of the contractor pool.
///
/// Consumption events form a Poisson(λ) stream and postings a renewal stream
/// with the configured interval law. Neither stream's draws depend on the
/// state, so two runs with one seed see the same event times whatever the
/// admission policy. Statistics cover the window between posting W and
/// posting N, W = floor(warmup * N).
inline SimResult run_sim(const SystemParams& params, const CostParams& cost, const SimConfig& config) {
    params.validate();
    cost.validate();
    config.validate();

    const int w = params.w;
    const int v = params.v;
    std::mt19937_64 rng(config.seed);
    auto next_consumption_gap = [&] { return -std::log(open_uniform(rng)) / params.lambda; };

    const std::int64_t warmup = config.warmupPostings();
    std::vector<double> sojourn(static_cast<std::size_t>(w) + 1, 0.0);
    std::vector<std::int64_t> before_posting(static_cast<std::size_t>(w) + 1, 0);
    std::int64_t lost = 0;

    int pool = 0;
    double now = 0.0;
    double window_start = 0.0;
    bool recording = warmup == 0;
    double next_consumption = next_consumption_gap();
    double next_posting = sample(params.posting, rng);
    std::int64_t postings = 0;

    while (postings < config.numPostings) {
        if (next_consumption < next_posting) {
            if (recording) sojourn[static_cast<std::size_t>(pool)] += next_consumption - now;
            now = next_consumption;
            if (pool > 0) --pool; else if (recording) ++lost;
            next_consumption = now + next_consumption_gap();
        } else {
            if (recording) sojourn[static_cast<std::size_t>(pool)] += next_posting - now;
            now = next_posting;
            ++postings;
            if (recording) ++before_posting[static_cast<std::size_t>(pool)];
            if (config.admissionPolicy == AdmissionPolicy::Clip) {
                pool = std::min(pool + v, w);
            } else if (pool <= w - v) {
                pool += v;
            }
            if (!recording && postings == warmup) {
                recording = true;
                window_start = now;
            }
            next_posting = now + sample(params.posting, rng);
        }
    }

    SimResult out;
    out.seedEcho = config.seed;
    out.totalSimTime = now - window_start;
    out.postingsObserved = config.numPostings - warmup;
    out.timeAvgDist.assign(static_cast<std::size_t>(w) + 1, 0.0);
    out.embeddedDist.assign(static_cast<std::size_t>(w) + 1, 0.0);

    double recorded = 0.0;
    for (double s : sojourn) recorded += s;
    double cost_integral = 0.0;
    for (int k = 0; k <= w; ++k) {
        const double s = sojourn[static_cast<std::size_t>(k)];
        out.timeAvgDist[static_cast<std::size_t>(k)] = s / recorded;
        out.meanPool += k * s / recorded;
        cost_integral += cost.holding(k) * s;
        if (k > v) cost_integral += cost.reserve(k - v) * s;
        out.embeddedDist[static_cast<std::size_t>(k)] =
            static_cast<double>(before_posting[static_cast<std::size_t>(k)]) / static_cast<double>(out.postingsObserved);
    }
    const double posting_cost = cost.cD * (params.lambda / v) * static_cast<double>(out.postingsObserved);
    out.avgCostRate = (cost_integral + posting_cost) / out.totalSimTime;
    out.lostCustomerRate = static_cast<double>(lost) / out.totalSimTime;
    return out;
}

/// Half the L1 distance.
inline double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw DomainError("total_variation: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

struct CompareTolerances {
    double tv = 0.01;
    double costRel = 0.05;
};

struct ComparisonReport {
    double tvTimeAverage = 0.0;      // TV(pi1, simulated time average)
    double maxAbsDelta = 0.0;        // max_k |pi1_k - sim_k|
    double tvEmbedded = 0.0;         // TV(flipped P, simulated pre-posting law)
    double costRelError = 0.0;       // |sim - analytic| / |analytic|
    double analyticCost = 0.0;
    double simulatedCost = 0.0;
    bool analyticValid = true;
    bool pass = false;
    CompareTolerances tolerances;
};

inline ComparisonReport compare(const LimitingDistribution& analytic, const ObjectiveBreakdown& objective,
                                const SimResult& sim, const CompareTolerances& tol = {}) {
    const std::size_t n = analytic.pi1.size();
    if (sim.timeAvgDist.size() != n || sim.embeddedDist.size() != n || analytic.embedded.size() != n)
        throw DomainError("compare: analytic and simulated distributions have different sizes");
    ComparisonReport r;
    r.tolerances = tol;
    r.tvTimeAverage = total_variation(analytic.pi1, sim.timeAvgDist);
    for (std::size_t k = 0; k < n; ++k)
        r.maxAbsDelta = std::max(r.maxAbsDelta, std::abs(analytic.pi1[k] - sim.timeAvgDist[k]));
    std::vector<double> flipped(analytic.embedded.rbegin(), analytic.embedded.rend());
    r.tvEmbedded = total_variation(flipped, sim.embeddedDist);
    r.analyticCost = objective.total;
    r.simulatedCost = sim.avgCostRate;
    const double gap = std::abs(sim.avgCostRate - objective.total);
    if (objective.total != 0.0) r.costRelError = gap / std::abs(objective.total);
    else r.costRelError = gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    r.analyticValid = analytic.valid && objective.valid;
    r.pass = r.analyticValid && r.tvTimeAverage < tol.tv && r.costRelError < tol.costRel;
    return r;
}

}  // namespace sharing_queue
