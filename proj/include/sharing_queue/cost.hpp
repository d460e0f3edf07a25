#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "embedded.hpp"
#include "errors.hpp"
#include "limiting.hpp"

namespace sharing_queue {

/// Linear cost coefficients, optionally overridden by per-state tables.
/// `holdingTable[k]` replaces c_H * k for a pool of k contractors and
/// `reserveTable[n]` replaces c_R * n for n reserved contractors in use.
struct CostParams {
    double cH = 0.0;
    double cR = 0.0;
    double cD = 0.0;
    std::optional<std::vector<double>> holdingTable;
    std::optional<std::vector<double>> reserveTable;

    void validate() const {
        for (double c : {cH, cR, cD})
            if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("cost coefficients must be finite and >= 0");
    }

    double holding(int k) const {
        if (holdingTable) return table_at(*holdingTable, k, "holding");
        return cH * k;
    }
    double reserve(int n) const {
        if (reserveTable) return table_at(*reserveTable, n, "reserve");
        return cR * n;
    }

private:
    static double table_at(const std::vector<double>& t, int i, const char* name) {
        if (i < 0 || static_cast<std::size_t>(i) >= t.size())
            throw DomainError(std::string(name) + " cost table too short for state " + std::to_string(i));
        return t[static_cast<std::size_t>(i)];
    }
};

struct ObjectiveBreakdown {
    double holding = 0.0;
    double reserve = 0.0;
    double posting = 0.0;
    double total = 0.0;
    double expectedPool = 0.0;
    double capability = 0.0;
    bool valid = true;
};

/// ϱ = [λa/w - 1]^+
inline double capability(double lambda, double mean, int w) {
    if (!(lambda > 0.0) || !(mean > 0.0) || w < 1) throw DomainError("capability: inputs must be positive");
    return std::max(lambda * mean / w - 1.0, 0.0);
}

/// Posting cost per unit time: c_D (λ/v) times the posting rate 1/a.
inline double posting_rate_cost(const SystemParams& params, const CostParams& cost) {
    return cost.cD * (params.lambda / params.v) * (1.0 / params.posting.mean);
}

inline ObjectiveBreakdown objective(const SystemParams& params, const CostParams& cost,
                                    const LimitingDistribution& dist) {
    params.validate();
    cost.validate();
    if (dist.pi1.size() != static_cast<std::size_t>(params.w) + 1)
        throw DomainError("objective: distribution size does not match w+1");
    ObjectiveBreakdown out;
    for (int k = 0; k <= params.w; ++k) {
        const double p = dist.pi1[static_cast<std::size_t>(k)];
        out.holding += cost.holding(k) * p;
        out.expectedPool += k * p;
        if (k > params.v) out.reserve += cost.reserve(k - params.v) * p;
    }
    out.posting = posting_rate_cost(params, cost);
    out.total = out.holding + out.reserve + out.posting;
    out.capability = capability(params.lambda, params.posting.mean, params.w);
    out.valid = dist.valid;
    return out;
}

struct OptimizeOptions {
    LadderForm form = LadderForm::LevelCrossing;
    double eps = 1e-12;
    bool enforceCapability = false;  // treat cells with ϱ > 0 as invalid
};

struct CurvePoint {
    int v = 0;
    ObjectiveBreakdown breakdown;
    std::string error;  // solver failure for this v, empty otherwise
};

struct OptimizationResult {
    int v0 = 0;
    double phiMin = std::numeric_limits<double>::quiet_NaN();
    std::vector<CurvePoint> curve;
    bool anyInvalid = false;
};

namespace detail {

inline CurvePoint evaluate_point(const SystemParams& params, const CostParams& cost, const OptimizeOptions& opts) {
    CurvePoint point;
    point.v = params.v;
    try {
        point.breakdown = objective(params, cost, solve_limiting(params, opts.form, opts.eps));
        if (opts.enforceCapability && point.breakdown.capability > 0.0) point.breakdown.valid = false;
    } catch (const NoRootError& e) {
        point.error = e.what();
    } catch (const TruncationError& e) {
        point.error = e.what();
    }
    if (!point.error.empty()) {
        point.breakdown = ObjectiveBreakdown{};
        point.breakdown.total = std::numeric_limits<double>::quiet_NaN();
        point.breakdown.posting = posting_rate_cost(params, cost);
        point.breakdown.capability = capability(params.lambda, params.posting.mean, params.w);
        point.breakdown.valid = false;
    }
    return point;
}

}  // namespace detail

/// Exhaustive search over v = 1..v_max; ties go to the smallest v and
/// invalid points stay in the curve but never win.
inline OptimizationResult optimize_v(SystemParams base, const CostParams& cost, int v_max,
                                     const OptimizeOptions& opts = {}) {
    if (v_max < 1 || v_max > base.w) throw DomainError("optimize_v: v_max must satisfy 1 <= v_max <= w");
    OptimizationResult out;
    for (int v = 1; v <= v_max; ++v) {
        base.v = v;
        CurvePoint point = detail::evaluate_point(base, cost, opts);
        if (!point.breakdown.valid) {
            out.anyInvalid = true;
        } else if (out.v0 == 0 || point.breakdown.total < out.phiMin) {
            out.v0 = v;
            out.phiMin = point.breakdown.total;
        }
        out.curve.push_back(std::move(point));
    }
    if (out.v0 == 0) throw NoValidPointError("optimize_v: no batch size in 1..v_max produced a valid distribution");
    return out;
}

struct SweepCell {
    int v = 0;
    int w = 0;
    bool feasible = false;  // v <= w
    ObjectiveBreakdown breakdown;
    std::string error;
};

/// Cost surface over (v, w), row-major by w then v. Cells with v > w are
/// marked infeasible and left unevaluated.
inline std::vector<SweepCell> sweep(SystemParams base, const CostParams& cost, const std::vector<int>& v_range,
                                    const std::vector<int>& w_range, const OptimizeOptions& opts = {}) {
    if (v_range.empty() || w_range.empty()) throw DomainError("sweep: ranges must be non-empty");
    std::vector<SweepCell> cells;
    cells.reserve(v_range.size() * w_range.size());
    for (int w : w_range) {
        for (int v : v_range) {
            SweepCell cell;
            cell.v = v;
            cell.w = w;
            cell.feasible = v >= 1 && w >= 1 && v <= w;
            if (cell.feasible) {
                base.v = v;
                base.w = w;
                CurvePoint point = detail::evaluate_point(base, cost, opts);
                cell.breakdown = point.breakdown;
                cell.error = std::move(point.error);
            } else {
                cell.breakdown.valid = false;
                cell.breakdown.total = std::numeric_limits<double>::quiet_NaN();
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

}  // namespace sharing_queue
