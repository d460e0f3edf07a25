#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "dist.hpp"
#include "errors.hpp"

namespace sharing_queue {

/// One platform instance: batches of `v` individual contractors posted at
/// renewal epochs into a pool of capacity `w`, drained by customers at rate
/// `lambda`. The company-reserved slot count s = w - v is derived.
struct SystemParams {
    int v = 1;
    int w = 1;
    double lambda = 1.0;
    PostingDistribution posting{};

    int reserved() const { return w - v; }
    double load() const { return lambda * posting.mean; }
    double rho() const { return load() / v; }

    void validate() const {
        if (v < 1) throw DomainError("batch size v must be >= 1");
        if (w < 1) throw DomainError("capacity w must be >= 1");
        if (v > w) throw DomainError("batch size v must not exceed capacity w (v <= w)");
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw DomainError("consumption rate lambda must be a positive finite number");
        if (!(posting.mean > 0.0) || !std::isfinite(posting.mean))
            throw DomainError("posting mean must be a positive finite number");
        if (posting.kind == DistKind::Erlang && posting.shape < 1)
            throw DomainError("erlang shape must be >= 1");
    }

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

enum class ModelType { Type1, Type2 };

inline std::string_view to_string(ModelType t) { return t == ModelType::Type1 ? "type1" : "type2"; }

inline ModelType model_type(const SystemParams& params) {
    return params.w >= 2 * params.v ? ModelType::Type1 : ModelType::Type2;
}

struct EmbeddedSolution {
    ModelType modelType = ModelType::Type1;
    std::vector<double> P;        // w+1 entries, zero above w - v
    double normConstant = 1.0;    // κ = 1 / Σ_{i<=w-v} Q_i
    std::optional<double> root;   // z0, exponential postings only
    std::int64_t truncationLevel = 0;
};

namespace detail {

// Transition law of the batch-service chain X' = min((X - v)^+ + A, top),
// A ~ ψ: row j holds ψ(k - base) for base = (j - v)^+ and k < top, and the
// remaining mass at column `top`.
class CeilingChain {
public:
    CeilingChain(const PostingDistribution& dist, double lambda, int v, std::int64_t top)
        : v_(v), top_(top) {
        PsiRow row = psi_row(dist, lambda, top);
        psi_ = std::move(row.values);
        // suffix_[i] = Σ_{t >= i} ψ(t)
        suffix_.assign(psi_.size() + 1, 0.0);
        suffix_.back() = row.tail;
        for (std::size_t i = psi_.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + psi_[i];
    }

    std::int64_t top() const { return top_; }
    int batch() const { return v_; }

    std::int64_t base(std::int64_t j) const { return std::max<std::int64_t>(j - v_, 0); }

    double prob(std::int64_t j, std::int64_t k) const {
        const std::int64_t b = base(j);
        if (k < b || k > top_) return 0.0;
        if (k < top_) return psi_[static_cast<std::size_t>(k - b)];
        return suffix_[static_cast<std::size_t>(top_ - b)];
    }

private:
    int v_;
    std::int64_t top_;
    std::vector<double> psi_;
    std::vector<double> suffix_;
};

// Stationary vector of a CeilingChain on states 0..top.
//
// Solves (I - M^T) x = 0 with the last equation replaced by Σx = 1. Row r of
// I - M^T only reaches columns <= r + v, so plain Gaussian elimination keeps
// U banded with width v and every update stays inside a window of v + 1
// columns. Memory is O(top * v) and no L factor is stored since the
// right-hand side is e_top, which elimination never changes.
inline std::vector<double> ceiling_stationary(const CeilingChain& chain) {
    const std::int64_t top = chain.top();
    const std::int64_t n = top + 1;
    if (top == 0) return {1.0};
    const std::int64_t band = std::min<std::int64_t>(chain.batch(), top);
    const std::int64_t width = band + 1;

    auto original = [&](std::int64_t r, std::int64_t c) -> double {
        if (r == top) return 1.0;
        return (r == c ? 1.0 : 0.0) - chain.prob(c, r);
    };

    // window[r * width + (c % width)] = current A(r, c) for c in [pivot, pivot + band]
    std::vector<double> window(static_cast<std::size_t>(n * width), 0.0);
    auto cell = [&](std::int64_t r, std::int64_t c) -> double& {
        return window[static_cast<std::size_t>(r * width + c % width)];
    };
    for (std::int64_t c = 0; c <= std::min(band, top); ++c)
        for (std::int64_t r = 0; r < n; ++r) cell(r, c) = original(r, c);

    // upper[c * width + d] = U(c, c + d)
    std::vector<double> upper(static_cast<std::size_t>(n * width), 0.0);

    for (std::int64_t c = 0; c < n; ++c) {
        const std::int64_t last = std::min(c + band, top);
        for (std::int64_t j = c; j <= last; ++j) upper[static_cast<std::size_t>(c * width + (j - c))] = cell(c, j);
        const double pivot = cell(c, c);
        if (!(std::abs(pivot) > 0.0) || !std::isfinite(pivot))
            throw TruncationError("singular pivot while solving embedded chain");
        for (std::int64_t r = c + 1; r < n; ++r) {
            const double factor = cell(r, c) / pivot;
            if (factor == 0.0) continue;
            for (std::int64_t j = c + 1; j <= last; ++j) cell(r, j) -= factor * upper[static_cast<std::size_t>(c * width + (j - c))];
        }
        // Column c leaves the window, column c + width enters untouched.
        const std::int64_t entering = c + width;
        if (entering <= top)
            for (std::int64_t r = c + 1; r < n; ++r) cell(r, entering) = original(r, entering);
    }

    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t c = top; c >= 0; --c) {
        double acc = (c == top) ? 1.0 : 0.0;
        const std::int64_t last = std::min(c + band, top);
        for (std::int64_t j = c + 1; j <= last; ++j)
            acc -= upper[static_cast<std::size_t>(c * width + (j - c))] * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(c)] = acc / upper[static_cast<std::size_t>(c * width)];
    }
    return x;
}

}  // namespace detail

/// Transition matrix of the embedded chain as laid out for the two model
/// types. Mass beyond column w - v is absorbed there; states above w - v,
/// which are never entered, get a self-loop so every row is stochastic.
inline Eigen::MatrixXd build_tpm(const SystemParams& params) {
    params.validate();
    const int w = params.w;
    const int v = params.v;
    const int top = w - v;
    const bool type1 = model_type(params) == ModelType::Type1;
    detail::CeilingChain chain(params.posting, params.lambda, v, top);

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(w + 1, w + 1);
    for (int j = 0; j <= w; ++j) {
        const bool live = j <= v || (type1 && j <= top);
        if (!live) {
            m(j, j) = 1.0;
            continue;
        }
        for (int k = 0; k <= top; ++k) m(j, k) = chain.prob(j, k);
    }
    return m;
}

/// Real root z0 > 1 of (1 + λa) z^v - λa z^{v+1} - 1 = 0.
///
/// Factoring out (z - 1) leaves Σ_{i=1..v} y^i = λa with y = 1/z, which is
/// increasing on (0, 1), so the root is bracketed and unique whenever λa < v.
inline double characteristic_root(int v, double lambda, double mean) {
    if (v < 1) throw DomainError("characteristic_root: v must be >= 1");
    if (!(lambda > 0.0) || !(mean > 0.0)) throw DomainError("characteristic_root: lambda and mean must be > 0");
    const double load = lambda * mean;
    if (load >= v)
        throw NoRootError("no characteristic root beyond 1: offered load lambda*a/v = " +
                          std::to_string(load / v) + " is not below 1");
    auto partial = [&](double y) {
        double s = 0.0;
        for (int i = 0; i < v; ++i) s = (s + 1.0) * y;
        return s - load;
    };
    std::uintmax_t iters = 200;
    auto [lo, hi] = boost::math::tools::toms748_solve(partial, 0.0, 1.0, -load, v - load,
                                                      boost::math::tools::eps_tolerance<double>(53), iters);
    const double y = 0.5 * (lo + hi);
    double z = 1.0 / y;
    // One Newton polish on the original polynomial.
    const double f = (1.0 + load) * std::pow(z, v) - load * std::pow(z, v + 1) - 1.0;
    const double df = v * (1.0 + load) * std::pow(z, v - 1) - (v + 1) * load * std::pow(z, v);
    if (df != 0.0) {
        const double polished = z - f / df;
        if (polished > 1.0) z = polished;
    }
    return z;
}

enum class QRoute { Auto, ClosedForm, TruncatedSolve };

struct QSolution {
    std::vector<double> Q;
    std::optional<double> root;
    std::int64_t truncationLevel = 0;
};

inline constexpr std::int64_t kMaxTruncationLevel = std::int64_t{1} << 16;

/// Embedded stationary vector of the infinite-capacity queue.
///
/// Exponential postings use the geometric law (1 - 1/z0) z0^{-i} up to the
/// first index below `eps`. Otherwise the chain is truncated at level N with
/// the overflow absorbed in state N and N doubles until both the mass above
/// N/2 and the movement of Q_0..Q_{w-v} drop below `eps`.
inline QSolution infinite_queue_Q(const SystemParams& params, double eps = 1e-12, QRoute route = QRoute::Auto) {
    params.validate();
    if (!(eps > 0.0)) throw DomainError("infinite_queue_Q: eps must be > 0");
    if (params.rho() >= 1.0)
        throw NoRootError("no stationary distribution for the infinite queue: lambda*a/v = " +
                          std::to_string(params.rho()) + " >= 1");
    const bool exponential = params.posting.kind == DistKind::Exponential;
    if (route == QRoute::ClosedForm && !exponential)
        throw DomainError("closed-form Q requires exponential postings");

    if (route == QRoute::ClosedForm || (route == QRoute::Auto && exponential)) {
        const double z0 = characteristic_root(params.v, params.lambda, params.posting.mean);
        const double ratio = 1.0 / z0;
        QSolution out;
        out.root = z0;
        double q = 1.0 - ratio;
        for (std::int64_t i = 0;; ++i) {
            out.Q.push_back(q);
            if (i >= params.w && q < eps) break;
            q *= ratio;
        }
        out.truncationLevel = static_cast<std::int64_t>(out.Q.size()) - 1;
        return out;
    }

    const auto watch = static_cast<std::size_t>(params.reserved()) + 1;
    std::int64_t level = 64;
    while (level < 2 * (params.w + 1)) level *= 2;
    std::vector<double> previous;
    for (; level <= kMaxTruncationLevel; level *= 2) {
        detail::CeilingChain chain(params.posting, params.lambda, params.v, level);
        std::vector<double> q = detail::ceiling_stationary(chain);
        double tail = 0.0;
        for (std::int64_t i = level / 2 + 1; i <= level; ++i) tail += q[static_cast<std::size_t>(i)];
        double moved = previous.empty() ? 1.0 : 0.0;
        if (!previous.empty())
            for (std::size_t i = 0; i < watch; ++i) moved = std::max(moved, std::abs(q[i] - previous[i]));
        if (tail < eps && moved < eps) {
            QSolution out;
            out.Q = std::move(q);
            if (exponential) out.root = characteristic_root(params.v, params.lambda, params.posting.mean);
            out.truncationLevel = level;
            return out;
        }
        previous = std::move(q);
    }
    throw TruncationError("truncated solve for Q did not converge below level " +
                          std::to_string(kMaxTruncationLevel));
}

/// Finite-capacity embedded vector by truncation and renormalisation:
/// P_k = κ Q_k for k <= w - v, zero above.
inline EmbeddedSolution embedded_P(const SystemParams& params, double eps = 1e-12, QRoute route = QRoute::Auto) {
    QSolution q = infinite_queue_Q(params, eps, route);
    const auto reach = static_cast<std::size_t>(params.reserved());
    double kept = 0.0;
    for (std::size_t i = 0; i <= reach; ++i) kept += q.Q[i];

    EmbeddedSolution out;
    out.modelType = model_type(params);
    out.normConstant = 1.0 / kept;
    out.root = q.root;
    out.truncationLevel = q.truncationLevel;
    out.P.assign(static_cast<std::size_t>(params.w) + 1, 0.0);
    for (std::size_t i = 0; i <= reach; ++i) out.P[i] = q.Q[i] / kept;
    return out;
}

/// Stationary vector of build_tpm's chain on its reachable states 0..w-v,
/// zero-padded to w+1 entries.
inline std::vector<double> tpm_stationary(const SystemParams& params) {
    params.validate();
    detail::CeilingChain chain(params.posting, params.lambda, params.v, params.reserved());
    std::vector<double> p = detail::ceiling_stationary(chain);
    p.resize(static_cast<std::size_t>(params.w) + 1, 0.0);
    return p;
}

/// Pre-posting distribution of the customer-side queue with the full
/// capacity w: X' = min((X - v)^+ + A, w). This is the embedded law of the
/// pool when a batch that does not fit is clipped to the free room.
/// No load condition applies since the state space is finite.
inline std::vector<double> capacity_chain_P(const SystemParams& params) {
    params.validate();
    detail::CeilingChain chain(params.posting, params.lambda, params.v, params.w);
    return detail::ceiling_stationary(chain);
}

}  // namespace sharing_queue
