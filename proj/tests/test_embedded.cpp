#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sharing_queue/embedded.hpp"

namespace sq = sharing_queue;

namespace {

sq::SystemParams instance(int v, int w, double load, sq::PostingDistribution d) {
    return {v, w, load / d.mean, d};
}

// Geometric kernel of exponential postings written out directly.
double geometric_psi(double load, int k) {
    const double p = 1.0 / (1.0 + load);
    return p * std::pow(1.0 - p, k);
}

}  // namespace

TEST(ModelType, Examples) {
    const auto d = sq::PostingDistribution::exponential(1.0);
    EXPECT_EQ(sq::model_type(instance(2, 4, 0.5, d)), sq::ModelType::Type1);
    EXPECT_EQ(sq::model_type(instance(2, 5, 0.5, d)), sq::ModelType::Type1);
    EXPECT_EQ(sq::model_type(instance(3, 5, 0.5, d)), sq::ModelType::Type2);
    EXPECT_EQ(sq::model_type(instance(33, 35, 2.86, d)), sq::ModelType::Type2);
    EXPECT_EQ(sq::model_type(instance(5, 5, 0.5, d)), sq::ModelType::Type2);
}

TEST(SystemParams, Validation) {
    const auto d = sq::PostingDistribution::exponential(1.0);
    EXPECT_THROW(instance(6, 5, 0.5, d).validate(), sq::DomainError);
    EXPECT_THROW(instance(0, 5, 0.5, d).validate(), sq::DomainError);
    sq::SystemParams p = instance(1, 5, 0.5, d);
    p.lambda = 0.0;
    EXPECT_THROW(p.validate(), sq::DomainError);
}

TEST(Tpm, RowsAreStochastic) {
    for (auto [v, w] : {std::pair{2, 5}, {2, 6}, {3, 5}, {4, 4}, {1, 7}}) {
        for (double load : {0.3, 1.0, 4.0}) {
            for (auto d : {sq::PostingDistribution::exponential(1.3), sq::PostingDistribution::deterministic(1.3),
                           sq::PostingDistribution::erlang(2, 1.3)}) {
                const Eigen::MatrixXd m = sq::build_tpm(instance(v, w, load, d));
                ASSERT_EQ(m.rows(), w + 1);
                EXPECT_TRUE((m.array() >= 0.0).all());
                for (int j = 0; j <= w; ++j) EXPECT_NEAR(m.row(j).sum(), 1.0, 1e-12) << "v=" << v << " w=" << w << " j=" << j;
            }
        }
    }
}

TEST(Tpm, EntriesMatchShiftedKernel) {
    // v=2, w=5 (Type 1, top = 3) and v=2, w=6 (Type 1, top = 4).
    for (int w : {5, 6}) {
        const int v = 2;
        const double load = 0.7;
        const Eigen::MatrixXd m = sq::build_tpm(instance(v, w, load, sq::PostingDistribution::exponential(1.0)));
        const int top = w - v;
        for (int j = 0; j <= top; ++j) {
            const int base = std::max(j - v, 0);
            double row = 0.0;
            for (int k = 0; k < top; ++k) {
                const double expect = k < base ? 0.0 : geometric_psi(load, k - base);
                EXPECT_NEAR(m(j, k), expect, 1e-15) << "w=" << w << " j=" << j << " k=" << k;
                row += expect;
            }
            EXPECT_NEAR(m(j, top), 1.0 - row, 1e-14);
            for (int k = top + 1; k <= w; ++k) EXPECT_EQ(m(j, k), 0.0);
        }
    }
}

TEST(CharacteristicRoot, Examples) {
    EXPECT_NEAR(sq::characteristic_root(1, 0.5, 1.0), 2.0, 1e-12);
    EXPECT_NEAR(sq::characteristic_root(1, 0.8, 1.0), 1.25, 1e-12);
    EXPECT_THROW(sq::characteristic_root(1, 1.0, 1.0), sq::NoRootError);
    EXPECT_THROW(sq::characteristic_root(2, 2.2, 1.3), sq::NoRootError);
}

TEST(CharacteristicRoot, PolynomialResidual) {
    for (int v : {1, 2, 3, 5, 10, 33}) {
        for (double rho : {0.05, 0.3, 0.6, 0.9, 0.99}) {
            const double load = rho * v;
            const double z = sq::characteristic_root(v, load / 1.3, 1.3);
            EXPECT_GT(z, 1.0);
            const double r = (1.0 + load) * std::pow(z, v) - load * std::pow(z, v + 1) - 1.0;
            EXPECT_LT(std::abs(r), 1e-12 * std::pow(z, v + 1)) << "v=" << v << " rho=" << rho;
        }
    }
}

TEST(InfiniteQueueQ, MM1Examples) {
    const auto q = sq::infinite_queue_Q(instance(1, 5, 0.5, sq::PostingDistribution::exponential(1.0)));
    ASSERT_TRUE(q.root.has_value());
    EXPECT_NEAR(*q.root, 2.0, 1e-12);
    for (std::size_t i = 0; i < q.Q.size(); ++i) EXPECT_NEAR(q.Q[i], std::pow(0.5, i + 1.0), 1e-10);

    const auto q9 = sq::infinite_queue_Q(instance(1, 5, 0.9, sq::PostingDistribution::exponential(1.0)));
    EXPECT_NEAR(q9.Q[0], 0.1, 1e-12);
}

TEST(InfiniteQueueQ, OverloadHasNoSolution) {
    EXPECT_THROW(sq::infinite_queue_Q(instance(2, 5, 2.0, sq::PostingDistribution::exponential(1.0))), sq::NoRootError);
    EXPECT_THROW(sq::infinite_queue_Q(instance(2, 5, 2.5, sq::PostingDistribution::deterministic(1.0))), sq::NoRootError);
    EXPECT_THROW(sq::infinite_queue_Q(instance(2, 5, 1.0, sq::PostingDistribution::deterministic(1.0)),
                                      1e-12, sq::QRoute::ClosedForm),
                 sq::DomainError);
}

TEST(InfiniteQueueQ, ClosedFormAgreesWithTruncatedSolve) {
    for (int v : {1, 2, 5, 10}) {
        for (double rho : {0.1, 0.5, 0.9}) {
            const auto p = instance(v, 2 * v, rho * v, sq::PostingDistribution::exponential(1.3));
            const auto closed = sq::infinite_queue_Q(p, 1e-12, sq::QRoute::ClosedForm);
            const auto solved = sq::infinite_queue_Q(p, 1e-12, sq::QRoute::TruncatedSolve);
            const std::size_t n = std::min(closed.Q.size(), solved.Q.size());
            double worst = 0.0;
            for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(closed.Q[i] - solved.Q[i]));
            EXPECT_LT(worst, 1e-8) << "v=" << v << " rho=" << rho;
        }
    }
}

TEST(InfiniteQueueQ, TruncatedSolveSumsToOneAndIsStable) {
    for (auto d : {sq::PostingDistribution::deterministic(1.0), sq::PostingDistribution::erlang(3, 1.0)}) {
        const auto p = instance(4, 9, 3.2, d);
        const auto q = sq::infinite_queue_Q(p, 1e-12);
        EXPECT_NEAR(std::accumulate(q.Q.begin(), q.Q.end(), 0.0), 1.0, 1e-12);
        EXPECT_EQ(q.truncationLevel & (q.truncationLevel - 1), 0) << "level is a power of two";
        const auto finer = sq::infinite_queue_Q(p, 1e-14);
        for (int i = 0; i <= p.w; ++i) EXPECT_NEAR(q.Q[i], finer.Q[i], 1e-10);
        EXPECT_FALSE(q.root.has_value());
    }
}

TEST(EmbeddedP, TruncateAndRenormalise) {
    const auto e = sq::embedded_P(instance(1, 5, 0.5, sq::PostingDistribution::exponential(1.0)));
    EXPECT_NEAR(e.normConstant, 1.0 / (1.0 - std::pow(0.5, 5)), 1e-12);
    EXPECT_NEAR(e.normConstant, 1.0322581, 1e-7);
    ASSERT_EQ(e.P.size(), 6u);
    for (int k = 0; k <= 4; ++k) EXPECT_NEAR(e.P[k], e.normConstant * std::pow(0.5, k + 1.0), 1e-12);
    EXPECT_EQ(e.P[5], 0.0);
    EXPECT_NEAR(std::accumulate(e.P.begin(), e.P.end(), 0.0), 1.0, 1e-12);
}

TEST(EmbeddedP, FullBatchLeavesOneState) {
    const auto e = sq::embedded_P(instance(5, 5, 2.0, sq::PostingDistribution::exponential(1.0)));
    EXPECT_DOUBLE_EQ(e.P[0], 1.0);
    for (int k = 1; k <= 5; ++k) EXPECT_EQ(e.P[k], 0.0);
    EXPECT_EQ(e.modelType, sq::ModelType::Type2);
}

TEST(CeilingStationary, MatchesDenseSolve) {
    for (auto [v, top] : {std::pair{1, 6}, {2, 9}, {3, 3}, {5, 12}, {7, 40}}) {
        for (double load : {0.4, 2.5, 9.0}) {
            const auto d = sq::PostingDistribution::exponential(1.0);
            // Dense transition matrix written from the geometric kernel.
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(top + 1, top + 1);
            for (int j = 0; j <= top; ++j) {
                const int base = std::max(j - v, 0);
                double row = 0.0;
                for (int k = base; k < top; ++k) row += (m(j, k) = geometric_psi(load, k - base));
                m(j, top) = 1.0 - row;
            }
            const Eigen::VectorXd dense = oracle::dense_stationary(m);
            const auto banded = sq::detail::ceiling_stationary(sq::detail::CeilingChain(d, load, v, top));
            for (int k = 0; k <= top; ++k) EXPECT_NEAR(banded[k], dense(k), 1e-12) << "v=" << v << " top=" << top;
        }
    }
}

TEST(CapacityChain, MatchesDenseSolveOfTpmForGeneralPostings) {
    const auto d = sq::PostingDistribution::erlang(2, 0.8);
    sq::SystemParams p{3, 8, 2.0, d};
    const sq::detail::CeilingChain chain(d, p.lambda, p.v, p.w);
    Eigen::MatrixXd m(p.w + 1, p.w + 1);
    for (int j = 0; j <= p.w; ++j)
        for (int k = 0; k <= p.w; ++k) m(j, k) = chain.prob(j, k);
    const Eigen::VectorXd dense = oracle::dense_stationary(m);
    const auto P = sq::capacity_chain_P(p);
    for (int k = 0; k <= p.w; ++k) EXPECT_NEAR(P[k], dense(k), 1e-12);
}

TEST(TpmStationary, SupportedOnReachableStates) {
    const auto p = instance(3, 10, 1.5, sq::PostingDistribution::deterministic(1.0));
    const auto s = sq::tpm_stationary(p);
    ASSERT_EQ(s.size(), 11u);
    for (int k = 8; k <= 10; ++k) EXPECT_EQ(s[k], 0.0);
    EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 1.0, 1e-12);
    const Eigen::MatrixXd m = sq::build_tpm(p);
    Eigen::RowVectorXd x = Eigen::Map<const Eigen::RowVectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    EXPECT_LT((x * m - x).cwiseAbs().maxCoeff(), 1e-12);
}
