// Batch-size optimization for a platform posting exponential batches with
// mean interval 1.3 into a pool of 35, drained at rate 2.2.

#include <cstdio>

#include "sharing_queue/sharing_queue.hpp"

namespace sq = sharing_queue;

int main() {
    sq::SystemParams base{1, 35, 2.2, sq::PostingDistribution::exponential(1.3)};
    sq::CostParams cost{3.0, 1.0, 80.0, {}, {}};

    for (sq::LadderForm form : {sq::LadderForm::LevelCrossing, sq::LadderForm::AsPrinted}) {
        const auto result = sq::optimize_v(base, cost, 35, {form});
        std::printf("%-15s v0 = %2d  phi = %.4f\n", std::string(sq::to_string(form)).c_str(), result.v0,
                    result.phiMin);
        for (const auto& p : result.curve) {
            if (p.error.empty())
                std::printf("  v=%2d total=%9.4f holding=%9.4f reserve=%8.4f posting=%8.4f%s\n", p.v,
                            p.breakdown.total, p.breakdown.holding, p.breakdown.reserve, p.breakdown.posting,
                            p.breakdown.valid ? "" : "  (invalid)");
            else
                std::printf("  v=%2d %s\n", p.v, p.error.c_str());
        }
    }
    std::printf("capability factor: %g\n", sq::capability(2.2, 1.3, 35));
    return 0;
}
