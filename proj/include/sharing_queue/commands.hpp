#pragma once

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "cost.hpp"
#include "embedded.hpp"
#include "errors.hpp"
#include "limiting.hpp"
#include "sim.hpp"

namespace sharing_queue {

enum ExitStatus : int {
    kExitOk = 0,
    kExitInvalidAnalytic = 1,
    kExitConfig = 2,
    kExitNumerical = 3,
};

/// One emitted result: the JSON document (always built) plus its CSV
/// rendering when that format was requested.
struct Emitted {
    nlohmann::ordered_json doc;
    std::string csv;
    int status = kExitOk;

    std::string text(OutputFormat format) const {
        return format == OutputFormat::Csv ? csv : doc.dump(2) + "\n";
    }
};

namespace detail {

using ojson = nlohmann::ordered_json;

// Shortest representation that reads back to the same double.
inline std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

inline ojson nullable(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

inline ojson config_json(const RunConfig& c) {
    ojson system = {{"v", c.params.v}, {"w", c.params.w}, {"lambda", c.params.lambda},
                    {"posting", {{"kind", std::string(to_string(c.params.posting.kind))},
                                 {"mean", c.params.posting.mean}}}};
    if (c.params.posting.kind == DistKind::Erlang) system["posting"]["shape"] = c.params.posting.shape;
    ojson cost = {{"ch", c.cost.cH}, {"cr", c.cost.cR}, {"cd", c.cost.cD}};
    if (c.cost.holdingTable) cost["holding_table"] = *c.cost.holdingTable;
    if (c.cost.reserveTable) cost["reserve_table"] = *c.cost.reserveTable;
    ojson options = {{"ladder", std::string(to_string(c.ladder))},
                     {"eps", c.eps},
                     {"format", c.format == OutputFormat::Json ? "json" : "csv"},
                     {"enforce_capability", c.enforceCapability}};
    if (c.command == Command::Optimize) options["vmax"] = c.vmax;
    if (c.command == Command::Sweep) {
        options["v_range"] = {c.vRange.front(), c.vRange.back()};
        options["w_range"] = {c.wRange.front(), c.wRange.back()};
    }
    if (c.command == Command::Compare) {
        options["tv_tolerance"] = c.tolerances.tv;
        options["cost_tolerance"] = c.tolerances.costRel;
    }
    ojson doc = {{"system", system}, {"cost", cost}};
    if (c.command == Command::Simulate || c.command == Command::Compare) {
        doc["sim"] = {{"seed", c.sim.seed},
                      {"postings", c.sim.numPostings},
                      {"warmup", c.sim.warmupFraction},
                      {"policy", std::string(to_string(c.sim.admissionPolicy))}};
    }
    doc["options"] = options;
    return doc;
}

inline ojson breakdown_json(const ObjectiveBreakdown& b) {
    return {{"holding", nullable(b.holding)},     {"reserve", nullable(b.reserve)},
            {"posting", nullable(b.posting)},     {"total", nullable(b.total)},
            {"expected_pool", nullable(b.expectedPool)}, {"capability", b.capability},
            {"valid", b.valid}};
}

inline ojson limiting_json(const LimitingDistribution& d) {
    return {{"form", std::string(to_string(d.form))}, {"embedded_P", d.embedded}, {"pi", d.pi},
            {"pi1", d.pi1},     {"g_vector", d.gVector}, {"valid", d.valid},
            {"negative_states", d.negativeStates}};
}

inline ojson sim_json(const SimResult& s) {
    return {{"seed", s.seedEcho},
            {"time_avg_dist", s.timeAvgDist},
            {"embedded_dist", s.embeddedDist},
            {"lost_customer_rate", s.lostCustomerRate},
            {"avg_cost_rate", s.avgCostRate},
            {"mean_pool", s.meanPool},
            {"total_sim_time", s.totalSimTime},
            {"postings_observed", s.postingsObserved}};
}

inline ojson report_json(const ComparisonReport& r) {
    return {{"tv_time_average", r.tvTimeAverage}, {"max_abs_delta", r.maxAbsDelta},
            {"tv_embedded", r.tvEmbedded},        {"cost_rel_error", nullable(r.costRelError)},
            {"analytic_cost", nullable(r.analyticCost)}, {"simulated_cost", r.simulatedCost},
            {"analytic_valid", r.analyticValid},  {"pass", r.pass}};
}

inline std::string config_comment(const RunConfig& c) { return "# config: " + config_json(c).dump() + "\n"; }

inline std::string breakdown_csv(const ObjectiveBreakdown& b) {
    return num(b.holding) + "," + num(b.reserve) + "," + num(b.posting) + "," + num(b.total) + "," +
           num(b.expectedPool) + "," + (b.valid ? "true" : "false") + "," + num(b.capability);
}

}  // namespace detail

inline Emitted run_solve(const RunConfig& cfg) {
    using detail::ojson;
    Emitted e;
    const LimitingDistribution dist = solve_limiting(cfg.params, cfg.ladder, cfg.eps);
    const ObjectiveBreakdown breakdown = objective(cfg.params, cfg.cost, dist);

    ojson result = {{"model_type", std::string(to_string(model_type(cfg.params)))},
                    {"distribution", detail::limiting_json(dist)},
                    {"objective", detail::breakdown_json(breakdown)}};
    // The infinite-queue quantities exist only below unit load.
    if (cfg.params.rho() < 1.0) {
        const EmbeddedSolution emb = embedded_P(cfg.params, cfg.eps);
        const std::vector<double> tpm = tpm_stationary(cfg.params);
        double gap = 0.0;
        for (std::size_t k = 0; k < tpm.size(); ++k) gap = std::max(gap, std::abs(tpm[k] - emb.P[k]));
        result["truncated_P"] = emb.P;
        result["norm_constant"] = emb.normConstant;
        result["truncation_level"] = emb.truncationLevel;
        result["root"] = emb.root ? ojson(*emb.root) : ojson(nullptr);
        result["tpm_gap"] = gap;
    } else {
        result["truncated_P"] = nullptr;
        result["note"] = "lambda*a/v >= 1: infinite-queue vector, norm constant and root are undefined";
    }
    e.doc = {{"command", "solve"}, {"config", detail::config_json(cfg)}, {"result", result}};

    std::ostringstream csv;
    csv << detail::config_comment(cfg) << "k,P,pi,pi1\n";
    for (std::size_t k = 0; k < dist.pi.size(); ++k)
        csv << k << "," << detail::num(dist.embedded[k]) << "," << detail::num(dist.pi[k]) << ","
            << detail::num(dist.pi1[k]) << "\n";
    e.csv = csv.str();
    e.status = dist.valid ? kExitOk : kExitInvalidAnalytic;
    return e;
}

inline Emitted run_optimize(const RunConfig& cfg) {
    using detail::ojson;
    Emitted e;
    OptimizeOptions opts{cfg.ladder, cfg.eps, cfg.enforceCapability};
    ojson result;
    std::ostringstream csv;
    csv << detail::config_comment(cfg) << "v,holding,reserve,posting,total,expected_pool,valid,capability,error\n";
    try {
        const OptimizationResult r = optimize_v(cfg.params, cfg.cost, cfg.vmax, opts);
        ojson curve = ojson::array();
        for (const auto& p : r.curve) {
            ojson point = {{"v", p.v}};
            point.update(detail::breakdown_json(p.breakdown));
            if (!p.error.empty()) point["error"] = p.error;
            curve.push_back(point);
            csv << p.v << "," << detail::breakdown_csv(p.breakdown) << "," << p.error << "\n";
        }
        result = {{"v0", r.v0}, {"phi_min", r.phiMin}, {"any_invalid", r.anyInvalid}, {"curve", curve}};
    } catch (const NoValidPointError& err) {
        result = {{"error", {{"type", "NoValidPoint"}, {"message", err.what()}}}};
        e.status = kExitInvalidAnalytic;
    }
    e.doc = {{"command", "optimize"}, {"config", detail::config_json(cfg)}, {"result", result}};
    e.csv = csv.str();
    return e;
}

inline Emitted run_sweep(const RunConfig& cfg) {
    using detail::ojson;
    Emitted e;
    OptimizeOptions opts{cfg.ladder, cfg.eps, cfg.enforceCapability};
    const auto cells = sweep(cfg.params, cfg.cost, cfg.vRange, cfg.wRange, opts);
    ojson grid = ojson::array();
    std::ostringstream csv;
    csv << detail::config_comment(cfg) << "v,w,holding,reserve,posting,total,valid,capability\n";
    for (const auto& c : cells) {
        ojson cell = {{"v", c.v}, {"w", c.w}, {"feasible", c.feasible}};
        if (c.feasible) cell.update(detail::breakdown_json(c.breakdown));
        if (!c.error.empty()) cell["error"] = c.error;
        grid.push_back(cell);
        const auto& b = c.breakdown;
        csv << c.v << "," << c.w << "," << detail::num(b.holding) << "," << detail::num(b.reserve) << ","
            << detail::num(b.posting) << "," << detail::num(b.total) << "," << (b.valid ? "true" : "false") << ","
            << detail::num(b.capability) << "\n";
    }
    e.doc = {{"command", "sweep"}, {"config", detail::config_json(cfg)}, {"result", {{"cells", grid}}}};
    e.csv = csv.str();
    return e;
}

inline Emitted run_simulate(const RunConfig& cfg) {
    Emitted e;
    const SimResult s = run_sim(cfg.params, cfg.cost, cfg.sim);
    e.doc = {{"command", "simulate"}, {"config", detail::config_json(cfg)}, {"result", detail::sim_json(s)}};
    std::ostringstream csv;
    csv << detail::config_comment(cfg) << "k,time_avg,embedded\n";
    for (std::size_t k = 0; k < s.timeAvgDist.size(); ++k)
        csv << k << "," << detail::num(s.timeAvgDist[k]) << "," << detail::num(s.embeddedDist[k]) << "\n";
    e.csv = csv.str();
    return e;
}

/// Simulates under both admission policies and compares each against both
/// analytic routes. The configured ladder and policy decide the verdict.
inline Emitted run_compare(const RunConfig& cfg) {
    using detail::ojson;
    Emitted e;
    std::ostringstream csv;
    csv << detail::config_comment(cfg)
        << "ladder,policy,tv_time_average,max_abs_delta,tv_embedded,cost_rel_error,analytic_cost,simulated_cost,"
           "analytic_valid,pass\n";

    ojson analytic = ojson::object();
    ojson reports = ojson::array();
    ojson simulations = ojson::object();
    bool verdict = false;
    bool verdict_valid = true;
    bool have_primary = false;

    std::vector<std::pair<AdmissionPolicy, SimResult>> sims;
    for (AdmissionPolicy policy : {AdmissionPolicy::Clip, AdmissionPolicy::RejectIfNoFullRoom}) {
        SimConfig sc = cfg.sim;
        sc.admissionPolicy = policy;
        sims.emplace_back(policy, run_sim(cfg.params, cfg.cost, sc));
        simulations[std::string(to_string(policy))] = detail::sim_json(sims.back().second);
    }
    for (LadderForm form : {LadderForm::LevelCrossing, LadderForm::AsPrinted}) {
        const std::string form_name(to_string(form));
        LimitingDistribution dist;
        try {
            dist = solve_limiting(cfg.params, form, cfg.eps);
        } catch (const NoRootError& err) {
            analytic[form_name] = {{"error", {{"type", "NoRoot"}, {"message", err.what()}}}};
            if (form == cfg.ladder) throw;
            continue;
        }
        const ObjectiveBreakdown b = objective(cfg.params, cfg.cost, dist);
        analytic[form_name] = {{"distribution", detail::limiting_json(dist)}, {"objective", detail::breakdown_json(b)}};
        for (const auto& [policy, sim] : sims) {
            const ComparisonReport r = compare(dist, b, sim, cfg.tolerances);
            ojson entry = {{"ladder", form_name}, {"policy", std::string(to_string(policy))}};
            entry.update(detail::report_json(r));
            reports.push_back(entry);
            csv << form_name << "," << to_string(policy) << "," << detail::num(r.tvTimeAverage) << ","
                << detail::num(r.maxAbsDelta) << "," << detail::num(r.tvEmbedded) << ","
                << detail::num(r.costRelError) << "," << detail::num(r.analyticCost) << ","
                << detail::num(r.simulatedCost) << "," << (r.analyticValid ? "true" : "false") << ","
                << (r.pass ? "true" : "false") << "\n";
            if (form == cfg.ladder && policy == cfg.sim.admissionPolicy) {
                verdict = r.pass;
                verdict_valid = r.analyticValid;
                have_primary = true;
            }
        }
    }
    ojson result = {{"model_type", std::string(to_string(model_type(cfg.params)))},
                    {"verdict", {{"ladder", std::string(to_string(cfg.ladder))},
                                 {"policy", std::string(to_string(cfg.sim.admissionPolicy))},
                                 {"pass", have_primary && verdict}}},
                    {"reports", reports},
                    {"analytic", analytic},
                    {"simulations", simulations}};
    e.doc = {{"command", "compare"}, {"config", detail::config_json(cfg)}, {"result", result}};
    e.csv = csv.str();
    e.status = verdict_valid ? kExitOk : kExitInvalidAnalytic;
    return e;
}

inline Emitted run_command(const RunConfig& cfg) {
    switch (cfg.command) {
        case Command::Solve: return run_solve(cfg);
        case Command::Optimize: return run_optimize(cfg);
        case Command::Sweep: return run_sweep(cfg);
        case Command::Simulate: return run_simulate(cfg);
        case Command::Compare: return run_compare(cfg);
    }
    return {};
}

/// Structured error record emitted in place of a result document.
inline Emitted error_document(Command command, const std::string& type, const std::string& message, int status) {
    Emitted e;
    e.doc = {{"command", std::string(to_string(command))},
             {"error", {{"type", type}, {"message", message}}}};
    e.csv = "# error: " + type + ": " + message + "\n";
    e.status = status;
    return e;
}

/// Resolve, run, and map failures onto exit statuses.
inline Emitted execute(Command command, const RawConfig& raw) {
    RunConfig cfg;
    try {
        cfg = resolve(command, raw);
    } catch (const ConfigError& err) {
        return error_document(command, "ConfigError", err.what(), kExitConfig);
    }
    try {
        return run_command(cfg);
    } catch (const NoRootError& err) {
        return error_document(command, "NoRoot", err.what(), kExitNumerical);
    } catch (const TruncationError& err) {
        return error_document(command, "Truncation", err.what(), kExitNumerical);
    } catch (const DomainError& err) {
        return error_document(command, "DomainError", err.what(), kExitConfig);
    } catch (const std::exception& err) {
        return error_document(command, "InternalError", err.what(), kExitNumerical);
    }
}

}  // namespace sharing_queue
