#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cost.hpp"
#include "dist.hpp"
#include "embedded.hpp"
#include "errors.hpp"
#include "limiting.hpp"
#include "sim.hpp"

namespace sharing_queue {

enum class OutputFormat { Json, Csv };

/// Values as read from a config file or from flags; anything left unset
/// falls back to a default or is reported missing by `resolve`.
struct RawConfig {
    std::optional<int> v, w, shape, vmax;
    std::optional<double> lambda, mean, cH, cR, cD, warmup, eps, tvTol, costTol;
    std::optional<std::string> dist, policy, format, out, ladder;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> postings;
    std::optional<std::vector<int>> vRange, wRange;  // inclusive [lo, hi]
    std::optional<std::vector<double>> holdingTable, reserveTable;
    std::optional<bool> enforceCapability;

    /// Fields set in `over` replace ours.
    void merge(const RawConfig& over) {
        auto take = [](auto& dst, const auto& src) { if (src) dst = src; };
        take(v, over.v); take(w, over.w); take(shape, over.shape); take(vmax, over.vmax);
        take(lambda, over.lambda); take(mean, over.mean);
        take(cH, over.cH); take(cR, over.cR); take(cD, over.cD);
        take(warmup, over.warmup); take(eps, over.eps); take(tvTol, over.tvTol); take(costTol, over.costTol);
        take(dist, over.dist); take(policy, over.policy); take(format, over.format); take(out, over.out);
        take(ladder, over.ladder); take(seed, over.seed); take(postings, over.postings);
        take(vRange, over.vRange); take(wRange, over.wRange);
        take(holdingTable, over.holdingTable); take(reserveTable, over.reserveTable);
        take(enforceCapability, over.enforceCapability);
    }
};

enum class Command { Solve, Optimize, Sweep, Simulate, Compare };

inline std::string_view to_string(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::Optimize: return "optimize";
        case Command::Sweep: return "sweep";
        case Command::Simulate: return "simulate";
        case Command::Compare: return "compare";
    }
    return "?";
}

/// Fully validated configuration for one command.
struct RunConfig {
    Command command = Command::Solve;
    SystemParams params;
    CostParams cost;
    SimConfig sim;
    int vmax = 1;
    std::vector<int> vRange;
    std::vector<int> wRange;
    LadderForm ladder = LadderForm::LevelCrossing;
    double eps = 1e-12;
    CompareTolerances tolerances;
    OutputFormat format = OutputFormat::Json;
    std::string out;  // empty = stdout
    bool enforceCapability = false;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& node, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!node.is_object()) throw ConfigError("'" + where + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : node.items())
        if (!ok.count(key)) throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

template <typename T>
void read(const json& node, const char* key, const std::string& where, std::optional<T>& dst) {
    if (!node.contains(key)) return;
    try {
        dst = node.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
    }
}

inline std::vector<int> expand_range(const std::vector<int>& bounds, const char* name) {
    if (bounds.size() != 2) throw ConfigError(std::string(name) + " must be [lo, hi]");
    if (bounds[0] < 1 || bounds[1] < bounds[0]) throw ConfigError(std::string(name) + " must satisfy 1 <= lo <= hi");
    std::vector<int> out;
    for (int i = bounds[0]; i <= bounds[1]; ++i) out.push_back(i);
    return out;
}

}  // namespace detail

/// Parse a JSON configuration document:
///
///     {"system":  {"v":33, "w":35, "lambda":2.2,
///                  "posting":{"kind":"exponential","mean":1.3}},
///      "cost":    {"ch":3, "cr":1, "cd":80},
///      "sim":     {"seed":7, "postings":1000000, "warmup":0.1, "policy":"clip"},
///      "options": {"vmax":35, "ladder":"level-crossing", "format":"json"}}
inline RawConfig parse_config_json(const nlohmann::json& doc) {
    using detail::read;
    RawConfig raw;
    detail::reject_unknown(doc, "", {"system", "cost", "sim", "options"});
    if (doc.contains("system")) {
        const auto& s = doc.at("system");
        detail::reject_unknown(s, "system", {"v", "w", "lambda", "posting"});
        read(s, "v", "system", raw.v);
        read(s, "w", "system", raw.w);
        read(s, "lambda", "system", raw.lambda);
        if (s.contains("posting")) {
            const auto& p = s.at("posting");
            detail::reject_unknown(p, "system.posting", {"kind", "mean", "shape"});
            read(p, "kind", "system.posting", raw.dist);
            read(p, "mean", "system.posting", raw.mean);
            read(p, "shape", "system.posting", raw.shape);
        }
    }
    if (doc.contains("cost")) {
        const auto& c = doc.at("cost");
        detail::reject_unknown(c, "cost", {"ch", "cr", "cd", "holding_table", "reserve_table"});
        read(c, "ch", "cost", raw.cH);
        read(c, "cr", "cost", raw.cR);
        read(c, "cd", "cost", raw.cD);
        read(c, "holding_table", "cost", raw.holdingTable);
        read(c, "reserve_table", "cost", raw.reserveTable);
    }
    if (doc.contains("sim")) {
        const auto& s = doc.at("sim");
        detail::reject_unknown(s, "sim", {"seed", "postings", "warmup", "policy"});
        read(s, "seed", "sim", raw.seed);
        read(s, "postings", "sim", raw.postings);
        read(s, "warmup", "sim", raw.warmup);
        read(s, "policy", "sim", raw.policy);
    }
    if (doc.contains("options")) {
        const auto& o = doc.at("options");
        detail::reject_unknown(o, "options", {"vmax", "v_range", "w_range", "ladder", "eps", "format", "out",
                                              "enforce_capability", "tv_tolerance", "cost_tolerance"});
        read(o, "vmax", "options", raw.vmax);
        read(o, "v_range", "options", raw.vRange);
        read(o, "w_range", "options", raw.wRange);
        read(o, "ladder", "options", raw.ladder);
        read(o, "eps", "options", raw.eps);
        read(o, "format", "options", raw.format);
        read(o, "out", "options", raw.out);
        read(o, "enforce_capability", "options", raw.enforceCapability);
        read(o, "tv_tolerance", "options", raw.tvTol);
        read(o, "cost_tolerance", "options", raw.costTol);
    }
    return raw;
}

inline RawConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config_json(doc);
}

/// Apply defaults and check every constraint the command relies on.
inline RunConfig resolve(Command command, const RawConfig& raw) {
    RunConfig cfg;
    cfg.command = command;
    auto need = [](const auto& field, const char* name) {
        if (!field) throw ConfigError("missing required setting '" + std::string(name) + "'");
        return *field;
    };
    const bool wants_v = command == Command::Solve || command == Command::Simulate || command == Command::Compare;
    const bool wants_w = command != Command::Sweep;

    try {
        cfg.params.lambda = need(raw.lambda, "lambda");
        const DistKind kind = dist_kind_from_string(raw.dist.value_or("exponential"));
        if (kind == DistKind::Erlang && !raw.shape) throw ConfigError("erlang postings need 'shape'");
        cfg.params.posting = PostingDistribution::make(kind, need(raw.mean, "mean"), raw.shape.value_or(1));
        cfg.params.w = wants_w ? need(raw.w, "w") : raw.w.value_or(1);
        cfg.params.v = wants_v ? need(raw.v, "v") : raw.v.value_or(1);
        if (!(cfg.params.lambda > 0.0)) throw ConfigError("constraint violated: lambda > 0");
        if (wants_w && cfg.params.w < 1) throw ConfigError("constraint violated: w >= 1");
        if (wants_v && cfg.params.v < 1) throw ConfigError("constraint violated: v >= 1");
        if (wants_v && cfg.params.v > cfg.params.w) throw ConfigError("constraint violated: v <= w");
        if (wants_w && !wants_v) cfg.params.v = 1;
        if (command != Command::Sweep) cfg.params.validate();

        cfg.cost.cH = raw.cH.value_or(0.0);
        cfg.cost.cR = raw.cR.value_or(0.0);
        cfg.cost.cD = raw.cD.value_or(0.0);
        cfg.cost.holdingTable = raw.holdingTable;
        cfg.cost.reserveTable = raw.reserveTable;
        cfg.cost.validate();

        cfg.sim.seed = raw.seed.value_or(1);
        cfg.sim.numPostings = raw.postings.value_or(1'000'000);
        cfg.sim.warmupFraction = raw.warmup.value_or(0.1);
        cfg.sim.admissionPolicy = admission_policy_from_string(raw.policy.value_or("clip"));
        cfg.sim.validate();

        cfg.vmax = raw.vmax.value_or(wants_w ? cfg.params.w : 1);
        if (command == Command::Optimize && (cfg.vmax < 1 || cfg.vmax > cfg.params.w))
            throw ConfigError("constraint violated: 1 <= vmax <= w");
        if (command == Command::Sweep) {
            cfg.vRange = detail::expand_range(need(raw.vRange, "v_range"), "v_range");
            cfg.wRange = detail::expand_range(need(raw.wRange, "w_range"), "w_range");
        }
        cfg.ladder = ladder_form_from_string(raw.ladder.value_or("level-crossing"));
        cfg.eps = raw.eps.value_or(1e-12);
        if (!(cfg.eps > 0.0)) throw ConfigError("constraint violated: eps > 0");
        cfg.tolerances.tv = raw.tvTol.value_or(0.01);
        cfg.tolerances.costRel = raw.costTol.value_or(0.05);
        const std::string fmt = raw.format.value_or("json");
        if (fmt == "json") cfg.format = OutputFormat::Json;
        else if (fmt == "csv") cfg.format = OutputFormat::Csv;
        else throw ConfigError("format must be json or csv");
        cfg.out = raw.out.value_or("");
        cfg.enforceCapability = raw.enforceCapability.value_or(false);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

}  // namespace sharing_queue
