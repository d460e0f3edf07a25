// Batch front end: solve | optimize | sweep | simulate | compare.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sharing_queue/commands.hpp"
#include "sharing_queue/config.hpp"

namespace sq = sharing_queue;

namespace {

struct Flags {
    std::string config;
    sq::RawConfig raw;
    std::string vrange, wrange;
};

template <typename T>
void option(CLI::App& app, const std::string& name, std::optional<T>& dst, const std::string& help) {
    app.add_option_function<T>(name, [&dst](const T& value) { dst = value; }, help);
}

void add_shared_flags(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config, "JSON configuration file (flags override its values)");
    option(app, "--v", f.raw.v, "batch size of individual contracts");
    option(app, "--w", f.raw.w, "total contractor capacity");
    option(app, "--lambda", f.raw.lambda, "customer consumption rate");
    option(app, "--mean", f.raw.mean, "mean posting interval a");
    option(app, "--dist", f.raw.dist, "posting law: exponential | deterministic | erlang");
    option(app, "--shape", f.raw.shape, "erlang shape m");
    option(app, "--ch", f.raw.cH, "holding cost per contractor per unit time");
    option(app, "--cr", f.raw.cR, "reserve cost per reserved contractor per unit time");
    option(app, "--cd", f.raw.cD, "posting cost coefficient");
    option(app, "--vmax", f.raw.vmax, "largest batch size searched by optimize");
    option(app, "--seed", f.raw.seed, "simulation seed");
    option(app, "--postings", f.raw.postings, "simulation horizon in postings");
    option(app, "--warmup", f.raw.warmup, "fraction of postings discarded as warm-up");
    option(app, "--policy", f.raw.policy, "admission: clip | reject-if-no-full-room");
    option(app, "--ladder", f.raw.ladder, "analytic route: level-crossing | as-printed");
    option(app, "--eps", f.raw.eps, "truncation tolerance for the infinite-queue vector");
    option(app, "--tv-tol", f.raw.tvTol, "compare: total-variation tolerance");
    option(app, "--cost-tol", f.raw.costTol, "compare: relative cost tolerance");
    option(app, "--format", f.raw.format, "json | csv");
    option(app, "--out", f.raw.out, "output path (default stdout)");
    app.add_option("--vrange", f.vrange, "sweep: batch sizes lo:hi");
    app.add_option("--wrange", f.wrange, "sweep: capacities lo:hi");
    app.add_flag_function("--enforce-capability", [&f](std::int64_t) { f.raw.enforceCapability = true; },
                          "mark cells with positive capability factor invalid");
}

std::vector<int> parse_range(const std::string& text, const char* name) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            const int x = std::stoi(text);
            return {x, x};
        }
        return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw sq::ConfigError(std::string(name) + " must look like lo:hi");
    }
}

int emit(const sq::Emitted& result, sq::OutputFormat format, const std::string& path) {
    const std::string text = result.text(format);
    if (path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(path);
        if (!out) {
            std::cerr << "cannot write '" << path << "'\n";
            return sq::kExitConfig;
        }
        out << text;
    }
    if (result.doc.contains("error"))
        std::cerr << result.doc["error"]["type"].get<std::string>() << ": "
                  << result.doc["error"]["message"].get<std::string>() << "\n";
    return result.status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch-input contractor pool: analytic solution, cost optimization and simulation"};
    app.require_subcommand(1);

    Flags flags;
    const std::vector<std::pair<const char*, const char*>> commands = {
        {"solve", "embedded and continuous-time distributions for one instance"},
        {"optimize", "best batch size v in 1..vmax"},
        {"sweep", "cost surface over (v, w)"},
        {"simulate", "seeded discrete-event simulation"},
        {"compare", "analytic routes against simulation under both admission rules"},
    };
    for (const auto& [name, help] : commands) add_shared_flags(*app.add_subcommand(name, help), flags);

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    sq::Command command = sq::Command::Solve;
    if (name == "optimize") command = sq::Command::Optimize;
    else if (name == "sweep") command = sq::Command::Sweep;
    else if (name == "simulate") command = sq::Command::Simulate;
    else if (name == "compare") command = sq::Command::Compare;

    sq::RawConfig raw;
    try {
        if (!flags.config.empty()) raw = sq::load_config_file(flags.config);
        if (!flags.vrange.empty()) flags.raw.vRange = parse_range(flags.vrange, "--vrange");
        if (!flags.wrange.empty()) flags.raw.wRange = parse_range(flags.wrange, "--wrange");
        raw.merge(flags.raw);
    } catch (const sq::ConfigError& err) {
        return emit(sq::error_document(command, "ConfigError", err.what(), sq::kExitConfig),
                    sq::OutputFormat::Json, "");
    }

    const sq::OutputFormat format = raw.format.value_or("json") == "csv" ? sq::OutputFormat::Csv
                                                                         : sq::OutputFormat::Json;
    return emit(sq::execute(command, raw), format, raw.out.value_or(""));
}
