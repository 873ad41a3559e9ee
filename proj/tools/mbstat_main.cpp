// mbstat: market-based trade statistics over tick event logs.
//
// Subcommands:
//   sim     generate a synthetic event log from a config file
//   stress  emit one of the named degenerate fixtures
//   run     compute the per-window report (price, anticipated, actual x3)
//   sweep   anticipated-return statistics over a grid of time shifts
//
// Exit codes: 0 success, 1 usage/config error, 2 parse error,
// 3 oracle-gate failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mbstat/csv.hpp"
#include "mbstat/market_sim.hpp"
#include "mbstat/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitParse = 2;
constexpr int kExitOracle = 3;

void write_events_to(const std::vector<mbstat::EventRecord>& log, const std::string& out_path) {
    if (out_path.empty())
        mbstat::write_events(log, std::cout);
    else
        mbstat::write_events_file(log, out_path);
}

std::vector<mbstat::EventRecord> load_records(const std::string& input_path,
                                              const std::string& sim_config_path,
                                              const std::string& stress_name,
                                              std::optional<std::uint64_t> seed_override,
                                              int* config_window, bool integer_volumes = false) {
    std::vector<mbstat::EventRecord> records;
    if (!input_path.empty()) {
        return mbstat::ingest_events_file(input_path, integer_volumes);
    } else if (!stress_name.empty()) {
        records = mbstat::stress_case(stress_name);
    } else {
        mbstat::SimConfig cfg = mbstat::load_sim_config_file(sim_config_path);
        if (seed_override) cfg.seed = *seed_override;
        if (config_window) *config_window = cfg.window_size;
        records = mbstat::generate(cfg);
    }
    if (integer_volumes) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].volume != std::floor(records[i].volume))
                throw mbstat::ConfigError("record " + std::to_string(i + 1) +
                                          ": volume is fractional (integer-volumes mode)");
        }
    }
    return records;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"market-based statistics of trade-tick series"};
    app.require_subcommand(1);

    // --- sim ---
    auto* sim = app.add_subcommand("sim", "generate a synthetic event log");
    std::string sim_config;
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::int64_t> sim_ticks;
    std::string sim_out;
    sim->add_option("--config", sim_config, "flat key=value simulator config")->required();
    sim->add_option("--seed", sim_seed, "override the config seed");
    sim->add_option("--ticks", sim_ticks, "override the config tick count");
    sim->add_option("--out", sim_out, "output path (default stdout)");

    // --- stress ---
    auto* stress = app.add_subcommand("stress", "emit a named degenerate fixture");
    std::string stress_name;
    std::string stress_out;
    stress->add_option("--name", stress_name, "fixture name")->required();
    stress->add_option("--out", stress_out, "output path (default stdout)");

    // --- run ---
    auto* run = app.add_subcommand("run", "compute the per-window statistics report");
    std::string run_input, run_sim, run_stress, run_tau, run_policy = "fifo", run_format = "csv";
    std::string run_out;
    std::optional<std::uint64_t> run_seed;
    std::optional<int> run_window;
    bool run_oracle = false;
    auto* src_input = run->add_option("--input", run_input, "event-log CSV to analyze");
    auto* src_sim = run->add_option("--sim", run_sim, "simulator config to generate and analyze");
    auto* src_stress = run->add_option("--stress", run_stress, "stress fixture to analyze");
    src_input->excludes(src_sim)->excludes(src_stress);
    src_sim->excludes(src_stress);
    run->add_option("--seed", run_seed, "override the simulator seed");
    run->add_option("--window", run_window, "ticks per trading-day window N");
    run->add_option("--tau", run_tau, "time shift: absolute duration or '<k>t' median gaps");
    run->add_option("--policy", run_policy, "lot matching: fifo|lifo|prorata");
    bool run_integer_volumes = false;
    run->add_flag("--integer-volumes", run_integer_volumes, "reject fractional share counts");
    run->add_flag("--oracle", run_oracle, "cross-check decomposed statistics against direct sums");
    run->add_option("--format", run_format, "report format: csv|json");
    run->add_option("--out", run_out, "output path (default stdout)");

    // --- sweep ---
    auto* sweep = app.add_subcommand("sweep", "anticipated-return statistics over a tau grid");
    std::string sweep_input, sweep_sim, sweep_taus, sweep_out;
    std::optional<std::uint64_t> sweep_seed;
    std::optional<int> sweep_window;
    auto* sw_input = sweep->add_option("--input", sweep_input, "event-log CSV to analyze");
    auto* sw_sim = sweep->add_option("--sim", sweep_sim, "simulator config to generate and analyze");
    sw_input->excludes(sw_sim);
    sweep->add_option("--seed", sweep_seed, "override the simulator seed");
    sweep->add_option("--window", sweep_window, "ticks per trading-day window N");
    sweep->add_option("--taus", sweep_taus, "comma-separated tau grid, e.g. '1t,5t,10t' or '30,60'")
        ->required();
    sweep->add_option("--out", sweep_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sim->parsed()) {
            mbstat::SimConfig cfg = mbstat::load_sim_config_file(sim_config);
            if (sim_seed) cfg.seed = *sim_seed;
            if (sim_ticks) cfg.tick_count = *sim_ticks;
            write_events_to(mbstat::generate(cfg), sim_out);
            return kExitOk;
        }

        if (stress->parsed()) {
            write_events_to(mbstat::stress_case(stress_name), stress_out);
            return kExitOk;
        }

        if (run->parsed()) {
            if (run_input.empty() && run_sim.empty() && run_stress.empty())
                throw mbstat::ConfigError("one of --input, --sim or --stress is required");
            int config_window = 0;
            const auto records =
                load_records(run_input, run_sim, run_stress, run_seed,
                             run_sim.empty() ? nullptr : &config_window, run_integer_volumes);

            mbstat::PipelineOptions options;
            options.window_size = run_window ? *run_window
                                             : (config_window > 0 ? config_window : 20);
            if (!run_tau.empty()) options.tau = mbstat::parse_tau_spec(run_tau);
            options.policy = mbstat::parse_match_policy(run_policy);
            options.oracle = run_oracle;
            const mbstat::ReportFormat format = mbstat::parse_report_format(run_format);

            const mbstat::PipelineResult result = mbstat::run_pipeline(records, options);
            if (run_out.empty())
                mbstat::emit_report(result.rows, format, std::cout);
            else
                mbstat::emit_report_file(result.rows, format, run_out);

            for (const auto& note : result.skipped) std::cerr << "skipped: " << note << '\n';
            if (!result.skipped.empty())
                std::cerr << result.skipped.size() << " unit(s) skipped\n";

            if (run_oracle && !result.oracle_ok) {
                std::cerr << "oracle gate FAILED: max relative delta "
                          << result.max_oracle_delta_rel << " exceeds " << mbstat::kOracleGate
                          << '\n';
                for (const auto& row : result.rows) {
                    if (!std::isnan(row.oracle_delta_rel) &&
                        row.oracle_delta_rel > mbstat::kOracleGate) {
                        std::cerr << "  " << mbstat::family_name(row.family)
                                  << " window_anchor=" << row.window_anchor
                                  << " delta_rel=" << row.oracle_delta_rel << '\n';
                    }
                }
                return kExitOracle;
            }
            return kExitOk;
        }

        if (sweep->parsed()) {
            if (sweep_input.empty() && sweep_sim.empty())
                throw mbstat::ConfigError("one of --input or --sim is required");
            int config_window = 0;
            const auto records = load_records(sweep_input, sweep_sim, "", sweep_seed,
                                              sweep_sim.empty() ? nullptr : &config_window);

            std::vector<mbstat::TauSpec> taus;
            std::stringstream ss(sweep_taus);
            std::string item;
            while (std::getline(ss, item, ',')) taus.push_back(mbstat::parse_tau_spec(item));
            if (taus.empty()) throw mbstat::ConfigError("empty tau grid");

            const int window = sweep_window ? *sweep_window
                                            : (config_window > 0 ? config_window : 20);
            std::vector<std::string> skipped;
            const auto rows = mbstat::run_tau_sweep(records, window, taus, &skipped);
            if (sweep_out.empty()) {
                mbstat::write_sweep_csv(rows, std::cout);
            } else {
                std::ofstream out(sweep_out);
                if (!out) throw mbstat::IoError("cannot open output file '" + sweep_out + "'");
                mbstat::write_sweep_csv(rows, out);
            }
            for (const auto& note : skipped) std::cerr << "skipped: " << note << '\n';
            return kExitOk;
        }
    } catch (const mbstat::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const mbstat::OrderingError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const mbstat::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
