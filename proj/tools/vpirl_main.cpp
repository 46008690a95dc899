#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "vpirl/gridworld.hpp"
#include "vpirl/harness.hpp"

using namespace vpirl;

namespace {

ExperimentConfig load_config_with_overrides(const std::string& path, bool has_seed,
                                            std::uint64_t seed, const std::string& out_dir) {
    ExperimentConfig cfg = ExperimentConfig::from_file(path);
    if (has_seed) cfg.base_seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    return cfg;
}

int run_experiment(const ExperimentConfig& cfg) {
    CompiledEnv env(cfg.load_map(), cfg.env);
    std::cout << "environment: " << env.num_states() << " states, "
              << env.mdp().num_actions() << " actions\n";
    std::vector<RunTrace> traces;
    traces.reserve(cfg.num_runs);
    for (int run = 0; run < cfg.num_runs; ++run) {
        traces.push_back(run_agent(env, cfg, run));
        std::cout << "run " << run << ": done (" << traces.back().final_costs.vi_solves
                  << " solves, " << traces.back().final_costs.planner_backups()
                  << " backups)\n";
    }
    std::string manifest = aggregate_and_emit(traces, cfg);
    std::cout << "wrote " << manifest << "\n";
    return 0;
}

int run_tune(const ExperimentConfig& cfg) {
    CompiledEnv env(cfg.load_map(), cfg.env);
    TuneResult result = tune_tbored(env, cfg);
    for (const auto& [candidate, score] : result.candidate_scores)
        std::cout << "t_bored=" << candidate << " mean_total_discounted_reward=" << score
                  << "\n";
    std::cout << "best t_bored: " << result.best_t_bored << "\n";

    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream os(std::filesystem::path(cfg.out_dir) / "tbored_tuning.json");
    os << "{\n  \"best_t_bored\": " << result.best_t_bored << ",\n  \"scores\": [";
    for (std::size_t i = 0; i < result.candidate_scores.size(); ++i) {
        if (i) os << ", ";
        os << "[" << result.candidate_scores[i].first << ", "
           << result.candidate_scores[i].second << "]";
    }
    os << "]\n}\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian model-based exploration benchmark"};
    app.require_subcommand(1);

    std::string config_path, map_path, out_dir, dump_path;
    std::uint64_t seed = 0;
    bool has_seed = false;

    CLI::App* run = app.add_subcommand("run", "run a configured experiment");
    run->add_option("config", config_path, "experiment JSON file")->required();
    run->add_option("--seed", seed, "override the base seed")->each([&](const std::string&) {
        has_seed = true;
    });
    run->add_option("--out-dir", out_dir, "override the output directory");

    CLI::App* tune = app.add_subcommand("tune-tbored", "grid-search the baseline threshold");
    tune->add_option("config", config_path, "experiment JSON file")->required();
    tune->add_option("--seed", seed, "override the base seed")->each([&](const std::string&) {
        has_seed = true;
    });
    tune->add_option("--out-dir", out_dir, "override the output directory");

    CLI::App* dump = app.add_subcommand("dump-mdp", "compile a map and print the MDP");
    dump->add_option("map", map_path, "maze map file")->required();
    dump->add_option("--out", dump_path, "write to a file instead of stdout");
    double gamma = 0.95, success_prob = 0.9, trap_reward = -10.0, flag_reward = 1.0;
    dump->add_option("--gamma", gamma, "discount factor");
    dump->add_option("--success-prob", success_prob, "intended-move probability");
    dump->add_option("--trap-reward", trap_reward, "reward for entering a trap");
    dump->add_option("--flag-reward", flag_reward, "reward per delivered flag");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_experiment(load_config_with_overrides(config_path, has_seed, seed, out_dir));
        if (tune->parsed())
            return run_tune(load_config_with_overrides(config_path, has_seed, seed, out_dir));
        if (dump->parsed()) {
            EnvConfig cfg;
            cfg.discount = gamma;
            cfg.success_prob = success_prob;
            cfg.trap_reward = trap_reward;
            cfg.flag_reward = flag_reward;
            Mdp mdp = compile_to_mdp(load_map_file(map_path), cfg);
            if (dump_path.empty()) {
                mdp.dump(std::cout);
            } else {
                std::ofstream os(dump_path);
                if (!os) throw std::runtime_error("cannot open " + dump_path);
                mdp.dump(os);
                std::cout << "wrote " << dump_path << "\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
