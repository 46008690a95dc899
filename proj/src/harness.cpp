#include "vpirl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vpirl {

using nlohmann::json;

namespace {

// Stream purpose tags for seed derivation; keeping them fixed makes run i
// reproducible no matter which other streams were consumed.
constexpr std::uint64_t kEnvStream = 1;
constexpr std::uint64_t kAgentStream = 2;

EstimatorKind estimator_from_string(const std::string& s) {
    if (s == "naive") return EstimatorKind::Naive;
    if (s == "importance") return EstimatorKind::Importance;
    if (s == "repair") return EstimatorKind::Repair;
    if (s == "local") return EstimatorKind::Local;
    throw std::invalid_argument("unknown estimator: " + s);
}

std::string estimator_to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Naive: return "naive";
        case EstimatorKind::Importance: return "importance";
        case EstimatorKind::Repair: return "repair";
        case EstimatorKind::Local: return "local";
    }
    return "?";
}

SmoothingMode smoother_from_string(const std::string& s) {
    if (s == "none") return SmoothingMode::None;
    if (s == "gaussian") return SmoothingMode::Gaussian;
    if (s == "kernel") return SmoothingMode::Kernel;
    throw std::invalid_argument("unknown smoother: " + s);
}

std::string smoother_to_string(SmoothingMode mode) {
    switch (mode) {
        case SmoothingMode::None: return "none";
        case SmoothingMode::Gaussian: return "gaussian";
        case SmoothingMode::Kernel: return "kernel";
    }
    return "?";
}

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig cfg;

    const json& env = j.at("environment");
    if (env.contains("map")) cfg.map_path = env.at("map").get<std::string>();
    if (env.contains("map_text")) cfg.map_text = env.at("map_text").get<std::string>();
    if (cfg.map_path.empty() && cfg.map_text.empty())
        throw std::invalid_argument("config: environment needs a map or map_text");
    if (env.contains("success_prob")) cfg.env.success_prob = env.at("success_prob").get<double>();
    if (env.contains("trap_reward")) cfg.env.trap_reward = env.at("trap_reward").get<double>();
    if (env.contains("flag_reward")) cfg.env.flag_reward = env.at("flag_reward").get<double>();
    if (env.contains("gamma")) cfg.env.discount = env.at("gamma").get<double>();

    if (j.contains("agent")) {
        const json& agent = j.at("agent");
        std::string kind = agent.value("type", "vpi");
        if (kind == "vpi") cfg.agent.kind = AgentKind::Vpi;
        else if (kind == "tbored") cfg.agent.kind = AgentKind::Tbored;
        else throw std::invalid_argument("unknown agent type: " + kind);
        if (agent.contains("estimator"))
            cfg.agent.estimator = estimator_from_string(agent.at("estimator"));
        if (agent.contains("smoother"))
            cfg.agent.smoother = smoother_from_string(agent.at("smoother"));
        cfg.agent.k = agent.value("k", cfg.agent.k);
        cfg.agent.k_min = agent.value("k_min", cfg.agent.k_min);
        cfg.agent.sweep_budget = agent.value("sweep_budget", cfg.agent.sweep_budget);
        cfg.agent.sweep_threshold = agent.value("sweep_threshold", cfg.agent.sweep_threshold);
        cfg.agent.resample_period = agent.value("resample_period", cfg.agent.resample_period);
        cfg.agent.vi_tolerance = agent.value("vi_tolerance", cfg.agent.vi_tolerance);
        cfg.agent.t_bored = agent.value("t_bored", cfg.agent.t_bored);
        cfg.agent.tbored_sweep_budget =
            agent.value("tbored_sweep_budget", cfg.agent.tbored_sweep_budget);
        if (agent.contains("prior")) {
            const json& prior = agent.at("prior");
            std::string family = prior.value("transition", "sparse");
            if (family == "sparse")
                cfg.agent.prior.transition_family = TransitionPriorFamily::SparseMultinomial;
            else if (family == "dirichlet")
                cfg.agent.prior.transition_family = TransitionPriorFamily::Dirichlet;
            else throw std::invalid_argument("unknown transition prior family: " + family);
            cfg.agent.prior.transition_alpha = prior.value("alpha", 1.0);
            cfg.agent.prior.reward_alpha = prior.value("reward_alpha", 1.0);
            if (prior.contains("size_prior"))
                cfg.agent.prior.size_prior = prior.at("size_prior").get<std::vector<double>>();
        }
    }

    cfg.num_runs = j.value("num_runs", cfg.num_runs);
    cfg.num_steps = j.value("num_steps", cfg.num_steps);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.horizon = j.value("horizon", cfg.horizon);
    if (j.contains("probe_states")) {
        for (const auto& p : j.at("probe_states")) {
            if (p.is_string()) cfg.probe_states.push_back(p.get<std::string>());
            else cfg.probe_states.push_back(std::to_string(p.get<int>()));
        }
    }
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("tbored_candidates"))
        cfg.tbored_candidates = j.at("tbored_candidates").get<std::vector<int>>();

    if (cfg.num_runs < 1) throw std::invalid_argument("config: num_runs must be >= 1");
    if (cfg.horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
    if (cfg.num_steps < 0) throw std::invalid_argument("config: num_steps must be >= 0");
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream oss;
    oss << is.rdbuf();
    ExperimentConfig cfg = from_json_text(oss.str());
    if (!cfg.map_path.empty() && !std::filesystem::exists(cfg.map_path)) {
        // try resolving the map relative to the config file
        std::filesystem::path rel =
            std::filesystem::path(path).parent_path() / cfg.map_path;
        if (std::filesystem::exists(rel)) cfg.map_path = rel.string();
    }
    return cfg;
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["environment"] = {
        {"map", map_path},
        {"success_prob", env.success_prob},
        {"trap_reward", env.trap_reward},
        {"flag_reward", env.flag_reward},
        {"gamma", env.discount},
    };
    if (!map_text.empty()) j["environment"]["map_text"] = map_text;
    j["agent"] = {
        {"type", agent.kind == AgentKind::Vpi ? "vpi" : "tbored"},
        {"estimator", estimator_to_string(agent.estimator)},
        {"smoother", smoother_to_string(agent.smoother)},
        {"k", agent.k},
        {"k_min", agent.k_min >= 0.0 ? agent.k_min : agent.k / 4.0},
        {"sweep_budget", agent.sweep_budget},
        {"sweep_threshold", agent.sweep_threshold},
        {"resample_period", agent.resample_period},
        {"vi_tolerance", agent.vi_tolerance},
        {"t_bored", agent.t_bored},
        {"tbored_sweep_budget", agent.tbored_sweep_budget},
        {"prior",
         {{"transition", agent.prior.transition_family == TransitionPriorFamily::Dirichlet
                             ? "dirichlet"
                             : "sparse"},
          {"alpha", agent.prior.transition_alpha},
          {"reward_alpha", agent.prior.reward_alpha},
          {"size_prior", agent.prior.size_prior}}},
    };
    j["num_runs"] = num_runs;
    j["num_steps"] = num_steps;
    j["base_seed"] = base_seed;
    j["horizon"] = horizon;
    j["probe_states"] = probe_states;
    j["out_dir"] = out_dir;
    j["tbored_candidates"] = tbored_candidates;
    return j.dump(2);
}

MazeMap ExperimentConfig::load_map() const {
    if (!map_path.empty()) return load_map_file(map_path);
    return parse_map(map_text);
}

VpiAgent::VpiAgent(const AgentConfig& cfg, const BeliefState& prior_belief, RngEngine rng)
    : cfg_(cfg), belief_(prior_belief), rng_(std::move(rng)) {
    if (cfg_.estimator == EstimatorKind::Local) {
        table_ = LocalQTable(belief_, cfg_.k);
    } else {
        set_ = naive_sample(belief_, cfg_.k, rng_, &costs_, cfg_.vi_tolerance);
        if (cfg_.k_min >= 0.0) set_.k_min = cfg_.k_min;
    }
}

WeightedSamples VpiAgent::samples_at(int s, int a) const {
    if (cfg_.estimator == EstimatorKind::Local) return table_.samples_at(s, a);
    return set_.samples_at(s, a);
}

int VpiAgent::select_action(int s) {
    std::vector<WeightedSamples> per_action;
    per_action.reserve(belief_.num_actions());
    for (int a = 0; a < belief_.num_actions(); ++a) per_action.push_back(samples_at(s, a));
    return vpirl::select_action(per_action, cfg_.smoother);
}

void VpiAgent::observe(const ExperienceTuple& e) {
    switch (cfg_.estimator) {
        case EstimatorKind::Naive:
            belief_.update(e);
            if (cfg_.resample_period > 0 && (steps_seen_ + 1) % cfg_.resample_period == 0) {
                double k_min = set_.k_min;
                set_ = naive_sample(belief_, cfg_.k, rng_, &costs_, cfg_.vi_tolerance);
                set_.k_min = k_min;
            }
            break;
        case EstimatorKind::Importance:
            importance_reweight(set_, e, belief_);
            belief_.update(e);
            refresh_if_depleted(set_, belief_, rng_, &costs_, cfg_.vi_tolerance);
            break;
        case EstimatorKind::Repair:
            belief_.update(e);
            repair_step(set_, e, belief_, rng_, cfg_.sweep_budget, cfg_.sweep_threshold,
                        &costs_);
            break;
        case EstimatorKind::Local:
            belief_.update(e);
            table_.update(belief_, e.s, e.a, rng_);
            table_.sweep(belief_, cfg_.sweep_budget, cfg_.sweep_threshold, rng_);
            break;
    }
    ++steps_seen_;
}

TboredAgent::TboredAgent(const AgentConfig& cfg, int num_states, int num_actions,
                         std::vector<double> reward_support, double discount)
    : cfg_(cfg),
      counts_(num_states, num_actions, std::move(reward_support), discount) {
    optimistic_ = counts_.optimistic_mdp(cfg_.t_bored);
    // Optimistic everywhere: this is the exact fixed point when every pair is
    // still bored, and an optimistic initialization otherwise.
    q_ = QFunction(num_states + 1, num_actions, counts_.optimistic_value());
    if (cfg_.t_bored <= 0) {
        ViResult res = value_iteration(optimistic_, cfg_.vi_tolerance, kDefaultViMaxIters,
                                       &costs_);
        q_ = res.q;
    }
}

int TboredAgent::select_action(int s) { return baseline_tbored_explore(q_, s); }

void TboredAgent::observe(const ExperienceTuple& e) {
    counts_.observe(e);
    optimistic_ = counts_.optimistic_mdp(cfg_.t_bored);
    q_ = prioritized_sweep(optimistic_, std::move(q_), {e.s}, cfg_.tbored_sweep_budget,
                           cfg_.sweep_threshold, &costs_);
}

RunTrace run_agent(const CompiledEnv& env, const ExperimentConfig& config, int run_index) {
    const Mdp& mdp = env.mdp();
    RngEngine env_rng = make_stream(config.base_seed, run_index, kEnvStream);
    RngEngine agent_rng = make_stream(config.base_seed, run_index, kAgentStream);

    RunTrace trace;
    for (const std::string& p : config.probe_states) {
        if (p == "start") trace.probe_state_ids.push_back(env.start_state());
        else trace.probe_state_ids.push_back(std::stoi(p));
    }
    for (int id : trace.probe_state_ids)
        if (id < 0 || id >= mdp.num_states())
            throw std::invalid_argument("run_agent: probe state out of range");

    std::unique_ptr<VpiAgent> vpi_agent;
    std::unique_ptr<TboredAgent> tbored_agent;
    if (config.agent.kind == AgentKind::Vpi) {
        BeliefState prior(mdp.num_states(), mdp.num_actions(), mdp.reward_support(),
                          config.env.discount, config.agent.prior);
        vpi_agent = std::make_unique<VpiAgent>(config.agent, prior, std::move(agent_rng));
    } else {
        tbored_agent = std::make_unique<TboredAgent>(config.agent, mdp.num_states(),
                                                     mdp.num_actions(), mdp.reward_support(),
                                                     config.env.discount);
    }

    trace.steps.reserve(config.num_steps);
    trace.cumulative_costs.reserve(config.num_steps);
    int s = env.start_state();
    for (int step = 0; step < config.num_steps; ++step) {
        int a = vpi_agent ? vpi_agent->select_action(s) : tbored_agent->select_action(s);
        auto [t, r] = env.step(s, a, env_rng);
        ExperienceTuple e{s, a, r, t};
        if (vpi_agent) vpi_agent->observe(e);
        else tbored_agent->observe(e);

        trace.steps.push_back({s, a, r, t});
        trace.cumulative_costs.push_back(vpi_agent ? vpi_agent->costs()
                                                   : tbored_agent->costs());
        if (!trace.probe_state_ids.empty()) {
            std::vector<ProbeSnapshot> snaps;
            snaps.reserve(trace.probe_state_ids.size());
            for (int probe : trace.probe_state_ids) {
                ProbeSnapshot snap;
                for (int act = 0; act < mdp.num_actions(); ++act) {
                    if (vpi_agent) {
                        WeightedSamples samples = vpi_agent->samples_at(probe, act);
                        snap.mean.push_back(samples.mean());
                        snap.variance.push_back(samples.variance());
                    } else {
                        snap.mean.push_back(0.0);
                        snap.variance.push_back(0.0);
                    }
                }
                snaps.push_back(std::move(snap));
            }
            trace.probes.push_back(std::move(snaps));
        }
        s = t;
    }
    trace.final_costs = vpi_agent ? vpi_agent->costs() : tbored_agent->costs();
    return trace;
}

double discounted_future_reward(const RunTrace& trace, int t, double gamma, int horizon) {
    if (t < 0 || t + horizon > static_cast<int>(trace.steps.size()))
        throw std::out_of_range("discounted_future_reward: horizon exceeds the trace");
    double acc = 0.0;
    double weight = 1.0;
    for (int i = 0; i < horizon; ++i) {
        acc += weight * trace.steps[t + i].r;
        weight *= gamma;
    }
    return acc;
}

std::string aggregate_and_emit(const std::vector<RunTrace>& traces,
                               const ExperimentConfig& config) {
    if (traces.empty()) throw std::invalid_argument("aggregate_and_emit: no traces");
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const double gamma = config.env.discount;
    const int H = config.horizon;
    const int num_steps = static_cast<int>(traces[0].steps.size());

    {
        std::ofstream os(fs::path(config.out_dir) / "reward_curve.csv");
        if (!os) throw std::runtime_error("aggregate_and_emit: cannot write reward_curve.csv in " +
                                          config.out_dir);
        os << "step,mean_future_discounted_reward,stderr\n";
        for (int t = 0; t + H <= num_steps; ++t) {
            double mean = 0.0;
            std::vector<double> vals;
            vals.reserve(traces.size());
            for (const RunTrace& trace : traces) {
                vals.push_back(discounted_future_reward(trace, t, gamma, H));
                mean += vals.back();
            }
            mean /= vals.size();
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            double stderr_ = vals.size() > 1
                                 ? std::sqrt(var / (vals.size() - 1)) / std::sqrt(vals.size())
                                 : 0.0;
            os << t << "," << mean << "," << stderr_ << "\n";
        }
    }

    {
        std::ofstream os(fs::path(config.out_dir) / "qdist_snapshots.csv");
        os << "run,step,state,action,mean,variance\n";
        for (std::size_t run = 0; run < traces.size(); ++run) {
            const RunTrace& trace = traces[run];
            for (std::size_t step = 0; step < trace.probes.size(); ++step) {
                for (std::size_t p = 0; p < trace.probe_state_ids.size(); ++p) {
                    const ProbeSnapshot& snap = trace.probes[step][p];
                    for (std::size_t a = 0; a < snap.mean.size(); ++a)
                        os << run << "," << step << "," << trace.probe_state_ids[p] << ","
                           << a << "," << snap.mean[a] << "," << snap.variance[a] << "\n";
                }
            }
        }
    }

    {
        std::ofstream os(fs::path(config.out_dir) / "costs.csv");
        os << "run,step,vi_solves,vi_backups,sweep_backups,rows_sampled\n";
        for (std::size_t run = 0; run < traces.size(); ++run) {
            const RunTrace& trace = traces[run];
            for (std::size_t step = 0; step < trace.cumulative_costs.size(); ++step) {
                const CostCounters& c = trace.cumulative_costs[step];
                os << run << "," << step << "," << c.vi_solves << "," << c.vi_backups << ","
                   << c.sweep_backups << "," << c.rows_sampled << "\n";
            }
        }
    }

    json manifest;
    manifest["config"] = json::parse(config.to_json_text());
    manifest["num_runs"] = static_cast<int>(traces.size());
    manifest["num_steps"] = num_steps;
    manifest["run_seed_derivation"] =
        "per-run streams derived from base_seed via splitmix64(run, purpose)";
    manifest["outputs"] = {"reward_curve.csv", "qdist_snapshots.csv", "costs.csv"};
    std::string path = (fs::path(config.out_dir) / "manifest.json").string();
    std::ofstream os(path);
    os << manifest.dump(2) << "\n";
    return path;
}

TuneResult tune_tbored(const CompiledEnv& env, const ExperimentConfig& config) {
    if (config.tbored_candidates.empty())
        throw std::invalid_argument("tune_tbored: no candidates");
    TuneResult result;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int candidate : config.tbored_candidates) {
        ExperimentConfig trial = config;
        trial.agent.kind = AgentKind::Tbored;
        trial.agent.t_bored = candidate;
        trial.probe_states.clear();
        double mean_score = 0.0;
        for (int run = 0; run < trial.num_runs; ++run) {
            RunTrace trace = run_agent(env, trial, run);
            double total = 0.0, weight = 1.0;
            for (const StepRecord& step : trace.steps) {
                total += weight * step.r;
                weight *= trial.env.discount;
            }
            mean_score += total;
        }
        mean_score /= trial.num_runs;
        result.candidate_scores.push_back({candidate, mean_score});
        if (mean_score > best_score) {
            best_score = mean_score;
            result.best_t_bored = candidate;
        }
    }
    return result;
}

} // namespace vpirl
