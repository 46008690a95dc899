#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vpirl/belief.hpp"
#include "vpirl/estimators.hpp"
#include "vpirl/gridworld.hpp"
#include "vpirl/tbored.hpp"
#include "vpirl/vpi.hpp"

namespace vpirl {

enum class EstimatorKind { Naive, Importance, Repair, Local };
enum class AgentKind { Vpi, Tbored };

struct AgentConfig {
    AgentKind kind = AgentKind::Vpi;
    EstimatorKind estimator = EstimatorKind::Repair;
    SmoothingMode smoother = SmoothingMode::Kernel;
    int k = 20;
    double k_min = -1.0;        // < 0 means the default k / 4
    int sweep_budget = 10;      // per-model repair budget / local sweep budget
    double sweep_threshold = 1e-4;
    int resample_period = 1;    // naive estimator: full resample every this many steps
    double vi_tolerance = 1e-6;
    PriorConfig prior;
    // T_bored baseline
    int t_bored = 1;
    int tbored_sweep_budget = 20;
};

struct ExperimentConfig {
    std::string map_path;
    std::string map_text;  // used when map_path is empty
    EnvConfig env;
    AgentConfig agent;
    int num_runs = 10;
    int num_steps = 1000;
    std::uint64_t base_seed = 0;
    int horizon = 200;  // evaluation horizon H for the future-reward metric
    std::vector<std::string> probe_states;  // "start" or state ids
    std::string out_dir = "out";
    std::vector<int> tbored_candidates = {0, 1, 2, 3, 5, 10, 25};

    /// Parses the structured JSON experiment file.
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    std::string to_json_text() const;

    MazeMap load_map() const;
};

struct StepRecord {
    int s = 0;
    int a = 0;
    double r = 0.0;
    int t = 0;
    bool operator==(const StepRecord& other) const = default;
};

/// Per-probe-state, per-action first two moments of the Q-value distribution
/// after the step's updates.
struct ProbeSnapshot {
    std::vector<double> mean;      // per action
    std::vector<double> variance;  // per action
    bool operator==(const ProbeSnapshot& other) const = default;
};

struct RunTrace {
    std::vector<StepRecord> steps;
    std::vector<CostCounters> cumulative_costs;              // per step
    std::vector<std::vector<ProbeSnapshot>> probes;          // [step][probe]
    std::vector<int> probe_state_ids;
    CostCounters final_costs;
};

/**
A VPI-exploration agent: a conjugate belief state plus one of the four
sample-based Q-value estimators, selecting actions by expected value plus
value of perfect information.
*/
class VpiAgent {
public:
    VpiAgent(const AgentConfig& cfg, const BeliefState& prior_belief, RngEngine rng);

    int select_action(int s);
    void observe(const ExperienceTuple& e);
    WeightedSamples samples_at(int s, int a) const;
    const BeliefState& belief() const { return belief_; }
    const CostCounters& costs() const { return costs_; }
    const QSampleSet& sample_set() const { return set_; }

private:
    AgentConfig cfg_;
    BeliefState belief_;
    RngEngine rng_;
    QSampleSet set_;
    LocalQTable table_;
    CostCounters costs_;
    int steps_seen_ = 0;
};

/// Prioritized sweeping on the optimistic count model (the T_bored rule).
class TboredAgent {
public:
    TboredAgent(const AgentConfig& cfg, int num_states, int num_actions,
                std::vector<double> reward_support, double discount);

    int select_action(int s);
    void observe(const ExperienceTuple& e);
    const CostCounters& costs() const { return costs_; }
    const CountModel& counts() const { return counts_; }

private:
    AgentConfig cfg_;
    CountModel counts_;
    Mdp optimistic_;
    QFunction q_;
    CostCounters costs_;
};

/// Executes one seeded run of the configured agent in the environment.
/// Fully deterministic given (config, run_index).
RunTrace run_agent(const CompiledEnv& env, const ExperimentConfig& config, int run_index);

/// Sum_{i=0}^{H-1} gamma^i r_{t+i}. Throws when fewer than H steps remain.
double discounted_future_reward(const RunTrace& trace, int t, double gamma, int horizon);

/// Writes reward_curve.csv, qdist_snapshots.csv, costs.csv and manifest.json
/// into config.out_dir. Returns the manifest path.
std::string aggregate_and_emit(const std::vector<RunTrace>& traces,
                               const ExperimentConfig& config);

struct TuneResult {
    int best_t_bored = 0;
    std::vector<std::pair<int, double>> candidate_scores;  // (candidate, mean score)
};

/// Runs the baseline for each candidate T_bored (num_runs runs each) and
/// returns the candidate with the highest mean total discounted reward.
TuneResult tune_tbored(const CompiledEnv& env, const ExperimentConfig& config);

} // namespace vpirl
