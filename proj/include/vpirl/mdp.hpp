#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vpirl {

/// Work counters shared across planners so experiment harnesses can report
/// how much computation each agent spent. All counts are cumulative.
struct CostCounters {
    std::int64_t vi_solves = 0;      // complete value-iteration solves
    std::int64_t vi_backups = 0;     // full-state backups inside value iteration
    std::int64_t sweep_backups = 0;  // full-state backups inside prioritized sweeping
    std::int64_t rows_sampled = 0;   // posterior rows drawn when sampling models

    std::int64_t planner_backups() const { return vi_backups + sweep_backups; }
};

/**
A fully specified finite discounted MDP. Transition rows are dense probability
vectors over states; reward models are probability vectors over a finite
support of real reward values. Rows are indexed by (state, action).
*/
class Mdp {
public:
    Mdp() = default;
    Mdp(int num_states, int num_actions, std::vector<double> reward_support,
        double discount);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    double discount() const { return discount_; }
    const std::vector<double>& reward_support() const { return reward_support_; }

    std::vector<double>& transition_row(int s, int a) { return transition_[row(s, a)]; }
    const std::vector<double>& transition_row(int s, int a) const { return transition_[row(s, a)]; }
    std::vector<double>& reward_row(int s, int a) { return reward_[row(s, a)]; }
    const std::vector<double>& reward_row(int s, int a) const { return reward_[row(s, a)]; }

    /// Mean immediate reward at (s, a) under the reward distribution.
    double expected_reward(int s, int a) const;

    double min_reward() const;
    double max_reward() const;

    /// Checks probability rows sum to one and the discount lies in (0, 1).
    /// Throws std::invalid_argument on violation.
    void validate(double tolerance = 1e-9) const;

    /// Plain-text dump: a header line with the dimensions, discount and
    /// reward support, then one line per (s, a) with the transition row
    /// followed by the reward row.
    void dump(std::ostream& os) const;
    std::string dump_string() const;

    int row(int s, int a) const;

private:
    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> reward_support_;
    std::vector<std::vector<double>> transition_;
    std::vector<std::vector<double>> reward_;
    double discount_ = 0.0;
};

/// Tabular Q-function over (state, action) pairs.
class QFunction {
public:
    QFunction() = default;
    QFunction(int num_states, int num_actions, double init = 0.0)
        : num_states_(num_states), num_actions_(num_actions),
          values_(static_cast<std::size_t>(num_states) * num_actions, init) {}

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    double operator()(int s, int a) const { return values_[index(s, a)]; }
    double& operator()(int s, int a) { return values_[index(s, a)]; }

    /// V(s) = max_a Q(s, a).
    double state_value(int s) const;
    /// Greedy action at s, ties broken by lowest action index.
    int greedy_action(int s) const;

    bool operator==(const QFunction& other) const = default;

private:
    std::size_t index(int s, int a) const {
        return static_cast<std::size_t>(s) * num_actions_ + a;
    }
    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> values_;
};

/// One Bellman backup. Does not mutate q.
double bellman_backup(const Mdp& mdp, const QFunction& q, int s, int a);

struct ViResult {
    QFunction q;
    int iterations = 0;
    double residual = 0.0;  // last sup-norm change between sweeps
    bool converged = false;
};

inline constexpr double kDefaultViTolerance = 1e-6;
inline constexpr int kDefaultViMaxIters = 10000;

/**
Synchronous value iteration from Q = 0. Stops when the sup-norm change
between sweeps drops to `tolerance` or after `max_iters` sweeps; in the
latter case the result carries the residual as a diagnostic and
`converged` is false.
*/
ViResult value_iteration(const Mdp& mdp, double tolerance = kDefaultViTolerance,
                         int max_iters = kDefaultViMaxIters,
                         CostCounters* counters = nullptr);

inline constexpr int kDefaultSweepBudget = 10;
inline constexpr double kDefaultSweepThreshold = 1e-4;

/**
Prioritized sweeping on a concrete MDP starting from a prior approximate
Q-function. Seed states are backed up first; after each full-state backup
whose value changed by delta, every predecessor s'' reaching the state with
probability p gets priority max(current, p * |delta|). Stops after
`max_backups` full-state backups or when the top priority falls below
`priority_threshold`.
*/
QFunction prioritized_sweep(const Mdp& mdp, QFunction q,
                            const std::vector<int>& seeds, int max_backups,
                            double priority_threshold = kDefaultSweepThreshold,
                            CostCounters* counters = nullptr);

} // namespace vpirl
