#pragma once

#include <vector>

#include "vpirl/belief.hpp"
#include "vpirl/mdp.hpp"

namespace vpirl {

/**
Count-based point estimate of an MDP: per-(s, a) transition and reward
observation counts. The mean model normalizes counts; unvisited pairs fall
back to a uniform transition row and a zero reward (or a uniform reward row
when 0 is not in the support).
*/
class CountModel {
public:
    CountModel() = default;
    CountModel(int num_states, int num_actions, std::vector<double> reward_support,
               double discount);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int visits(int s, int a) const { return visits_[s * num_actions_ + a]; }

    void observe(const ExperienceTuple& e);

    /// Plain mean-count MDP over the real states.
    Mdp mean_mdp() const;

    /**
    Mean-count MDP augmented with one fictitious absorbing state that pays
    the maximum reward forever. Every (s, a) visited fewer than t_bored times
    is rerouted to it, so under-explored actions look maximally attractive
    until they stop being "boring". The fictitious state has index
    num_states().
    */
    Mdp optimistic_mdp(int t_bored) const;

    /// Fixed point of the fictitious state: r_max / (1 - discount).
    double optimistic_value() const;

private:
    void fill_row(Mdp& mdp, int s, int a) const;

    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> reward_support_;
    double discount_ = 0.0;
    std::vector<std::vector<int>> transition_counts_;
    std::vector<std::vector<int>> reward_counts_;
    std::vector<int> visits_;
};

/// Greedy action at s over the real actions of a Q-function solved on the
/// optimistic model; ties broken by lowest action index. With q solved on
/// CountModel::optimistic_mdp(t_bored) this is the Moore-Atkeson style
/// exploration rule: under-visited actions win through their optimistic
/// values until visited t_bored times.
int baseline_tbored_explore(const QFunction& q, int s);

} // namespace vpirl
