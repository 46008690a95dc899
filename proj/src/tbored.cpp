#include "vpirl/tbored.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vpirl {

CountModel::CountModel(int num_states, int num_actions, std::vector<double> reward_support,
                       double discount)
    : num_states_(num_states), num_actions_(num_actions),
      reward_support_(std::move(reward_support)), discount_(discount) {
    const std::size_t rows = static_cast<std::size_t>(num_states_) * num_actions_;
    transition_counts_.assign(rows, std::vector<int>(num_states_, 0));
    reward_counts_.assign(rows, std::vector<int>(reward_support_.size(), 0));
    visits_.assign(rows, 0);
}

void CountModel::observe(const ExperienceTuple& e) {
    int idx = e.s * num_actions_ + e.a;
    int r_idx = -1;
    for (std::size_t i = 0; i < reward_support_.size(); ++i)
        if (std::abs(reward_support_[i] - e.r) <= 1e-12) r_idx = static_cast<int>(i);
    if (r_idx < 0) throw std::invalid_argument("CountModel: reward value not in support");
    transition_counts_[idx][e.t] += 1;
    reward_counts_[idx][r_idx] += 1;
    visits_[idx] += 1;
}

void CountModel::fill_row(Mdp& mdp, int s, int a) const {
    int idx = s * num_actions_ + a;
    int total = visits_[idx];
    auto& trow = mdp.transition_row(s, a);
    auto& rrow = mdp.reward_row(s, a);
    if (total > 0) {
        for (int t = 0; t < num_states_; ++t)
            trow[t] = static_cast<double>(transition_counts_[idx][t]) / total;
        for (std::size_t r = 0; r < reward_support_.size(); ++r)
            rrow[r] = static_cast<double>(reward_counts_[idx][r]) / total;
        return;
    }
    // no data: uniform transitions, zero reward when available
    for (int t = 0; t < num_states_; ++t) trow[t] = 1.0 / num_states_;
    int zero_idx = -1;
    for (std::size_t r = 0; r < reward_support_.size(); ++r)
        if (reward_support_[r] == 0.0) zero_idx = static_cast<int>(r);
    if (zero_idx >= 0) {
        rrow[zero_idx] = 1.0;
    } else {
        for (std::size_t r = 0; r < reward_support_.size(); ++r)
            rrow[r] = 1.0 / reward_support_.size();
    }
}

Mdp CountModel::mean_mdp() const {
    Mdp mdp(num_states_, num_actions_, reward_support_, discount_);
    for (int s = 0; s < num_states_; ++s)
        for (int a = 0; a < num_actions_; ++a) fill_row(mdp, s, a);
    return mdp;
}

Mdp CountModel::optimistic_mdp(int t_bored) const {
    const int fict = num_states_;
    Mdp mdp(num_states_ + 1, num_actions_, reward_support_, discount_);
    int rmax_idx = 0;
    for (std::size_t r = 1; r < reward_support_.size(); ++r)
        if (reward_support_[r] > reward_support_[rmax_idx]) rmax_idx = static_cast<int>(r);

    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            if (visits(s, a) < t_bored) {
                mdp.transition_row(s, a)[fict] = 1.0;
                mdp.reward_row(s, a)[rmax_idx] = 1.0;
            } else {
                fill_row(mdp, s, a);
            }
        }
    }
    for (int a = 0; a < num_actions_; ++a) {
        mdp.transition_row(fict, a)[fict] = 1.0;
        mdp.reward_row(fict, a)[rmax_idx] = 1.0;
    }
    return mdp;
}

double CountModel::optimistic_value() const {
    double r_max = *std::max_element(reward_support_.begin(), reward_support_.end());
    return r_max / (1.0 - discount_);
}

int baseline_tbored_explore(const QFunction& q, int s) { return q.greedy_action(s); }

} // namespace vpirl
