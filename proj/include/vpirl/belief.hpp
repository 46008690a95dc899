#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "vpirl/conjugate.hpp"
#include "vpirl/mdp.hpp"
#include "vpirl/rng.hpp"

namespace vpirl {

/// One interaction record: executed action a at state s, received reward r
/// and landed in state t.
struct ExperienceTuple {
    int s = 0;
    int a = 0;
    double r = 0.0;
    int t = 0;
};

enum class TransitionPriorFamily { Dirichlet, SparseMultinomial };

struct PriorConfig {
    TransitionPriorFamily transition_family = TransitionPriorFamily::SparseMultinomial;
    double transition_alpha = 1.0;
    double reward_alpha = 1.0;
    /// Prior over the feasible-successor-set size, entry k-1 for size k.
    /// Empty means uniform over {1..num_states}.
    std::vector<double> size_prior;

    bool operator==(const PriorConfig& other) const = default;
};

using TransitionPosterior = std::variant<DirichletPosterior, SparseMultinomialPosterior>;

/**
Bayesian belief state over MDPs with fixed state/action/reward spaces: an
independent conjugate posterior over the transition and reward parameters of
every (state, action) pair. Updates touch exactly one pair, so the product
form is preserved.
*/
class BeliefState {
public:
    BeliefState() = default;
    BeliefState(int num_states, int num_actions, std::vector<double> reward_support,
                double discount, PriorConfig prior = {});

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    double discount() const { return discount_; }
    const std::vector<double>& reward_support() const { return reward_support_; }
    const PriorConfig& prior_config() const { return prior_; }

    const TransitionPosterior& transition_posterior(int s, int a) const;
    const DirichletPosterior& reward_posterior(int s, int a) const;

    /// Number of experience tuples absorbed at (s, a).
    int observation_count(int s, int a) const;

    /// Index of r in the reward support. Throws if r was never declared.
    int reward_index(double r) const;

    /// Absorbs one experience tuple; only the (e.s, e.a) posteriors change.
    void update(const ExperienceTuple& e);

    /// Posterior predictive over successor states, dense over all states.
    std::vector<double> transition_predictive(int s, int a) const;
    /// Posterior predictive over the reward support.
    std::vector<double> reward_predictive(int s, int a) const;

    /// Marginal likelihood of the tuple under the current belief.
    double tuple_likelihood(const ExperienceTuple& e) const;

    /// Draws a transition row (dense) from the (s, a) posterior; sparse
    /// posteriors spread sampled novel mass uniformly over unseen states.
    std::vector<double> sample_transition_row(int s, int a, RngEngine& rng) const;
    std::vector<double> sample_reward_row(int s, int a, RngEngine& rng) const;

    /// Draws a complete MDP: every row sampled independently.
    Mdp sample_mdp(RngEngine& rng, CostCounters* counters = nullptr) const;

    /// Plain-text snapshot; save/load round-trips counts and hyper-parameters
    /// bit-exactly.
    void save(std::ostream& os) const;
    static BeliefState load(std::istream& is);
    void save_file(const std::string& path) const;
    static BeliefState load_file(const std::string& path);

    bool operator==(const BeliefState& other) const = default;

private:
    int row(int s, int a) const;

    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> reward_support_;
    double discount_ = 0.0;
    PriorConfig prior_;
    std::vector<TransitionPosterior> transition_;
    std::vector<DirichletPosterior> reward_;
    std::vector<int> obs_counts_;
};

} // namespace vpirl
