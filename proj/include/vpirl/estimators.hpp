#pragma once

#include <iosfwd>
#include <vector>

#include "vpirl/belief.hpp"
#include "vpirl/mdp.hpp"
#include "vpirl/rng.hpp"
#include "vpirl/vpi.hpp"

namespace vpirl {

/// One sampled MDP together with its (approximately) solved Q-function and
/// its importance weight relative to the current belief.
struct WeightedModel {
    Mdp mdp;
    QFunction q;
    double weight = 1.0;
};

/**
A set of k weighted sampled MDPs representing the Q-value distribution of
every (state, action) pair. Weights start at 1; importance reweighting
shrinks the total weight as the belief drifts away from the sampling
distribution, and a refresh replaces the lowest-weight models with fresh
weight-1 draws once the total drops below k_min.
*/
struct QSampleSet {
    std::vector<WeightedModel> models;
    int k = 0;
    double k_min = 0.0;

    double total_weight() const;
    /// Per-sample Q-values at (s, a) with the model weights.
    WeightedSamples samples_at(int s, int a) const;
};

/// Draws k MDPs from the belief, solves each by value iteration, and gives
/// every model weight 1. k_min defaults to k / 4.
QSampleSet naive_sample(const BeliefState& belief, int k, RngEngine& rng,
                        CostCounters* counters = nullptr,
                        double vi_tolerance = kDefaultViTolerance);

/// Weighted mean of the sampled Q-values at (s, a). Throws when the total
/// weight is zero (a refresh is mandatory at that point).
double q_mean(const QSampleSet& set, int s, int a);

/// Multiplies each model weight by the tuple likelihood under that model
/// divided by the marginal likelihood under `belief_before` (the belief
/// before absorbing e). Q-functions are untouched.
void importance_reweight(QSampleSet& set, const ExperienceTuple& e,
                         const BeliefState& belief_before);

/// When the total weight has dropped below k_min, replaces the k - k_min
/// lowest-weight models with fresh weight-1 draws from `belief` solved by
/// value iteration. Returns the number of solves performed (0 when the
/// threshold was not crossed). Retained models keep their weights.
int refresh_if_depleted(QSampleSet& set, const BeliefState& belief, RngEngine& rng,
                        CostCounters* counters = nullptr,
                        double vi_tolerance = kDefaultViTolerance);

/// Repairs every model after experience e: redraws the (e.s, e.a) transition
/// and reward rows from `belief_after` (the belief including e) and runs
/// prioritized sweeping seeded at e.s with the given backup budget. Weights
/// stay at 1, keeping the set a sample from the current belief.
void repair_step(QSampleSet& set, const ExperienceTuple& e, const BeliefState& belief_after,
                 RngEngine& rng, int sweep_budget,
                 double priority_threshold = kDefaultSweepThreshold,
                 CostCounters* counters = nullptr);

/// Columnar dump: state, action, sample index, value, weight.
void export_sample_set(std::ostream& os, const QSampleSet& set);

/**
Per-(state, action) sets of k sample points representing Q-value
distributions, propagated by sampled Bellman backups rather than by solving
whole models. A priority queue over (state, action) pairs drives which
distribution gets re-estimated next.
*/
class LocalQTable {
public:
    LocalQTable() = default;
    /// Every sample set starts at the optimistic bound r_max / (1 - discount).
    LocalQTable(const BeliefState& belief, int k);

    int k() const { return k_; }
    const std::vector<double>& points(int s, int a) const;
    WeightedSamples samples_at(int s, int a) const;
    double mean(int s, int a) const;

    /// Replaces the (s, a) sample set with k fresh sampled Bellman backups:
    /// each point draws a transition row and an expected reward from the
    /// (s, a) posteriors and one stored point per successor (uniformly).
    /// Predecessor priorities grow by predictive reach probability times the
    /// mean absolute change of the set.
    void update(const BeliefState& belief, int s, int a, RngEngine& rng);

    /// Pops up to `budget` highest-priority pairs above `threshold` and
    /// updates each. Returns the number of updates performed.
    int sweep(const BeliefState& belief, int budget, double threshold, RngEngine& rng);

    double priority(int s, int a) const;
    void add_priority(int s, int a, double value);

private:
    int num_states_ = 0;
    int num_actions_ = 0;
    int k_ = 0;
    std::vector<std::vector<double>> points_;   // [s * A + a]
    std::vector<double> priorities_;            // [s * A + a]
};

} // namespace vpirl
