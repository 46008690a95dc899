#include "vpirl/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace vpirl {

double QSampleSet::total_weight() const {
    double total = 0.0;
    for (const WeightedModel& m : models) total += m.weight;
    return total;
}

WeightedSamples QSampleSet::samples_at(int s, int a) const {
    WeightedSamples out;
    out.values.reserve(models.size());
    out.weights.reserve(models.size());
    for (const WeightedModel& m : models) {
        out.values.push_back(m.q(s, a));
        out.weights.push_back(m.weight);
    }
    return out;
}

QSampleSet naive_sample(const BeliefState& belief, int k, RngEngine& rng,
                        CostCounters* counters, double vi_tolerance) {
    if (k < 1) throw std::invalid_argument("naive_sample: k must be at least 1");
    QSampleSet set;
    set.k = k;
    set.k_min = k / 4.0;
    set.models.reserve(k);
    for (int i = 0; i < k; ++i) {
        WeightedModel model;
        model.mdp = belief.sample_mdp(rng, counters);
        model.q = value_iteration(model.mdp, vi_tolerance, kDefaultViMaxIters, counters).q;
        model.weight = 1.0;
        set.models.push_back(std::move(model));
    }
    return set;
}

double q_mean(const QSampleSet& set, int s, int a) {
    double total = set.total_weight();
    if (!(total > 0.0))
        throw std::runtime_error("q_mean: total weight is zero; refresh the sample set");
    double acc = 0.0;
    for (const WeightedModel& m : set.models) acc += m.weight * m.q(s, a);
    return acc / total;
}

void importance_reweight(QSampleSet& set, const ExperienceTuple& e,
                         const BeliefState& belief_before) {
    double marginal = belief_before.tuple_likelihood(e);
    if (!(marginal > 0.0))
        throw std::runtime_error("importance_reweight: tuple has zero marginal likelihood");
    int r_idx = belief_before.reward_index(e.r);
    for (WeightedModel& m : set.models) {
        double model_likelihood =
            m.mdp.transition_row(e.s, e.a)[e.t] * m.mdp.reward_row(e.s, e.a)[r_idx];
        m.weight *= model_likelihood / marginal;
    }
}

int refresh_if_depleted(QSampleSet& set, const BeliefState& belief, RngEngine& rng,
                        CostCounters* counters, double vi_tolerance) {
    if (set.total_weight() >= set.k_min) return 0;
    int replace = set.k - static_cast<int>(set.k_min);
    replace = std::min(replace, static_cast<int>(set.models.size()));

    // Indices of the lowest-weight models, lowest first; ties by index.
    std::vector<int> order(set.models.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) {
        return set.models[lhs].weight < set.models[rhs].weight;
    });

    for (int i = 0; i < replace; ++i) {
        WeightedModel& slot = set.models[order[i]];
        slot.mdp = belief.sample_mdp(rng, counters);
        slot.q = value_iteration(slot.mdp, vi_tolerance, kDefaultViMaxIters, counters).q;
        slot.weight = 1.0;
    }
    return replace;
}

void repair_step(QSampleSet& set, const ExperienceTuple& e, const BeliefState& belief_after,
                 RngEngine& rng, int sweep_budget, double priority_threshold,
                 CostCounters* counters) {
    for (WeightedModel& m : set.models) {
        m.mdp.transition_row(e.s, e.a) = belief_after.sample_transition_row(e.s, e.a, rng);
        m.mdp.reward_row(e.s, e.a) = belief_after.sample_reward_row(e.s, e.a, rng);
        if (counters) counters->rows_sampled += 2;
        m.q = prioritized_sweep(m.mdp, std::move(m.q), {e.s}, sweep_budget,
                                priority_threshold, counters);
    }
}

void export_sample_set(std::ostream& os, const QSampleSet& set) {
    os << "state,action,sample,value,weight\n";
    if (set.models.empty()) return;
    const int S = set.models[0].mdp.num_states();
    const int A = set.models[0].mdp.num_actions();
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (std::size_t i = 0; i < set.models.size(); ++i)
                os << s << "," << a << "," << i << "," << set.models[i].q(s, a) << ","
                   << set.models[i].weight << "\n";
}

LocalQTable::LocalQTable(const BeliefState& belief, int k)
    : num_states_(belief.num_states()), num_actions_(belief.num_actions()), k_(k) {
    if (k_ < 1) throw std::invalid_argument("LocalQTable: k must be at least 1");
    double r_max = *std::max_element(belief.reward_support().begin(),
                                     belief.reward_support().end());
    double optimistic = r_max / (1.0 - belief.discount());
    points_.assign(static_cast<std::size_t>(num_states_) * num_actions_,
                   std::vector<double>(k_, optimistic));
    priorities_.assign(points_.size(), 0.0);
}

const std::vector<double>& LocalQTable::points(int s, int a) const {
    return points_[static_cast<std::size_t>(s) * num_actions_ + a];
}

WeightedSamples LocalQTable::samples_at(int s, int a) const {
    WeightedSamples out;
    out.values = points(s, a);
    out.weights.assign(out.values.size(), 1.0);
    return out;
}

double LocalQTable::mean(int s, int a) const {
    const std::vector<double>& pts = points(s, a);
    return std::accumulate(pts.begin(), pts.end(), 0.0) / pts.size();
}

double LocalQTable::priority(int s, int a) const {
    return priorities_[static_cast<std::size_t>(s) * num_actions_ + a];
}

void LocalQTable::add_priority(int s, int a, double value) {
    priorities_[static_cast<std::size_t>(s) * num_actions_ + a] += value;
}

void LocalQTable::update(const BeliefState& belief, int s, int a, RngEngine& rng) {
    std::vector<double>& pts = points_[static_cast<std::size_t>(s) * num_actions_ + a];
    std::vector<double> fresh(k_);
    const std::vector<double>& support = belief.reward_support();
    std::uniform_int_distribution<int> pick(0, k_ - 1);

    for (int j = 0; j < k_; ++j) {
        std::vector<double> row = belief.sample_transition_row(s, a, rng);
        std::vector<double> rdist = belief.sample_reward_row(s, a, rng);
        double mean_reward = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) mean_reward += support[i] * rdist[i];

        double future = 0.0;
        for (int t = 0; t < num_states_; ++t) {
            if (row[t] <= 0.0) continue;
            // one stored point per successor action; max over actions
            double v = -std::numeric_limits<double>::infinity();
            for (int b = 0; b < num_actions_; ++b) {
                const std::vector<double>& succ = points(t, b);
                v = std::max(v, succ[pick(rng)]);
            }
            future += row[t] * v;
        }
        fresh[j] = mean_reward + belief.discount() * future;
    }

    double change = 0.0;
    for (int j = 0; j < k_; ++j) change += std::abs(fresh[j] - pts[j]);
    change /= k_;
    pts = fresh;
    priorities_[static_cast<std::size_t>(s) * num_actions_ + a] = 0.0;

    if (change > 0.0) {
        for (int sp = 0; sp < num_states_; ++sp) {
            for (int ap = 0; ap < num_actions_; ++ap) {
                double reach = belief.transition_predictive(sp, ap)[s];
                if (reach > 0.0) add_priority(sp, ap, reach * change);
            }
        }
    }
}

int LocalQTable::sweep(const BeliefState& belief, int budget, double threshold,
                       RngEngine& rng) {
    int updates = 0;
    while (updates < budget) {
        int best = -1;
        double best_priority = threshold;
        for (std::size_t i = 0; i < priorities_.size(); ++i) {
            if (priorities_[i] > best_priority) {
                best_priority = priorities_[i];
                best = static_cast<int>(i);
            }
        }
        if (best < 0) break;
        update(belief, best / num_actions_, best % num_actions_, rng);
        ++updates;
    }
    return updates;
}

} // namespace vpirl
