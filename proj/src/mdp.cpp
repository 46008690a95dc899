#include "vpirl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace vpirl {

Mdp::Mdp(int num_states, int num_actions, std::vector<double> reward_support,
         double discount)
    : num_states_(num_states), num_actions_(num_actions),
      reward_support_(std::move(reward_support)), discount_(discount) {
    if (num_states_ <= 0 || num_actions_ <= 0)
        throw std::invalid_argument("Mdp: state and action counts must be positive");
    if (reward_support_.empty())
        throw std::invalid_argument("Mdp: reward support must be nonempty");
    if (!(discount_ > 0.0 && discount_ < 1.0))
        throw std::invalid_argument("Mdp: discount must lie strictly inside (0, 1)");
    const std::size_t rows = static_cast<std::size_t>(num_states_) * num_actions_;
    transition_.assign(rows, std::vector<double>(num_states_, 0.0));
    reward_.assign(rows, std::vector<double>(reward_support_.size(), 0.0));
}

int Mdp::row(int s, int a) const {
    if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_)
        throw std::out_of_range("Mdp: state or action index out of range");
    return s * num_actions_ + a;
}

double Mdp::expected_reward(int s, int a) const {
    const std::vector<double>& dist = reward_row(s, a);
    double mean = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i)
        mean += reward_support_[i] * dist[i];
    return mean;
}

double Mdp::min_reward() const {
    return *std::min_element(reward_support_.begin(), reward_support_.end());
}

double Mdp::max_reward() const {
    return *std::max_element(reward_support_.begin(), reward_support_.end());
}

void Mdp::validate(double tolerance) const {
    if (!(discount_ > 0.0 && discount_ < 1.0))
        throw std::invalid_argument("Mdp: discount must lie strictly inside (0, 1)");
    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            double tsum = 0.0;
            for (double p : transition_row(s, a)) {
                if (p < 0.0) throw std::invalid_argument("Mdp: negative transition probability");
                tsum += p;
            }
            if (std::abs(tsum - 1.0) > tolerance)
                throw std::invalid_argument("Mdp: transition row does not sum to 1");
            double rsum = 0.0;
            for (double p : reward_row(s, a)) {
                if (p < 0.0) throw std::invalid_argument("Mdp: negative reward probability");
                rsum += p;
            }
            if (std::abs(rsum - 1.0) > tolerance)
                throw std::invalid_argument("Mdp: reward row does not sum to 1");
        }
    }
}

void Mdp::dump(std::ostream& os) const {
    char buf[32];
    os << "mdp " << num_states_ << " " << num_actions_ << " ";
    std::snprintf(buf, sizeof(buf), "%.17g", discount_);
    os << buf;
    for (double r : reward_support_) {
        std::snprintf(buf, sizeof(buf), " %.17g", r);
        os << buf;
    }
    os << "\n";
    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            os << s << " " << a;
            for (double p : transition_row(s, a)) {
                std::snprintf(buf, sizeof(buf), " %.17g", p);
                os << buf;
            }
            os << " |";
            for (double p : reward_row(s, a)) {
                std::snprintf(buf, sizeof(buf), " %.17g", p);
                os << buf;
            }
            os << "\n";
        }
    }
}

std::string Mdp::dump_string() const {
    std::ostringstream oss;
    dump(oss);
    return oss.str();
}

double QFunction::state_value(int s) const {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions_; ++a) best = std::max(best, (*this)(s, a));
    return best;
}

int QFunction::greedy_action(int s) const {
    int best_a = 0;
    double best = (*this)(s, 0);
    for (int a = 1; a < num_actions_; ++a) {
        if ((*this)(s, a) > best) {
            best = (*this)(s, a);
            best_a = a;
        }
    }
    return best_a;
}

double bellman_backup(const Mdp& mdp, const QFunction& q, int s, int a) {
    double value = mdp.expected_reward(s, a);
    const std::vector<double>& row = mdp.transition_row(s, a);
    double future = 0.0;
    for (int t = 0; t < mdp.num_states(); ++t) {
        if (row[t] != 0.0) future += row[t] * q.state_value(t);
    }
    return value + mdp.discount() * future;
}

ViResult value_iteration(const Mdp& mdp, double tolerance, int max_iters,
                         CostCounters* counters) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("value_iteration: tolerance must be > 0");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();

    // Cache expected rewards; they do not change between sweeps.
    std::vector<double> mean_reward(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) mean_reward[s * A + a] = mdp.expected_reward(s, a);

    ViResult result;
    result.q = QFunction(S, A, 0.0);
    std::vector<double> v(S, 0.0);
    QFunction next(S, A, 0.0);

    for (int iter = 0; iter < max_iters; ++iter) {
        double diff = 0.0;
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const std::vector<double>& row = mdp.transition_row(s, a);
                double future = 0.0;
                for (int t = 0; t < S; ++t) future += row[t] * v[t];
                double value = mean_reward[s * A + a] + mdp.discount() * future;
                diff = std::max(diff, std::abs(value - result.q(s, a)));
                next(s, a) = value;
            }
        }
        if (counters) counters->vi_backups += S;
        std::swap(result.q, next);
        for (int s = 0; s < S; ++s) v[s] = result.q.state_value(s);
        result.iterations = iter + 1;
        result.residual = diff;
        if (diff <= tolerance) {
            result.converged = true;
            break;
        }
    }
    if (counters) counters->vi_solves += 1;
    return result;
}

namespace {

// Max-heap entries ordered by priority, ties broken by lowest state id.
struct QueueEntry {
    double priority;
    int state;
    bool operator<(const QueueEntry& other) const {
        if (priority != other.priority) return priority < other.priority;
        return state > other.state;
    }
};

} // namespace

QFunction prioritized_sweep(const Mdp& mdp, QFunction q,
                            const std::vector<int>& seeds, int max_backups,
                            double priority_threshold, CostCounters* counters) {
    if (seeds.empty() || max_backups <= 0) return q;
    const int S = mdp.num_states();
    const int A = mdp.num_actions();

    // Predecessor lists: for each state t, the (s, a) pairs with positive
    // probability of reaching t.
    std::vector<std::vector<std::pair<int, double>>> preds(S);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const std::vector<double>& row = mdp.transition_row(s, a);
            for (int t = 0; t < S; ++t)
                if (row[t] > 0.0) preds[t].push_back({s, row[t]});
        }
    }

    std::vector<double> current_priority(S, 0.0);
    std::priority_queue<QueueEntry> heap;
    const double inf = std::numeric_limits<double>::infinity();
    for (int s : seeds) {
        if (s < 0 || s >= S) throw std::out_of_range("prioritized_sweep: seed out of range");
        current_priority[s] = inf;
        heap.push({inf, s});
    }

    int backups = 0;
    while (backups < max_backups && !heap.empty()) {
        QueueEntry top = heap.top();
        heap.pop();
        if (top.priority != current_priority[top.state]) continue;  // stale entry
        if (top.priority < priority_threshold) break;
        int s = top.state;
        current_priority[s] = 0.0;

        double v_old = q.state_value(s);
        for (int a = 0; a < A; ++a) q(s, a) = bellman_backup(mdp, q, s, a);
        double delta = std::abs(q.state_value(s) - v_old);
        ++backups;
        if (counters) counters->sweep_backups += 1;

        if (delta > 0.0) {
            for (const auto& [p_state, prob] : preds[s]) {
                double candidate = prob * delta;
                if (candidate > current_priority[p_state]) {
                    current_priority[p_state] = candidate;
                    heap.push({candidate, p_state});
                }
            }
        }
    }
    return q;
}

} // namespace vpirl
