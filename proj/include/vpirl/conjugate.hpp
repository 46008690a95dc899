#pragma once

#include <map>
#include <vector>

#include "vpirl/rng.hpp"

namespace vpirl {

/**
Conjugate Dirichlet posterior over a multinomial with L outcomes. The hyper
vector folds the prior pseudo-counts and the observed counts together, so an
update is a single increment.
*/
class DirichletPosterior {
public:
    DirichletPosterior() = default;
    explicit DirichletPosterior(std::vector<double> hyper);
    /// Symmetric prior: every outcome gets hyper-parameter alpha.
    static DirichletPosterior symmetric(int num_outcomes, double alpha);

    int num_outcomes() const { return static_cast<int>(hyper_.size()); }
    const std::vector<double>& hyper() const { return hyper_; }
    double hyper_sum() const;

    /// Records one observation of `outcome`.
    void update(int outcome);

    /// Posterior predictive: normalized hyper vector.
    std::vector<double> predictive() const;

    /// Draws a probability vector via independent Gamma variates.
    std::vector<double> sample(RngEngine& rng) const;

    bool operator==(const DirichletPosterior& other) const = default;

private:
    std::vector<double> hyper_;
};

/// Observed-outcome probabilities plus the total mass reserved for outcomes
/// never seen. `observed` is keyed by outcome index.
struct SparsePrediction {
    std::vector<std::pair<int, double>> observed;
    double novel_mass = 0.0;

    /// Expands to a dense vector of length L with the novel mass spread
    /// uniformly over the unseen outcomes.
    std::vector<double> dense(int universe_size) const;
    /// Probability of a specific outcome under the uniform spreading rule.
    double probability_of(int outcome, int universe_size) const;
};

/**
Two-tier sparse-multinomial posterior: a prior over the size of the feasible
outcome set combined with a symmetric Dirichlet (hyper-parameter alpha) over
the outcomes in that set. Predictions scale the Dirichlet prediction over the
observed outcomes by a factor C and reserve 1 - C for novel outcomes.
*/
class SparseMultinomialPosterior {
public:
    SparseMultinomialPosterior() = default;
    /// `size_prior[k-1]` is the prior probability that exactly k outcomes are
    /// feasible, k = 1..L. Pass an empty vector for the uniform prior.
    SparseMultinomialPosterior(int universe_size, double alpha,
                               std::vector<double> size_prior = {});

    int universe_size() const { return universe_size_; }
    double alpha() const { return alpha_; }
    const std::map<int, int>& observed_counts() const { return counts_; }
    const std::vector<double>& size_prior() const { return size_prior_; }

    int num_observed() const { return static_cast<int>(counts_.size()); }  // k°
    int total_count() const { return total_count_; }                       // N

    void update(int outcome);

    /// P(S = k | D) for k = 1..L (entries below k° are zero). Computed in
    /// log space to keep Gamma ratios finite for large N.
    std::vector<double> size_posterior() const;

    /// Scaling factor applied to the observed-outcome Dirichlet prediction;
    /// 1 - C is the novel-outcome mass.
    double scaling_factor() const;  // C(D, L)

    SparsePrediction predictive() const;

    /// Draws by first sampling a support size k from the size posterior, then
    /// a k-dimensional Dirichlet whose first k° coordinates carry alpha + N_i;
    /// the trailing coordinates are pooled into the novel mass.
    SparsePrediction sample(RngEngine& rng) const;

    bool operator==(const SparseMultinomialPosterior& other) const {
        return universe_size_ == other.universe_size_ && alpha_ == other.alpha_ &&
               counts_ == other.counts_ && total_count_ == other.total_count_ &&
               size_prior_ == other.size_prior_;
    }

private:
    int universe_size_ = 0;
    double alpha_ = 1.0;
    std::map<int, int> counts_;
    int total_count_ = 0;
    std::vector<double> size_prior_;
    // memo for the size posterior; recomputed after each update
    mutable bool size_post_valid_ = false;
    mutable std::vector<double> size_post_cache_;
};

/// Gamma draws with unit scale, then normalization. Redraws in the
/// (probability-zero) event that every variate underflows to zero.
std::vector<double> sample_dirichlet(const std::vector<double>& hyper, RngEngine& rng);

} // namespace vpirl
