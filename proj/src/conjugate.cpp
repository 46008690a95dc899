#include "vpirl/conjugate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace vpirl {

DirichletPosterior::DirichletPosterior(std::vector<double> hyper)
    : hyper_(std::move(hyper)) {
    if (hyper_.empty()) throw std::invalid_argument("DirichletPosterior: empty hyper vector");
    for (double h : hyper_)
        if (!(h > 0.0)) throw std::invalid_argument("DirichletPosterior: hyper-parameters must be positive");
}

DirichletPosterior DirichletPosterior::symmetric(int num_outcomes, double alpha) {
    return DirichletPosterior(std::vector<double>(num_outcomes, alpha));
}

double DirichletPosterior::hyper_sum() const {
    return std::accumulate(hyper_.begin(), hyper_.end(), 0.0);
}

void DirichletPosterior::update(int outcome) {
    if (outcome < 0 || outcome >= num_outcomes())
        throw std::out_of_range("DirichletPosterior::update: outcome out of range");
    hyper_[outcome] += 1.0;
}

std::vector<double> DirichletPosterior::predictive() const {
    std::vector<double> p = hyper_;
    double total = hyper_sum();
    for (double& x : p) x /= total;
    return p;
}

std::vector<double> DirichletPosterior::sample(RngEngine& rng) const {
    return sample_dirichlet(hyper_, rng);
}

std::vector<double> sample_dirichlet(const std::vector<double>& hyper, RngEngine& rng) {
    std::vector<double> y(hyper.size());
    for (int attempt = 0; attempt < 100; ++attempt) {
        double total = 0.0;
        for (std::size_t i = 0; i < hyper.size(); ++i) {
            y[i] = std::gamma_distribution<double>(hyper[i], 1.0)(rng);
            total += y[i];
        }
        if (total > 0.0) {
            for (double& v : y) v /= total;
            return y;
        }
    }
    throw std::runtime_error("sample_dirichlet: gamma draws degenerate");
}

SparseMultinomialPosterior::SparseMultinomialPosterior(int universe_size, double alpha,
                                                       std::vector<double> size_prior)
    : universe_size_(universe_size), alpha_(alpha), size_prior_(std::move(size_prior)) {
    if (universe_size_ <= 0)
        throw std::invalid_argument("SparseMultinomialPosterior: universe size must be positive");
    if (!(alpha_ > 0.0))
        throw std::invalid_argument("SparseMultinomialPosterior: alpha must be positive");
    if (size_prior_.empty()) {
        size_prior_.assign(universe_size_, 1.0 / universe_size_);
    } else if (static_cast<int>(size_prior_.size()) != universe_size_) {
        throw std::invalid_argument("SparseMultinomialPosterior: size prior must have one entry per k = 1..L");
    }
    double total = std::accumulate(size_prior_.begin(), size_prior_.end(), 0.0);
    if (!(total > 0.0))
        throw std::invalid_argument("SparseMultinomialPosterior: size prior must have positive mass");
    for (double& p : size_prior_) p /= total;
}

void SparseMultinomialPosterior::update(int outcome) {
    if (outcome < 0 || outcome >= universe_size_)
        throw std::out_of_range("SparseMultinomialPosterior::update: outcome out of range");
    counts_[outcome] += 1;
    total_count_ += 1;
    size_post_valid_ = false;
}

std::vector<double> SparseMultinomialPosterior::size_posterior() const {
    if (size_post_valid_) return size_post_cache_;
    const int L = universe_size_;
    const int k0 = num_observed();
    const int N = total_count_;
    std::vector<double> post(L, 0.0);
    if (N == 0) {
        size_post_cache_ = size_prior_;
        size_post_valid_ = true;
        return size_prior_;
    }

    // log m_k = log P(S=k) + log k!/(k-k0)! + log Gamma(k a) - log Gamma(k a + N)
    std::vector<double> logm(L, -std::numeric_limits<double>::infinity());
    double best = -std::numeric_limits<double>::infinity();
    for (int k = std::max(k0, 1); k <= L; ++k) {
        if (size_prior_[k - 1] <= 0.0) continue;
        double lm = std::log(size_prior_[k - 1]);
        lm += std::lgamma(k + 1.0) - std::lgamma(k - k0 + 1.0);
        lm += std::lgamma(k * alpha_) - std::lgamma(k * alpha_ + N);
        logm[k - 1] = lm;
        best = std::max(best, lm);
    }
    if (!std::isfinite(best))
        throw std::runtime_error("size_posterior: prior excludes every feasible support size");
    double total = 0.0;
    for (int k = std::max(k0, 1); k <= L; ++k)
        if (std::isfinite(logm[k - 1])) total += std::exp(logm[k - 1] - best);
    for (int k = std::max(k0, 1); k <= L; ++k)
        if (std::isfinite(logm[k - 1])) post[k - 1] = std::exp(logm[k - 1] - best) / total;
    size_post_cache_ = post;
    size_post_valid_ = true;
    return post;
}

double SparseMultinomialPosterior::scaling_factor() const {
    const int k0 = num_observed();
    const int N = total_count_;
    if (k0 == universe_size_) return 1.0;
    std::vector<double> post = size_posterior();
    double c = 0.0;
    for (int k = std::max(k0, 1); k <= universe_size_; ++k)
        c += (k0 * alpha_ + N) / (k * alpha_ + N) * post[k - 1];
    return std::min(c, 1.0);
}

SparsePrediction SparseMultinomialPosterior::predictive() const {
    const int k0 = num_observed();
    const int N = total_count_;
    SparsePrediction pred;
    if (k0 == 0) {
        pred.novel_mass = 1.0;
        return pred;
    }
    double c = scaling_factor();
    double denom = k0 * alpha_ + N;
    pred.observed.reserve(counts_.size());
    for (const auto& [outcome, count] : counts_)
        pred.observed.push_back({outcome, (alpha_ + count) / denom * c});
    pred.novel_mass = (k0 == universe_size_) ? 0.0 : 1.0 - c;
    return pred;
}

SparsePrediction SparseMultinomialPosterior::sample(RngEngine& rng) const {
    const int k0 = num_observed();
    std::vector<double> post = size_posterior();
    int k = sample_index(post, rng) + 1;

    std::vector<double> hyper;
    hyper.reserve(k);
    for (const auto& [outcome, count] : counts_) hyper.push_back(alpha_ + count);
    for (int i = k0; i < k; ++i) hyper.push_back(alpha_);
    std::vector<double> theta = sample_dirichlet(hyper, rng);

    SparsePrediction draw;
    draw.observed.reserve(k0);
    int i = 0;
    for (const auto& [outcome, count] : counts_) draw.observed.push_back({outcome, theta[i++]});
    for (; i < k; ++i) draw.novel_mass += theta[i];
    return draw;
}

std::vector<double> SparsePrediction::dense(int universe_size) const {
    std::vector<double> p(universe_size, 0.0);
    int unseen = universe_size - static_cast<int>(observed.size());
    double spread = (unseen > 0) ? novel_mass / unseen : 0.0;
    for (double& x : p) x = spread;
    for (const auto& [outcome, prob] : observed) p[outcome] = prob;
    return p;
}

double SparsePrediction::probability_of(int outcome, int universe_size) const {
    for (const auto& [o, prob] : observed)
        if (o == outcome) return prob;
    int unseen = universe_size - static_cast<int>(observed.size());
    return (unseen > 0) ? novel_mass / unseen : 0.0;
}

} // namespace vpirl
