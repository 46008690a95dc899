#include "vpirl/vpi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace vpirl {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// E[(X - c)+] for X ~ N(m, sigma^2).
double partial_expectation_above(double m, double sigma, double c) {
    double z = (m - c) / sigma;
    return (m - c) * normal_cdf(z) + sigma * normal_pdf(z);
}

/// E[(c - X)+] for X ~ N(m, sigma^2).
double partial_expectation_below(double m, double sigma, double c) {
    double z = (c - m) / sigma;
    return (c - m) * normal_cdf(z) + sigma * normal_pdf(z);
}

} // namespace

double WeightedSamples::total_weight() const {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("WeightedSamples: negative weight");
        total += w;
    }
    return total;
}

double WeightedSamples::mean() const {
    double total = total_weight();
    if (!(total > 0.0))
        throw std::runtime_error("WeightedSamples: total weight is zero; sample set needs a refresh");
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m += weights[i] * values[i];
    return m / total;
}

double WeightedSamples::variance() const {
    double m = mean();
    double total = total_weight();
    double var = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        var += weights[i] * (values[i] - m) * (values[i] - m);
    return var / total;
}

double QDistribution::density(double x) const {
    switch (kind) {
        case Kind::Gaussian: {
            double sigma = std::sqrt(variance);
            return normal_pdf((x - mean) / sigma) / sigma;
        }
        case Kind::KernelMixture: {
            double sigma = std::sqrt(kernel_variance);
            double total = 0.0, dens = 0.0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                total += weights[i];
                dens += weights[i] * normal_pdf((x - values[i]) / sigma) / sigma;
            }
            return dens / total;
        }
        case Kind::PointSamples:
            throw std::logic_error("QDistribution::density: point samples have no density");
    }
    return 0.0;
}

double QDistribution::distribution_mean() const {
    if (kind == Kind::Gaussian) return mean;
    WeightedSamples s{values, weights};
    return s.mean();
}

ActionValueSummary ActionValueSummary::from_expected(std::vector<double> expected) {
    if (expected.empty())
        throw std::invalid_argument("ActionValueSummary: no actions");
    ActionValueSummary summary;
    summary.expected = std::move(expected);
    summary.best = 0;
    for (std::size_t a = 1; a < summary.expected.size(); ++a)
        if (summary.expected[a] > summary.expected[summary.best])
            summary.best = static_cast<int>(a);
    summary.second = -1;
    for (std::size_t a = 0; a < summary.expected.size(); ++a) {
        if (static_cast<int>(a) == summary.best) continue;
        if (summary.second < 0 || summary.expected[a] > summary.expected[summary.second])
            summary.second = static_cast<int>(a);
    }
    return summary;
}

double ActionValueSummary::second_value() const {
    return second >= 0 ? expected[second] : -std::numeric_limits<double>::infinity();
}

double gain(double q_star, const ActionValueSummary& summary, int a) {
    if (a == summary.best) {
        double e2 = summary.second_value();
        if (q_star < e2) return e2 - q_star;
    } else {
        double e1 = summary.best_value();
        if (q_star > e1) return q_star - e1;
    }
    return 0.0;
}

double vpi_samples(const WeightedSamples& samples, const ActionValueSummary& summary, int a) {
    double total = samples.total_weight();
    if (!(total > 0.0))
        throw std::runtime_error("vpi_samples: total weight is zero; sample set needs a refresh");
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.values.size(); ++i)
        acc += samples.weights[i] * gain(samples.values[i], summary, a);
    return acc / total;
}

QDistribution fit_gaussian(const WeightedSamples& samples) {
    QDistribution dist;
    double var = samples.variance();
    if (!(var > 0.0)) {
        dist.kind = QDistribution::Kind::PointSamples;
        dist.values = samples.values;
        dist.weights = samples.weights;
        return dist;
    }
    dist.kind = QDistribution::Kind::Gaussian;
    dist.mean = samples.mean();
    dist.variance = var;
    return dist;
}

double kernel_width(const std::vector<double>& points) {
    const std::size_t k = points.size();
    if (k < 2) throw std::invalid_argument("kernel_width: need at least two points");
    // sum_{i != j} (x_i - x_j)^2 == 2k * sum_i (x_i - mean)^2
    double mean = 0.0;
    for (double x : points) mean += x;
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (double x : points) ss += (x - mean) * (x - mean);
    double d = 2.0 * static_cast<double>(k) * ss / (static_cast<double>(k) * (k - 1));
    if (!(d > 0.0)) throw std::invalid_argument("kernel_width: all points coincide");
    return d / 4.0;
}

QDistribution fit_kernel(const WeightedSamples& samples) {
    QDistribution dist;
    double var = samples.variance();
    if (!(var > 0.0) || samples.values.size() < 2) {
        dist.kind = QDistribution::Kind::PointSamples;
        dist.values = samples.values;
        dist.weights = samples.weights;
        return dist;
    }
    dist.kind = QDistribution::Kind::KernelMixture;
    dist.values = samples.values;
    dist.weights = samples.weights;
    dist.kernel_variance = kernel_width(samples.values);
    return dist;
}

double vpi_closed_form(const QDistribution& dist, const ActionValueSummary& summary, int a) {
    if (dist.kind == QDistribution::Kind::PointSamples)
        return vpi_samples(WeightedSamples{dist.values, dist.weights}, summary, a);

    const bool is_best = (a == summary.best);
    const double c = is_best ? summary.second_value() : summary.best_value();
    if (std::isinf(c)) return 0.0;  // single-action case: nothing to flip

    if (dist.kind == QDistribution::Kind::Gaussian) {
        double sigma = std::sqrt(dist.variance);
        return is_best ? partial_expectation_below(dist.mean, sigma, c)
                       : partial_expectation_above(dist.mean, sigma, c);
    }

    double sigma = std::sqrt(dist.kernel_variance);
    double total = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < dist.values.size(); ++i) {
        total += dist.weights[i];
        acc += dist.weights[i] * (is_best ? partial_expectation_below(dist.values[i], sigma, c)
                                          : partial_expectation_above(dist.values[i], sigma, c));
    }
    return acc / total;
}

std::vector<double> action_scores(const std::vector<WeightedSamples>& samples_per_action,
                                  SmoothingMode mode) {
    const std::size_t num_actions = samples_per_action.size();
    if (num_actions == 0) throw std::invalid_argument("action_scores: no actions");

    std::vector<double> expected(num_actions);
    for (std::size_t a = 0; a < num_actions; ++a) expected[a] = samples_per_action[a].mean();
    ActionValueSummary summary = ActionValueSummary::from_expected(expected);

    std::vector<double> scores(num_actions);
    for (std::size_t a = 0; a < num_actions; ++a) {
        double bonus;
        switch (mode) {
            case SmoothingMode::None:
                bonus = vpi_samples(samples_per_action[a], summary, static_cast<int>(a));
                break;
            case SmoothingMode::Gaussian:
                bonus = vpi_closed_form(fit_gaussian(samples_per_action[a]), summary,
                                        static_cast<int>(a));
                break;
            case SmoothingMode::Kernel:
                bonus = vpi_closed_form(fit_kernel(samples_per_action[a]), summary,
                                        static_cast<int>(a));
                break;
            default:
                throw std::logic_error("action_scores: unknown smoothing mode");
        }
        scores[a] = expected[a] + bonus;
    }
    return scores;
}

int select_action(const std::vector<WeightedSamples>& samples_per_action, SmoothingMode mode) {
    std::vector<double> scores = action_scores(samples_per_action, mode);
    int best = 0;
    for (std::size_t a = 1; a < scores.size(); ++a)
        if (scores[a] > scores[best]) best = static_cast<int>(a);
    return best;
}

void export_distribution_snapshot(std::ostream& os,
                                  const std::vector<WeightedSamples>& samples_per_action,
                                  const std::vector<double>& density_grid) {
    os << "action,field,index,value\n";
    for (std::size_t a = 0; a < samples_per_action.size(); ++a) {
        const WeightedSamples& samples = samples_per_action[a];
        for (std::size_t i = 0; i < samples.values.size(); ++i) {
            os << a << ",sample," << i << "," << samples.values[i] << "\n";
            os << a << ",weight," << i << "," << samples.weights[i] << "\n";
        }
        QDistribution gauss = fit_gaussian(samples);
        if (gauss.kind == QDistribution::Kind::Gaussian) {
            os << a << ",gaussian_mean,0," << gauss.mean << "\n";
            os << a << ",gaussian_variance,0," << gauss.variance << "\n";
        }
        QDistribution kern = fit_kernel(samples);
        if (kern.kind == QDistribution::Kind::KernelMixture) {
            os << a << ",kernel_variance,0," << kern.kernel_variance << "\n";
            for (std::size_t i = 0; i < density_grid.size(); ++i)
                os << a << ",kernel_density," << i << "," << kern.density(density_grid[i])
                   << "\n";
        }
    }
}

} // namespace vpirl
