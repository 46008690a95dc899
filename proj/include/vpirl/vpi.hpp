#pragma once

#include <iosfwd>
#include <vector>

#include "vpirl/mdp.hpp"

namespace vpirl {

/// Weighted scalar samples of a single Q-value.
struct WeightedSamples {
    std::vector<double> values;
    std::vector<double> weights;

    double total_weight() const;
    double mean() const;
    /// Weighted population variance.
    double variance() const;
};

/**
One-dimensional distribution over a Q-value: either the raw weighted sample
points, a single Gaussian moment fit, or an equal-variance Gaussian mixture
with one component per sample (kernel estimate).
*/
struct QDistribution {
    enum class Kind { PointSamples, Gaussian, KernelMixture };
    Kind kind = Kind::PointSamples;

    // PointSamples / KernelMixture: component locations and weights.
    std::vector<double> values;
    std::vector<double> weights;

    // Gaussian: first two moments.
    double mean = 0.0;
    double variance = 0.0;

    // KernelMixture: shared component variance.
    double kernel_variance = 0.0;

    /// Density at x (smoothed variants only).
    double density(double x) const;
    double distribution_mean() const;
};

/// Per-action expected Q-values with the best and second-best action indices
/// (ties broken by lowest index). With a single action, `second` is -1.
struct ActionValueSummary {
    std::vector<double> expected;
    int best = 0;
    int second = -1;

    static ActionValueSummary from_expected(std::vector<double> expected);
    double best_value() const { return expected[best]; }
    double second_value() const;  // -infinity when no second action exists
};

/// Improvement in expected future reward if the Q-value of action `a` were
/// revealed to be exactly q_star. Zero unless the revelation flips which
/// action looks best.
double gain(double q_star, const ActionValueSummary& summary, int a);

/// Sample-based VPI: weighted average of the gain over the points.
double vpi_samples(const WeightedSamples& samples, const ActionValueSummary& summary, int a);

/// Moment fit. Falls back to the raw points when the spread is degenerate.
QDistribution fit_gaussian(const WeightedSamples& samples);

/// Kernel width rule: sigma^2 = d / 4 with d the average squared distance
/// between distinct sample pairs. Throws when all points coincide.
double kernel_width(const std::vector<double>& points);

/// Equal-variance Gaussian mixture with one component per sample point and
/// shared variance kernel_width(points). Falls back to the raw points when
/// the spread is degenerate.
QDistribution fit_kernel(const WeightedSamples& samples);

/// Closed-form VPI for Gaussian or kernel-mixture distributions via
/// truncated-moment identities (one Gaussian cdf evaluation per component).
/// PointSamples inputs are routed through vpi_samples.
double vpi_closed_form(const QDistribution& dist, const ActionValueSummary& summary, int a);

enum class SmoothingMode { None, Gaussian, Kernel };

/**
VPI action selection: builds the per-action expected values, computes the
exploration bonus VPI(s, a) under the requested smoothing mode, and returns
argmax_a E[q_a] + VPI(a) with ties broken by lowest action index.
`samples_per_action[a]` holds the Q-value samples for action a.
*/
int select_action(const std::vector<WeightedSamples>& samples_per_action,
                  SmoothingMode mode);

/// The bonus-adjusted scores the selection maximizes (for diagnostics).
std::vector<double> action_scores(const std::vector<WeightedSamples>& samples_per_action,
                                  SmoothingMode mode);

/// Columnar snapshot of per-action Q-value distributions at one state: the
/// sample points, Gaussian fit, kernel width, and a tabulated density curve
/// on the caller's grid.
void export_distribution_snapshot(std::ostream& os,
                                  const std::vector<WeightedSamples>& samples_per_action,
                                  const std::vector<double>& density_grid);

} // namespace vpirl
