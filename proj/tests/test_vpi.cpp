#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "vpirl/tbored.hpp"
#include "vpirl/vpi.hpp"

using namespace vpirl;

namespace {

ActionValueSummary summary_of(std::vector<double> expected) {
    return ActionValueSummary::from_expected(std::move(expected));
}

WeightedSamples unit_weights(std::vector<double> values) {
    WeightedSamples s;
    s.weights.assign(values.size(), 1.0);
    s.values = std::move(values);
    return s;
}

/// Adaptive Simpson integration of f over [lo, hi]. The interval is first
/// split into fixed panels so narrow features cannot be missed by the
/// initial coarse samples.
template <typename F>
double adaptive_simpson(F f, double lo, double hi, double eps = 1e-10, int depth = 30,
                        int panels = 64) {
    auto simpson = [&](double a, double b) {
        double c = 0.5 * (a + b);
        return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
    };
    std::function<double(double, double, double, int)> rec =
        [&](double a, double b, double whole, int d) -> double {
        double c = 0.5 * (a + b);
        double left = simpson(a, c), right = simpson(c, b);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * eps)
            return left + right + (left + right - whole) / 15.0;
        return rec(a, c, left, d - 1) + rec(c, b, right, d - 1);
    };
    double total = 0.0;
    double width = (hi - lo) / panels;
    for (int i = 0; i < panels; ++i) {
        double a = lo + i * width, b = a + width;
        total += rec(a, b, simpson(a, b), depth);
    }
    return total;
}

} // namespace

TEST_CASE("gain") {
    ActionValueSummary s = summary_of({10.0, 8.0, 3.0});
    CHECK(s.best == 0);
    CHECK(s.second == 1);

    // best action revealed worse than the runner-up
    CHECK(gain(7.0, s, 0) == doctest::Approx(1.0));
    // non-best action revealed better than the leader
    CHECK(gain(12.0, s, 2) == doctest::Approx(2.0));
    // revelations between the two expectations change nothing
    CHECK(gain(9.0, s, 0) == doctest::Approx(0.0));
    CHECK(gain(9.0, s, 2) == doctest::Approx(0.0));
    // boundaries count as no gain
    CHECK(gain(8.0, s, 0) == doctest::Approx(0.0));
    CHECK(gain(10.0, s, 2) == doctest::Approx(0.0));
}

TEST_CASE("gain is piecewise linear and continuous in q_star") {
    ActionValueSummary s = summary_of({5.0, 2.0});
    for (int a = 0; a < 2; ++a) {
        double prev = gain(-20.0, s, a);
        for (double q = -20.0 + 0.01; q <= 20.0; q += 0.01) {
            double g = gain(q, s, a);
            CHECK(std::abs(g - prev) < 0.011);  // slope at most 1
            CHECK(g >= 0.0);
            prev = g;
        }
    }
}

TEST_CASE("vpi_samples") {
    ActionValueSummary s = summary_of({10.0, 8.0});

    SUBCASE("no mass in the gain region") {
        WeightedSamples samples = unit_weights({10.0, 10.0, 10.0});
        CHECK(vpi_samples(samples, s, 0) == doctest::Approx(0.0));
    }
    SUBCASE("per-point gains averaged") {
        WeightedSamples samples = unit_weights({7.0, 9.0, 11.0});
        CHECK(vpi_samples(samples, s, 0) == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("points in the zero region never raise VPI") {
        WeightedSamples samples = unit_weights({7.0, 9.0, 11.0});
        double before = vpi_samples(samples, s, 0);
        samples.values.push_back(9.5);  // inside the zero-gain region for a1
        samples.weights.push_back(1.0);
        CHECK(vpi_samples(samples, s, 0) <= before);
    }
    SUBCASE("zero total weight is an error") {
        WeightedSamples samples{{1.0, 2.0}, {0.0, 0.0}};
        CHECK_THROWS(vpi_samples(samples, s, 0));
    }
}

TEST_CASE("fit_gaussian") {
    QDistribution d = fit_gaussian(unit_weights({0.0, 2.0}));
    CHECK(d.kind == QDistribution::Kind::Gaussian);
    CHECK(d.mean == doctest::Approx(1.0));
    CHECK(d.variance == doctest::Approx(1.0));

    QDistribution flat = fit_gaussian(unit_weights({3.0, 3.0, 3.0}));
    CHECK(flat.kind == QDistribution::Kind::PointSamples);

    QDistribution weighted = fit_gaussian({{0.0, 4.0}, {3.0, 1.0}});
    CHECK(weighted.mean == doctest::Approx(1.0));
    CHECK(weighted.variance == doctest::Approx(3.0));
}

TEST_CASE("kernel_width") {
    CHECK(kernel_width({0.0, 2.0}) == doctest::Approx(1.0));
    CHECK(kernel_width({0.0, 1.0, 2.0}) == doctest::Approx(0.5));
    CHECK_THROWS(kernel_width({5.0, 5.0, 5.0}));
    CHECK_THROWS(kernel_width({5.0}));

    // homogeneity: scaling points by c scales the width by c^2
    std::vector<double> pts = {0.3, 1.7, -2.2, 4.0};
    double base = kernel_width(pts);
    for (double& p : pts) p *= 3.0;
    CHECK(kernel_width(pts) == doctest::Approx(9.0 * base));
}

TEST_CASE("fit_kernel") {
    WeightedSamples samples{{0.0, 1.0, 3.0}, {1.0, 2.0, 1.0}};
    QDistribution d = fit_kernel(samples);
    REQUIRE(d.kind == QDistribution::Kind::KernelMixture);

    double sample_mean = samples.mean();
    double sample_var = samples.variance();
    CHECK(d.distribution_mean() == doctest::Approx(sample_mean));

    // mixture variance = sample variance + kernel variance
    double mix_second = 0.0, total = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        total += d.weights[i];
        mix_second += d.weights[i] * (d.values[i] * d.values[i] + d.kernel_variance);
    }
    mix_second /= total;
    CHECK(mix_second - sample_mean * sample_mean ==
          doctest::Approx(sample_var + d.kernel_variance));

    // density integrates to one
    double mass = adaptive_simpson([&](double x) { return d.density(x); }, -40.0, 40.0, 1e-9);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

    CHECK(fit_kernel(unit_weights({2.0, 2.0})).kind == QDistribution::Kind::PointSamples);
}

TEST_CASE("vpi_closed_form") {
    SUBCASE("standard normal partial expectation") {
        ActionValueSummary s = summary_of({0.0, -5.0});
        QDistribution d;
        d.kind = QDistribution::Kind::Gaussian;
        d.mean = 0.0;
        d.variance = 1.0;
        // action 1 is not the best; threshold is E[q_a1] = 0
        CHECK(vpi_closed_form(d, s, 1) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
    }
    SUBCASE("distant tails vanish") {
        ActionValueSummary s = summary_of({0.0, -5.0});
        QDistribution d;
        d.kind = QDistribution::Kind::Gaussian;
        d.mean = -10.0;  // 10 sigma below the threshold
        d.variance = 1.0;
        CHECK(vpi_closed_form(d, s, 1) == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("matches quadrature on mixtures") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> unif(-3.0, 3.0);
        for (int trial = 0; trial < 12; ++trial) {
            WeightedSamples samples;
            int n = 3 + static_cast<int>(rng() % 6);
            for (int i = 0; i < n; ++i) {
                samples.values.push_back(unif(rng));
                samples.weights.push_back(0.25 + 0.75 * std::abs(unif(rng)));
            }
            QDistribution d = fit_kernel(samples);
            if (d.kind != QDistribution::Kind::KernelMixture) continue;
            ActionValueSummary s = summary_of({unif(rng), unif(rng)});
            for (int a = 0; a < 2; ++a) {
                double closed = vpi_closed_form(d, s, a);
                double quad = adaptive_simpson(
                    [&](double x) { return gain(x, s, a) * d.density(x); }, -60.0, 60.0,
                    1e-10);
                CHECK(closed == doctest::Approx(quad).epsilon(1e-6));
                CHECK(closed >= 0.0);
            }
        }
    }
}

TEST_CASE("select_action") {
    SUBCASE("greedy when VPI is zero") {
        // point-mass samples: no mass beyond either threshold
        std::vector<WeightedSamples> per_action = {unit_weights({10.0, 10.0}),
                                                   unit_weights({9.0, 9.0})};
        CHECK(select_action(per_action, SmoothingMode::None) == 0);
    }
    SUBCASE("VPI can overturn the greedy choice") {
        // E = (10, 9), VPI = (0, 2) -> action 1
        std::vector<WeightedSamples> per_action = {unit_weights({10.0, 10.0}),
                                                   unit_weights({5.0, 13.0})};
        // action 1 samples: mean 9; the 13 exceeds E[q_a1] = 10 with gain 3,
        // so VPI(1) = 1.5 and 9 + 1.5 > 10
        CHECK(select_action(per_action, SmoothingMode::None) == 1);
    }
    SUBCASE("translation invariance") {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> unif(-5.0, 5.0);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<WeightedSamples> per_action;
            for (int a = 0; a < 3; ++a) {
                WeightedSamples s;
                for (int i = 0; i < 8; ++i) {
                    s.values.push_back(unif(rng));
                    s.weights.push_back(1.0);
                }
                per_action.push_back(s);
            }
            for (SmoothingMode mode :
                 {SmoothingMode::None, SmoothingMode::Gaussian, SmoothingMode::Kernel}) {
                int before = select_action(per_action, mode);
                std::vector<WeightedSamples> shifted = per_action;
                for (auto& s : shifted)
                    for (double& v : s.values) v += 17.5;
                CHECK(select_action(shifted, mode) == before);
            }
        }
    }
    SUBCASE("weight rescaling invariance") {
        std::mt19937_64 rng(29);
        std::uniform_real_distribution<double> unif(-5.0, 5.0);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<WeightedSamples> per_action;
            for (int a = 0; a < 3; ++a) {
                WeightedSamples s;
                for (int i = 0; i < 6; ++i) {
                    s.values.push_back(unif(rng));
                    s.weights.push_back(0.5 + std::abs(unif(rng)));
                }
                per_action.push_back(s);
            }
            int before = select_action(per_action, SmoothingMode::Kernel);
            std::vector<WeightedSamples> scaled = per_action;
            for (auto& s : scaled)
                for (double& w : s.weights) w *= 7.25;
            CHECK(select_action(scaled, SmoothingMode::Kernel) == before);
        }
    }
    SUBCASE("single action is returned unconditionally") {
        std::vector<WeightedSamples> per_action = {unit_weights({1.0, 2.0, 3.0})};
        for (SmoothingMode mode :
             {SmoothingMode::None, SmoothingMode::Gaussian, SmoothingMode::Kernel})
            CHECK(select_action(per_action, mode) == 0);
    }
    SUBCASE("VPI is nonnegative for every mode") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> unif(-5.0, 5.0);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<WeightedSamples> per_action;
            for (int a = 0; a < 2; ++a) {
                WeightedSamples s;
                for (int i = 0; i < 5; ++i) {
                    s.values.push_back(unif(rng));
                    s.weights.push_back(1.0);
                }
                per_action.push_back(s);
            }
            std::vector<double> expected = {per_action[0].mean(), per_action[1].mean()};
            for (SmoothingMode mode :
                 {SmoothingMode::None, SmoothingMode::Gaussian, SmoothingMode::Kernel}) {
                std::vector<double> scores = action_scores(per_action, mode);
                for (int a = 0; a < 2; ++a) CHECK(scores[a] >= expected[a] - 1e-12);
            }
        }
    }
}

TEST_CASE("distribution snapshot export") {
    std::vector<WeightedSamples> per_action = {unit_weights({1.0, 2.0, 4.0}),
                                               unit_weights({0.0, 0.5, 1.5})};
    std::ostringstream oss;
    export_distribution_snapshot(oss, per_action, {0.0, 1.0, 2.0});
    std::string text = oss.str();
    CHECK(text.find("action,field,index,value") == 0);
    CHECK(text.find("gaussian_mean") != std::string::npos);
    CHECK(text.find("kernel_density") != std::string::npos);
}

TEST_CASE("tbored baseline") {
    CountModel counts(3, 2, {-10.0, 0.0, 1.0}, 0.9);

    SUBCASE("never-tried actions dominate through optimism") {
        // action 0 at state 0 tried enough times with mediocre results
        for (int i = 0; i < 5; ++i) counts.observe({0, 0, 0.0, 1});
        Mdp optimistic = counts.optimistic_mdp(1);
        ViResult res = value_iteration(optimistic);
        CHECK(baseline_tbored_explore(res.q, 0) == 1);  // untried action wins
        CHECK(res.q(0, 1) == doctest::Approx(counts.optimistic_value()).epsilon(1e-5));
    }
    SUBCASE("all counts above threshold mean pure greedy") {
        for (int i = 0; i < 3; ++i) {
            counts.observe({0, 0, 1.0, 0});   // action 0 pays 1 and stays
            counts.observe({0, 1, -10.0, 1}); // action 1 pays -10
            counts.observe({1, 0, 0.0, 1});
            counts.observe({1, 1, 0.0, 1});
            counts.observe({2, 0, 0.0, 2});
            counts.observe({2, 1, 0.0, 2});
        }
        Mdp optimistic = counts.optimistic_mdp(3);
        ViResult res = value_iteration(optimistic);
        CHECK(baseline_tbored_explore(res.q, 0) == 0);
    }
    SUBCASE("threshold zero disables optimism") {
        Mdp optimistic = counts.optimistic_mdp(0);
        // no fictitious transitions anywhere
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a) CHECK(optimistic.transition_row(s, a)[3] == 0.0);
    }
}
