#include "vpirl/belief.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vpirl {

using nlohmann::json;

BeliefState::BeliefState(int num_states, int num_actions,
                         std::vector<double> reward_support, double discount,
                         PriorConfig prior)
    : num_states_(num_states), num_actions_(num_actions),
      reward_support_(std::move(reward_support)), discount_(discount),
      prior_(std::move(prior)) {
    if (num_states_ <= 0 || num_actions_ <= 0)
        throw std::invalid_argument("BeliefState: state and action counts must be positive");
    if (reward_support_.empty())
        throw std::invalid_argument("BeliefState: reward support must be nonempty");
    if (!(discount_ > 0.0 && discount_ < 1.0))
        throw std::invalid_argument("BeliefState: discount must lie strictly inside (0, 1)");

    const std::size_t rows = static_cast<std::size_t>(num_states_) * num_actions_;
    transition_.reserve(rows);
    reward_.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        if (prior_.transition_family == TransitionPriorFamily::Dirichlet)
            transition_.emplace_back(DirichletPosterior::symmetric(num_states_, prior_.transition_alpha));
        else
            transition_.emplace_back(SparseMultinomialPosterior(
                num_states_, prior_.transition_alpha, prior_.size_prior));
        reward_.emplace_back(DirichletPosterior::symmetric(
            static_cast<int>(reward_support_.size()), prior_.reward_alpha));
    }
    obs_counts_.assign(rows, 0);
}

int BeliefState::row(int s, int a) const {
    if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_)
        throw std::out_of_range("BeliefState: state or action index out of range");
    return s * num_actions_ + a;
}

const TransitionPosterior& BeliefState::transition_posterior(int s, int a) const {
    return transition_[row(s, a)];
}

const DirichletPosterior& BeliefState::reward_posterior(int s, int a) const {
    return reward_[row(s, a)];
}

int BeliefState::observation_count(int s, int a) const { return obs_counts_[row(s, a)]; }

int BeliefState::reward_index(double r) const {
    for (std::size_t i = 0; i < reward_support_.size(); ++i)
        if (std::abs(reward_support_[i] - r) <= 1e-12) return static_cast<int>(i);
    throw std::invalid_argument("BeliefState: reward value not in the declared support");
}

void BeliefState::update(const ExperienceTuple& e) {
    int idx = row(e.s, e.a);
    int r_idx = reward_index(e.r);
    if (e.t < 0 || e.t >= num_states_)
        throw std::out_of_range("BeliefState::update: successor state out of range");
    std::visit([&](auto& post) { post.update(e.t); }, transition_[idx]);
    reward_[idx].update(r_idx);
    obs_counts_[idx] += 1;
}

std::vector<double> BeliefState::transition_predictive(int s, int a) const {
    const TransitionPosterior& post = transition_[row(s, a)];
    if (const auto* d = std::get_if<DirichletPosterior>(&post)) return d->predictive();
    return std::get<SparseMultinomialPosterior>(post).predictive().dense(num_states_);
}

std::vector<double> BeliefState::reward_predictive(int s, int a) const {
    return reward_[row(s, a)].predictive();
}

double BeliefState::tuple_likelihood(const ExperienceTuple& e) const {
    const TransitionPosterior& post = transition_[row(e.s, e.a)];
    double p_t;
    if (const auto* d = std::get_if<DirichletPosterior>(&post)) {
        p_t = d->hyper()[e.t] / d->hyper_sum();
    } else {
        p_t = std::get<SparseMultinomialPosterior>(post).predictive().probability_of(
            e.t, num_states_);
    }
    double p_r = reward_predictive(e.s, e.a)[reward_index(e.r)];
    return p_t * p_r;
}

std::vector<double> BeliefState::sample_transition_row(int s, int a, RngEngine& rng) const {
    const TransitionPosterior& post = transition_[row(s, a)];
    if (const auto* d = std::get_if<DirichletPosterior>(&post)) return d->sample(rng);
    return std::get<SparseMultinomialPosterior>(post).sample(rng).dense(num_states_);
}

std::vector<double> BeliefState::sample_reward_row(int s, int a, RngEngine& rng) const {
    return reward_[row(s, a)].sample(rng);
}

Mdp BeliefState::sample_mdp(RngEngine& rng, CostCounters* counters) const {
    Mdp mdp(num_states_, num_actions_, reward_support_, discount_);
    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            mdp.transition_row(s, a) = sample_transition_row(s, a, rng);
            mdp.reward_row(s, a) = sample_reward_row(s, a, rng);
            if (counters) counters->rows_sampled += 2;
        }
    }
    return mdp;
}

namespace {

json posterior_to_json(const TransitionPosterior& post) {
    json j;
    if (const auto* d = std::get_if<DirichletPosterior>(&post)) {
        j["family"] = "dirichlet";
        j["hyper"] = d->hyper();
    } else {
        const auto& sp = std::get<SparseMultinomialPosterior>(post);
        j["family"] = "sparse";
        j["alpha"] = sp.alpha();
        j["universe_size"] = sp.universe_size();
        j["size_prior"] = sp.size_prior();
        json counts = json::object();
        for (const auto& [outcome, count] : sp.observed_counts())
            counts[std::to_string(outcome)] = count;
        j["counts"] = counts;
    }
    return j;
}

TransitionPosterior posterior_from_json(const json& j) {
    if (j.at("family") == "dirichlet")
        return DirichletPosterior(j.at("hyper").get<std::vector<double>>());
    SparseMultinomialPosterior sp(j.at("universe_size").get<int>(),
                                  j.at("alpha").get<double>(),
                                  j.at("size_prior").get<std::vector<double>>());
    for (const auto& [key, value] : j.at("counts").items()) {
        int outcome = std::stoi(key);
        int count = value.get<int>();
        for (int i = 0; i < count; ++i) sp.update(outcome);
    }
    return sp;
}

} // namespace

void BeliefState::save(std::ostream& os) const {
    json j;
    j["num_states"] = num_states_;
    j["num_actions"] = num_actions_;
    j["reward_support"] = reward_support_;
    j["discount"] = discount_;
    j["prior"] = {
        {"transition_family",
         prior_.transition_family == TransitionPriorFamily::Dirichlet ? "dirichlet" : "sparse"},
        {"transition_alpha", prior_.transition_alpha},
        {"reward_alpha", prior_.reward_alpha},
        {"size_prior", prior_.size_prior},
    };
    json rows = json::array();
    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            int idx = s * num_actions_ + a;
            rows.push_back({{"s", s},
                            {"a", a},
                            {"transition", posterior_to_json(transition_[idx])},
                            {"reward_hyper", reward_[idx].hyper()},
                            {"obs_count", obs_counts_[idx]}});
        }
    }
    j["rows"] = rows;
    os << j.dump(2) << "\n";
}

BeliefState BeliefState::load(std::istream& is) {
    json j = json::parse(is);
    PriorConfig prior;
    prior.transition_family = j.at("prior").at("transition_family") == "dirichlet"
                                  ? TransitionPriorFamily::Dirichlet
                                  : TransitionPriorFamily::SparseMultinomial;
    prior.transition_alpha = j.at("prior").at("transition_alpha").get<double>();
    prior.reward_alpha = j.at("prior").at("reward_alpha").get<double>();
    prior.size_prior = j.at("prior").at("size_prior").get<std::vector<double>>();

    BeliefState belief(j.at("num_states").get<int>(), j.at("num_actions").get<int>(),
                       j.at("reward_support").get<std::vector<double>>(),
                       j.at("discount").get<double>(), prior);
    for (const auto& row : j.at("rows")) {
        int idx = row.at("s").get<int>() * belief.num_actions_ + row.at("a").get<int>();
        belief.transition_[idx] = posterior_from_json(row.at("transition"));
        belief.reward_[idx] =
            DirichletPosterior(row.at("reward_hyper").get<std::vector<double>>());
        belief.obs_counts_[idx] = row.at("obs_count").get<int>();
    }
    return belief;
}

void BeliefState::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("BeliefState::save_file: cannot open " + path);
    save(os);
}

BeliefState BeliefState::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("BeliefState::load_file: cannot open " + path);
    return load(is);
}

} // namespace vpirl
