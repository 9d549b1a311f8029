#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "flowtriage/aad.hpp"
#include "flowtriage/env.hpp"
#include "flowtriage/mlp.hpp"

namespace flowtriage {

// Maps a raw concatenated WindowState to the network input: the 6 numeric
// features are standardized, categorical counts become per-attribute
// fractions, and everything is clipped to [-clip, clip].
struct ObsScaler {
    Standardizer standardizer;
    std::vector<long> sections;  // categorical slot-group lengths (src_ip, dest_ip, protocol)
    double clip = 10.0;

    Eigen::VectorXd apply(const Eigen::VectorXd& state) const;
};

struct PolicyNet {
    Mlp net;  // d -> hidden -> hidden -> 2 logits (allow=0, contain=1)
};

struct ValueNet {
    Mlp net;  // d -> hidden -> hidden -> 1
};

PolicyNet make_policy(int input_dim, int hidden, Rng& rng);
ValueNet make_value(int input_dim, int hidden, Rng& rng);

Eigen::Vector2d forward(const PolicyNet& p, const Eigen::VectorXd& s);
Eigen::Vector2d action_probs(const Eigen::Vector2d& z);
int sample_action(const Eigen::Vector2d& probs, Rng& rng);
int greedy_action(const Eigen::Vector2d& probs);

struct TrainConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_epsilon = 0.2;
    double lr = 3e-4;
    int epochs_per_update = 4;
    int minibatch = 64;
    int passes = 50;
    double entropy_coef = 0.01;
    int hidden = 64;
    std::uint64_t seed = 0;
};

struct ReturnsAdvantages {
    std::vector<double> returns;     // discounted suffix sums of rewards
    std::vector<double> advantages;  // GAE, normalized to mean 0 / std 1
};

ReturnsAdvantages compute_returns_advantages(const std::vector<double>& rewards,
                                             const std::vector<double>& values, double gamma,
                                             double gae_lambda, bool normalize = true);

struct Batch {
    std::vector<Eigen::VectorXd> states;
    std::vector<int> actions;
    std::vector<double> old_logp;
    std::vector<double> advantages;
    std::vector<double> returns;

    std::size_t size() const { return states.size(); }
};

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
};

UpdateStats ppo_update(PolicyNet& policy, ValueNet& value, const Batch& batch,
                       const TrainConfig& cfg, AdamState& policy_opt, AdamState& value_opt,
                       Rng& shuffle_rng);

// The loss ppo_update descends for one full batch: mean of
// -min(ratio*A, clip(ratio)*A) - entropy_coef*H. The gradient pairs with
// Mlp::flatten for finite-difference checks.
double surrogate_loss(const PolicyNet& policy, const Batch& batch, const TrainConfig& cfg);
Eigen::VectorXd surrogate_grad(const PolicyNet& policy, const Batch& batch,
                               const TrainConfig& cfg);

struct CurvePoint {
    int pass = 0;
    double mean_reward = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
};

struct TrainedAgent {
    PolicyNet policy;
    ValueNet value;
    ObsScaler scaler;
    TrainConfig cfg;
    std::string mode;
    int fold = 0;
    std::vector<CurvePoint> curve;
};

// One pass = one episode over the environment's window sequence; the policy
// and value nets are (re)initialized from cfg.seed, so passes=0 returns the
// seeded initialization unchanged.
TrainedAgent train_agent(ContainmentEnv& env, const TrainConfig& cfg, const ObsScaler& scaler,
                         int fold);

struct EvalMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long tp = 0, fp = 0, fn = 0, tn = 0;
    double mean_cost = 0.0;
    double mean_regret = 0.0;
    double reduction_pct = 0.0;  // 100 * (1 - contained/total)
};

EvalMetrics evaluate(const TrainedAgent& agent, const std::vector<Eigen::VectorXd>& states,
                     const std::vector<int>& labels, const RewardMode& mode);

EvalMetrics metrics_from_counts(long tp, long fp, long fn, long tn);

std::string curve_to_csv(const std::vector<CurvePoint>& curve);

std::string agent_to_json(const TrainedAgent& agent);
TrainedAgent agent_from_json(const std::string& text);

}  // namespace flowtriage
