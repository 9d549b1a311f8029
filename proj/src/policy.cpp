#include "flowtriage/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flowtriage/errors.hpp"

namespace flowtriage {

using nlohmann::json;

Eigen::VectorXd ObsScaler::apply(const Eigen::VectorXd& state) const {
    long expected = 6;
    for (long s : sections) expected += s;
    if (state.size() != expected) {
        throw DimMismatch("state length " + std::to_string(state.size()) + ", scaler expects " +
                          std::to_string(expected));
    }
    Eigen::VectorXd out(state.size());
    out.head<6>() = standardize_row(standardizer, state.head<6>());
    long at = 6;
    for (long s : sections) {
        const double total = state.segment(at, s).sum();
        out.segment(at, s) = total > 0.0 ? (state.segment(at, s) / total).eval()
                                         : state.segment(at, s);
        at += s;
    }
    return out.cwiseMax(-clip).cwiseMin(clip);
}

PolicyNet make_policy(int input_dim, int hidden, Rng& rng) {
    return {make_mlp({input_dim, hidden, hidden, 2}, Activation::Relu, Activation::Identity, rng)};
}

ValueNet make_value(int input_dim, int hidden, Rng& rng) {
    return {make_mlp({input_dim, hidden, hidden, 1}, Activation::Relu, Activation::Identity, rng)};
}

Eigen::Vector2d forward(const PolicyNet& p, const Eigen::VectorXd& s) {
    if (s.size() != p.net.input_dim()) {
        throw DimMismatch("state dim " + std::to_string(s.size()) + " vs policy input " +
                          std::to_string(p.net.input_dim()));
    }
    return p.net.forward(s);
}

Eigen::Vector2d action_probs(const Eigen::Vector2d& z) {
    const double m = z.maxCoeff();
    const Eigen::Vector2d e = (z.array() - m).exp();
    return e / e.sum();
}

int sample_action(const Eigen::Vector2d& probs, Rng& rng) {
    return rng.uniform01() < probs[1] ? 1 : 0;
}

int greedy_action(const Eigen::Vector2d& probs) {
    return probs[1] > probs[0] ? 1 : 0;
}

ReturnsAdvantages compute_returns_advantages(const std::vector<double>& rewards,
                                             const std::vector<double>& values, double gamma,
                                             double gae_lambda, bool normalize) {
    if (rewards.empty()) throw ValidationError("empty trajectory");
    if (rewards.size() != values.size()) throw LengthMismatch("rewards vs values");
    const long n = static_cast<long>(rewards.size());

    ReturnsAdvantages out;
    out.returns.assign(rewards.size(), 0.0);
    out.advantages.assign(rewards.size(), 0.0);

    double running_return = 0.0;  // V(s_T) = 0: the episode ends with the fold
    double running_gae = 0.0;
    for (long t = n - 1; t >= 0; --t) {
        const std::size_t i = static_cast<std::size_t>(t);
        running_return = rewards[i] + gamma * running_return;
        out.returns[i] = running_return;
        const double next_value = (t + 1 < n) ? values[static_cast<std::size_t>(t + 1)] : 0.0;
        const double delta = rewards[i] + gamma * next_value - values[i];
        running_gae = delta + gamma * gae_lambda * running_gae;
        out.advantages[i] = running_gae;
    }

    if (normalize) {
        const double mean =
            std::accumulate(out.advantages.begin(), out.advantages.end(), 0.0) / n;
        double var = 0.0;
        for (double a : out.advantages) var += (a - mean) * (a - mean);
        const double std = std::sqrt(var / n);
        for (double& a : out.advantages) a = (a - mean) / (std + 1e-8);
    }
    return out;
}

namespace {

double entropy_of(const Eigen::Vector2d& p) {
    double h = 0.0;
    for (int i = 0; i < 2; ++i) {
        if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    }
    return h;
}

}  // namespace

UpdateStats ppo_update(PolicyNet& policy, ValueNet& value, const Batch& batch,
                       const TrainConfig& cfg, AdamState& policy_opt, AdamState& value_opt,
                       Rng& shuffle_rng) {
    if (batch.size() == 0) throw ValidationError("empty update batch");
    if (batch.actions.size() != batch.size() || batch.old_logp.size() != batch.size() ||
        batch.advantages.size() != batch.size() || batch.returns.size() != batch.size()) {
        throw LengthMismatch("batch fields must align");
    }

    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    UpdateStats stats;
    long stat_samples = 0;

    for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.minibatch)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch));
            const double inv_m = 1.0 / static_cast<double>(stop - start);

            auto pol_grads = policy.net.zero_like();
            auto val_grads = value.net.zero_like();

            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t i = order[k];
                const double adv = batch.advantages[i];
                const int a = batch.actions[i];

                const ForwardTrace pt = policy.net.forward_trace(batch.states[i]);
                const Eigen::Vector2d z = pt.output();
                const Eigen::Vector2d p = action_probs(z);
                const double logp = std::log(std::max(p[a], 1e-12));
                const double ratio = std::exp(logp - batch.old_logp[i]);
                const double clipped =
                    std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
                const double surrogate = std::min(ratio * adv, clipped * adv);
                const double h = entropy_of(p);

                // gradient blocked where the clipped branch is active
                const bool blocked = (adv > 0.0 && ratio > 1.0 + cfg.clip_epsilon) ||
                                     (adv < 0.0 && ratio < 1.0 - cfg.clip_epsilon);

                Eigen::Vector2d grad_z = Eigen::Vector2d::Zero();
                if (!blocked) {
                    // d(-ratio*adv)/dz_j = -ratio*adv*(1{j=a} - p_j)
                    for (int j = 0; j < 2; ++j) {
                        grad_z[j] = -ratio * adv * ((j == a ? 1.0 : 0.0) - p[j]);
                    }
                }
                // entropy bonus: d(-c*H)/dz_j = c * p_j (log p_j + H)
                for (int j = 0; j < 2; ++j) {
                    if (p[j] > 0.0) grad_z[j] += cfg.entropy_coef * p[j] * (std::log(p[j]) + h);
                }
                policy.net.backprop(pt, grad_z * inv_m, pol_grads);

                const ForwardTrace vt = value.net.forward_trace(batch.states[i]);
                const double v = vt.output()[0];
                Eigen::VectorXd grad_v(1);
                grad_v[0] = 2.0 * (v - batch.returns[i]) * inv_m;
                value.net.backprop(vt, grad_v, val_grads);

                stats.policy_loss += -surrogate;
                stats.value_loss += (v - batch.returns[i]) * (v - batch.returns[i]);
                stats.entropy += h;
                ++stat_samples;
            }

            adam_step(policy.net, pol_grads, policy_opt, cfg.lr);
            adam_step(value.net, val_grads, value_opt, cfg.lr);
        }
    }

    if (stat_samples > 0) {
        stats.policy_loss /= static_cast<double>(stat_samples);
        stats.value_loss /= static_cast<double>(stat_samples);
        stats.entropy /= static_cast<double>(stat_samples);
    }
    return stats;
}

double surrogate_loss(const PolicyNet& policy, const Batch& batch, const TrainConfig& cfg) {
    if (batch.size() == 0) throw ValidationError("empty batch");
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Eigen::Vector2d p = action_probs(policy.net.forward(batch.states[i]));
        const double logp = std::log(std::max(p[batch.actions[i]], 1e-12));
        const double ratio = std::exp(logp - batch.old_logp[i]);
        const double clipped = std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
        const double adv = batch.advantages[i];
        total += -std::min(ratio * adv, clipped * adv) - cfg.entropy_coef * entropy_of(p);
    }
    return total / static_cast<double>(batch.size());
}

Eigen::VectorXd surrogate_grad(const PolicyNet& policy, const Batch& batch,
                               const TrainConfig& cfg) {
    if (batch.size() == 0) throw ValidationError("empty batch");
    auto grads = policy.net.zero_like();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const int a = batch.actions[i];
        const double adv = batch.advantages[i];
        const ForwardTrace t = policy.net.forward_trace(batch.states[i]);
        const Eigen::Vector2d p = action_probs(t.output());
        const double logp = std::log(std::max(p[a], 1e-12));
        const double ratio = std::exp(logp - batch.old_logp[i]);
        const double h = entropy_of(p);
        const bool blocked = (adv > 0.0 && ratio > 1.0 + cfg.clip_epsilon) ||
                             (adv < 0.0 && ratio < 1.0 - cfg.clip_epsilon);
        Eigen::Vector2d grad_z = Eigen::Vector2d::Zero();
        if (!blocked) {
            for (int j = 0; j < 2; ++j) {
                grad_z[j] = -ratio * adv * ((j == a ? 1.0 : 0.0) - p[j]);
            }
        }
        for (int j = 0; j < 2; ++j) {
            if (p[j] > 0.0) grad_z[j] += cfg.entropy_coef * p[j] * (std::log(p[j]) + h);
        }
        policy.net.backprop(t, grad_z * inv_n, grads);
    }
    return flatten_grads(grads);
}

TrainedAgent train_agent(ContainmentEnv& env, const TrainConfig& cfg, const ObsScaler& scaler,
                         int fold) {
    if (env.horizon() == 0) throw ValidationError("environment has no windows");
    const int d = static_cast<int>(env.current_state().size());

    TrainedAgent agent;
    agent.scaler = scaler;
    agent.cfg = cfg;
    agent.mode = to_string(env.mode().id);
    agent.fold = fold;

    Rng policy_rng(derive_seed(cfg.seed, "policy-init"));
    Rng value_rng(derive_seed(cfg.seed, "value-init"));
    agent.policy = make_policy(d, cfg.hidden, policy_rng);
    agent.value = make_value(d, cfg.hidden, value_rng);

    Rng rollout_rng(derive_seed(cfg.seed, "rollout"));
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
    AdamState policy_opt = make_adam_state(agent.policy.net);
    AdamState value_opt = make_adam_state(agent.value.net);

    for (int pass = 1; pass <= cfg.passes; ++pass) {
        env.reset();
        Batch traj;
        std::vector<double> rewards;
        while (!env.done()) {
            const Eigen::VectorXd& s = env.current_state();
            const Eigen::Vector2d p = action_probs(forward(agent.policy, s));
            const int a = sample_action(p, rollout_rng);
            traj.states.push_back(s);
            traj.actions.push_back(a);
            traj.old_logp.push_back(std::log(std::max(p[a], 1e-12)));
            rewards.push_back(env.step(a).reward);
        }

        std::vector<double> values;
        values.reserve(traj.size());
        for (const auto& s : traj.states) values.push_back(agent.value.net.forward(s)[0]);

        const ReturnsAdvantages ra =
            compute_returns_advantages(rewards, values, cfg.gamma, cfg.gae_lambda, true);
        traj.advantages = ra.advantages;
        traj.returns = ra.returns;

        const UpdateStats stats =
            ppo_update(agent.policy, agent.value, traj, cfg, policy_opt, value_opt, shuffle_rng);

        CurvePoint cp;
        cp.pass = pass;
        cp.mean_reward = std::accumulate(rewards.begin(), rewards.end(), 0.0) /
                         static_cast<double>(rewards.size());
        cp.policy_loss = stats.policy_loss;
        cp.value_loss = stats.value_loss;
        cp.entropy = stats.entropy;
        agent.curve.push_back(cp);
    }
    return agent;
}

EvalMetrics metrics_from_counts(long tp, long fp, long fn, long tn) {
    EvalMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    const long total = tp + fp + fn + tn;
    const long contained = tp + fp;
    m.reduction_pct =
        total > 0 ? 100.0 * (1.0 - static_cast<double>(contained) / static_cast<double>(total))
                  : 0.0;
    return m;
}

EvalMetrics evaluate(const TrainedAgent& agent, const std::vector<Eigen::VectorXd>& states,
                     const std::vector<int>& labels, const RewardMode& mode) {
    if (states.size() != labels.size()) throw LengthMismatch("states vs labels");
    long tp = 0, fp = 0, fn = 0, tn = 0;
    double cost_sum = 0.0, regret_sum = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const int a = greedy_action(action_probs(forward(agent.policy, states[i])));
        const int y = labels[i];
        switch (classify_outcome(a, y)) {
            case Outcome::TP: ++tp; break;
            case Outcome::FP: ++fp; break;
            case Outcome::FN: ++fn; break;
            case Outcome::TN: ++tn; break;
        }
        const double r = base_reward(mode, a, y);
        cost_sum += decision_cost(r);
        regret_sum += regret(mode, a, y, r);
    }
    EvalMetrics m = metrics_from_counts(tp, fp, fn, tn);
    const double n = static_cast<double>(states.size());
    if (n > 0) {
        m.mean_cost = cost_sum / n;
        m.mean_regret = regret_sum / n;
    }
    return m;
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
    std::ostringstream out;
    out << "pass,mean_reward,policy_loss,value_loss,entropy\n";
    for (const auto& c : curve) {
        out << c.pass << "," << c.mean_reward << "," << c.policy_loss << "," << c.value_loss
            << "," << c.entropy << "\n";
    }
    return out.str();
}

namespace {

json mlp_to_json(const Mlp& net) {
    json layers = json::array();
    for (const auto& l : net.layers) {
        json W = json::array();
        for (long r = 0; r < l.W.rows(); ++r) {
            json row = json::array();
            for (long c = 0; c < l.W.cols(); ++c) row.push_back(l.W(r, c));
            W.push_back(std::move(row));
        }
        json b = json::array();
        for (long i = 0; i < l.b.size(); ++i) b.push_back(l.b[i]);
        layers.push_back(
            {{"weights", std::move(W)}, {"bias", std::move(b)}, {"activation", to_string(l.act)}});
    }
    return layers;
}

Mlp mlp_from_json(const json& layers) {
    Mlp net;
    for (const auto& lj : layers) {
        Layer l;
        const auto& W = lj.at("weights");
        const long rows = static_cast<long>(W.size());
        const long cols = rows > 0 ? static_cast<long>(W.at(0).size()) : 0;
        l.W = Eigen::MatrixXd(rows, cols);
        for (long r = 0; r < rows; ++r)
            for (long c = 0; c < cols; ++c) l.W(r, c) = W.at(r).at(c).get<double>();
        const auto& b = lj.at("bias");
        l.b = Eigen::VectorXd(static_cast<long>(b.size()));
        for (long i = 0; i < l.b.size(); ++i) l.b[i] = b.at(i).get<double>();
        l.act = activation_from_string(lj.at("activation").get<std::string>());
        net.layers.push_back(std::move(l));
    }
    return net;
}

}  // namespace

std::string agent_to_json(const TrainedAgent& agent) {
    json doc;
    doc["format"] = "flowtriage-agent";
    doc["mode"] = agent.mode;
    doc["fold"] = agent.fold;
    doc["config"] = {{"gamma", agent.cfg.gamma},
                     {"gae_lambda", agent.cfg.gae_lambda},
                     {"clip_epsilon", agent.cfg.clip_epsilon},
                     {"lr", agent.cfg.lr},
                     {"epochs_per_update", agent.cfg.epochs_per_update},
                     {"minibatch", agent.cfg.minibatch},
                     {"passes", agent.cfg.passes},
                     {"entropy_coef", agent.cfg.entropy_coef},
                     {"hidden", agent.cfg.hidden},
                     {"seed", agent.cfg.seed}};
    json mu = json::array(), sigma = json::array();
    for (int i = 0; i < 6; ++i) {
        mu.push_back(agent.scaler.standardizer.mu[i]);
        sigma.push_back(agent.scaler.standardizer.sigma[i]);
    }
    doc["scaler"] = {{"mu", std::move(mu)},
                     {"sigma", std::move(sigma)},
                     {"epsilon", agent.scaler.standardizer.epsilon},
                     {"sections", agent.scaler.sections},
                     {"clip", agent.scaler.clip}};
    doc["policy"] = mlp_to_json(agent.policy.net);
    doc["value"] = mlp_to_json(agent.value.net);
    json curve = json::array();
    for (const auto& c : agent.curve) {
        curve.push_back({{"pass", c.pass},
                         {"mean_reward", c.mean_reward},
                         {"policy_loss", c.policy_loss},
                         {"value_loss", c.value_loss},
                         {"entropy", c.entropy}});
    }
    doc["curve"] = std::move(curve);
    return doc.dump(2);
}

TrainedAgent agent_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("agent file is not valid JSON: ") + e.what());
    }
    if (doc.value("format", "") != "flowtriage-agent") {
        throw ValidationError("not an agent document");
    }
    TrainedAgent agent;
    agent.mode = doc.at("mode").get<std::string>();
    agent.fold = doc.at("fold").get<int>();
    const auto& c = doc.at("config");
    agent.cfg.gamma = c.at("gamma").get<double>();
    agent.cfg.gae_lambda = c.at("gae_lambda").get<double>();
    agent.cfg.clip_epsilon = c.at("clip_epsilon").get<double>();
    agent.cfg.lr = c.at("lr").get<double>();
    agent.cfg.epochs_per_update = c.at("epochs_per_update").get<int>();
    agent.cfg.minibatch = c.at("minibatch").get<int>();
    agent.cfg.passes = c.at("passes").get<int>();
    agent.cfg.entropy_coef = c.at("entropy_coef").get<double>();
    agent.cfg.hidden = c.at("hidden").get<int>();
    agent.cfg.seed = c.at("seed").get<std::uint64_t>();
    const auto& sc = doc.at("scaler");
    for (int i = 0; i < 6; ++i) {
        agent.scaler.standardizer.mu[i] = sc.at("mu").at(i).get<double>();
        agent.scaler.standardizer.sigma[i] = sc.at("sigma").at(i).get<double>();
    }
    agent.scaler.standardizer.epsilon = sc.at("epsilon").get<double>();
    agent.scaler.sections = sc.at("sections").get<std::vector<long>>();
    agent.scaler.clip = sc.at("clip").get<double>();
    agent.policy.net = mlp_from_json(doc.at("policy"));
    agent.value.net = mlp_from_json(doc.at("value"));
    for (const auto& cj : doc.at("curve")) {
        CurvePoint cp;
        cp.pass = cj.at("pass").get<int>();
        cp.mean_reward = cj.at("mean_reward").get<double>();
        cp.policy_loss = cj.at("policy_loss").get<double>();
        cp.value_loss = cj.at("value_loss").get<double>();
        cp.entropy = cj.at("entropy").get<double>();
        agent.curve.push_back(cp);
    }
    return agent;
}

}  // namespace flowtriage
