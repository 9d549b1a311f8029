#include "flowtriage/env.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "flowtriage/errors.hpp"

namespace flowtriage {

std::string to_string(ModeId id) {
    switch (id) {
        case ModeId::A: return "A";
        case ModeId::B: return "B";
        case ModeId::C: return "C";
        default: return "D";
    }
}

ModeId mode_from_string(const std::string& s) {
    if (s == "A" || s == "a") return ModeId::A;
    if (s == "B" || s == "b") return ModeId::B;
    if (s == "C" || s == "c") return ModeId::C;
    if (s == "D" || s == "d") return ModeId::D;
    throw ValidationError("unknown reward mode: " + s);
}

RewardMode default_mode(ModeId id) {
    switch (id) {
        case ModeId::A: return {id, 1.0, 1.0, -1.0, -2.0, 0.0};
        case ModeId::B: return {id, 1.0, 2.0, -3.0, -1.0, 0.0};
        case ModeId::C: return {id, 1.0, 1.0, -1.5, -1.5, 0.0};
        default:        return {id, 1.0, 1.0, -1.5, -1.5, 0.1};
    }
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::TP: return "TP";
        case Outcome::FP: return "FP";
        case Outcome::FN: return "FN";
        default: return "TN";
    }
}

Outcome classify_outcome(int action, int label) {
    if (action == 1) return label == 1 ? Outcome::TP : Outcome::FP;
    return label == 1 ? Outcome::FN : Outcome::TN;
}

double base_reward(const RewardMode& mode, int action, int label) {
    switch (classify_outcome(action, label)) {
        case Outcome::TP: return mode.tp;
        case Outcome::FP: return mode.fp;
        case Outcome::FN: return mode.fn;
        default: return mode.tn;
    }
}

double reward(const RewardMode& mode, int action, int label, Rng& rng) {
    double r = base_reward(mode, action, label);
    if (mode.noise_sigma > 0.0) r += rng.normal(0.0, mode.noise_sigma);
    return r;
}

double decision_cost(double r) { return -r; }

double oracle_reward(const RewardMode& mode, int label) {
    return std::max(base_reward(mode, 0, label), base_reward(mode, 1, label));
}

double regret(const RewardMode& mode, int action, int label, double r_realized) {
    (void)action;
    return oracle_reward(mode, label) - r_realized;
}

std::vector<FoldSplit> time_series_folds(const std::vector<Window>& windows, int k) {
    if (k < 2) throw ValidationError("fold count must be >= 2");
    const int n = static_cast<int>(windows.size());
    if (n < k + 1) throw TooFewWindows(n, k + 1);
    std::vector<FoldSplit> folds;
    auto edge = [&](int i) {
        return static_cast<int>(static_cast<long long>(n) * i / (k + 1));
    };
    for (int i = 1; i <= k; ++i) {
        FoldSplit f;
        f.fold = i;
        for (int w = 0; w < edge(i); ++w) f.train.push_back(w);
        for (int w = edge(i); w < edge(i + 1); ++w) f.test.push_back(w);
        folds.push_back(std::move(f));
    }
    return folds;
}

ContainmentEnv::ContainmentEnv(std::vector<Eigen::VectorXd> states, std::vector<int> labels,
                               std::vector<int> window_indices, RewardMode mode,
                               std::uint64_t seed)
    : states_(std::move(states)),
      labels_(std::move(labels)),
      window_indices_(std::move(window_indices)),
      mode_(mode),
      rng_(seed) {
    if (states_.size() != labels_.size() || states_.size() != window_indices_.size()) {
        throw LengthMismatch("states, labels, and window indices must align");
    }
}

const Eigen::VectorXd& ContainmentEnv::current_state() const {
    if (done()) throw SteppedPastEnd(cursor_, horizon());
    return states_[static_cast<std::size_t>(cursor_)];
}

ContainmentEnv::StepResult ContainmentEnv::step(int action) {
    if (done()) throw SteppedPastEnd(cursor_, horizon());
    if (action != 0 && action != 1) throw ValidationError("action must be 0 or 1");
    const std::size_t i = static_cast<std::size_t>(cursor_);

    EpisodeStep s;
    s.t = cursor_;
    s.window_index = window_indices_[i];
    s.state = states_[i];
    s.action = action;
    s.label = labels_[i];
    s.base_reward = flowtriage::base_reward(mode_, action, s.label);
    s.reward = s.base_reward;
    if (mode_.noise_sigma > 0.0) s.reward += rng_.normal(0.0, mode_.noise_sigma);
    s.outcome = classify_outcome(action, s.label);
    s.cost = decision_cost(s.base_reward);
    s.regret = flowtriage::regret(mode_, action, s.label, s.base_reward);
    log_.push_back(std::move(s));

    ++cursor_;
    return {log_.back().reward, done()};
}

void ContainmentEnv::reset() {
    cursor_ = 0;
    log_.clear();
}

std::vector<EpisodeStep> ContainmentEnv::take_log() {
    std::vector<EpisodeStep> out = std::move(log_);
    log_.clear();
    return out;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / n)};
}

}  // namespace

std::vector<ModeSummary> summarize_cost_regret(const std::vector<FoldLog>& logs) {
    if (logs.empty()) throw ValidationError("need at least one fold log");
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_mode;
    for (const auto& fl : logs) {
        auto& [costs, regrets] = by_mode[fl.mode];
        for (const auto& s : fl.steps) {
            costs.push_back(s.cost);
            regrets.push_back(s.regret);
        }
    }
    std::vector<ModeSummary> rows;
    for (const auto& [mode, data] : by_mode) {
        ModeSummary row;
        row.mode = mode;
        row.steps = static_cast<long>(data.first.size());
        std::tie(row.mean_cost, row.std_cost) = mean_std(data.first);
        std::tie(row.mean_regret, row.std_regret) = mean_std(data.second);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string steps_to_csv(const std::vector<FoldLog>& logs) {
    std::ostringstream out;
    out << "t,action,label,reward,cost,regret,mode,fold\n";
    for (const auto& fl : logs) {
        for (const auto& s : fl.steps) {
            out << s.t << "," << s.action << "," << s.label << "," << s.reward << "," << s.cost
                << "," << s.regret << "," << fl.mode << "," << fl.fold << "\n";
        }
    }
    return out.str();
}

std::string summary_to_csv(const std::vector<ModeSummary>& rows) {
    std::ostringstream out;
    out << "mode,steps,mean_cost,std_cost,mean_regret,std_regret\n";
    for (const auto& r : rows) {
        out << r.mode << "," << r.steps << "," << r.mean_cost << "," << r.std_cost << ","
            << r.mean_regret << "," << r.std_regret << "\n";
    }
    return out.str();
}

}  // namespace flowtriage
