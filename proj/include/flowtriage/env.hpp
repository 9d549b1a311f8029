#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "flowtriage/rng.hpp"
#include "flowtriage/window.hpp"

namespace flowtriage {

enum class ModeId { A, B, C, D };

std::string to_string(ModeId id);
ModeId mode_from_string(const std::string& s);

// Containment reward matrix expressed as rewards R(action, truth).
struct RewardMode {
    ModeId id = ModeId::A;
    double tp = 1.0;    // R(1,1)
    double tn = 1.0;    // R(0,0)
    double fp = -1.0;   // R(1,0)
    double fn = -2.0;   // R(0,1)
    double noise_sigma = 0.0;
};

// A: recall-oriented, B: precision-oriented, C: balanced, D: C + noise.
RewardMode default_mode(ModeId id);

enum class Outcome { TP, FP, FN, TN };

std::string to_string(Outcome o);
Outcome classify_outcome(int action, int label);

double base_reward(const RewardMode& mode, int action, int label);
double reward(const RewardMode& mode, int action, int label, Rng& rng);
double decision_cost(double r);
double oracle_reward(const RewardMode& mode, int label);
// r_realized must be the noise-free base reward for (action, label)
double regret(const RewardMode& mode, int action, int label, double r_realized);

struct EpisodeStep {
    int t = 0;
    int window_index = 0;
    Eigen::VectorXd state;
    int action = 0;
    int label = 0;
    double reward = 0.0;       // includes noise in mode D
    double base_reward = 0.0;  // noise-free
    Outcome outcome = Outcome::TN;
    double cost = 0.0;         // -base_reward
    double regret = 0.0;       // oracle - base_reward
};

struct FoldSplit {
    int fold = 0;                 // 1-based
    std::vector<int> train;       // window positions
    std::vector<int> test;
};

std::vector<FoldSplit> time_series_folds(const std::vector<Window>& windows, int k);

// One window sequence traversed once per episode; cursor mutates, so each
// instance is single-consumer.
class ContainmentEnv {
  public:
    ContainmentEnv(std::vector<Eigen::VectorXd> states, std::vector<int> labels,
                   std::vector<int> window_indices, RewardMode mode, std::uint64_t seed);

    struct StepResult {
        double reward = 0.0;
        bool done = false;
    };

    const Eigen::VectorXd& current_state() const;
    StepResult step(int action);
    bool done() const { return cursor_ >= horizon(); }
    int horizon() const { return static_cast<int>(states_.size()); }
    void reset();  // rewinds the cursor; the noise stream continues

    const RewardMode& mode() const { return mode_; }
    const std::vector<EpisodeStep>& log() const { return log_; }
    std::vector<EpisodeStep> take_log();

  private:
    std::vector<Eigen::VectorXd> states_;
    std::vector<int> labels_;
    std::vector<int> window_indices_;
    RewardMode mode_;
    Rng rng_;
    int cursor_ = 0;
    std::vector<EpisodeStep> log_;
};

struct FoldLog {
    int fold = 0;
    std::string mode;
    std::vector<EpisodeStep> steps;
};

struct ModeSummary {
    std::string mode;
    long steps = 0;
    double mean_cost = 0.0;
    double std_cost = 0.0;
    double mean_regret = 0.0;
    double std_regret = 0.0;
};

// Groups the logs by mode; one summary row per mode, mode A first.
std::vector<ModeSummary> summarize_cost_regret(const std::vector<FoldLog>& logs);

std::string steps_to_csv(const std::vector<FoldLog>& logs);
std::string summary_to_csv(const std::vector<ModeSummary>& rows);

}  // namespace flowtriage
