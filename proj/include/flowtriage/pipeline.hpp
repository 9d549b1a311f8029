#pragma once

#include <string>
#include <vector>

#include "flowtriage/config.hpp"

namespace flowtriage {

struct WindowArtifacts {
    std::vector<Window> windows;  // full dataset
    CategoricalVocab vocab;       // fitted on training-period windows
    Standardizer standardizer;    // fitted on benign training-period aggregates
    Eigen::MatrixXd benign_train_std;            // autoencoder training matrix
    ObsScaler scaler;
    std::vector<Eigen::VectorXd> scaled_states;  // policy observations, one per window
    std::vector<int> labels;
};

FlowDataset load_dataset(const PipelineConfig& cfg);

WindowArtifacts build_window_artifacts(const PipelineConfig& cfg, const FlowDataset& d);

ScoringModel train_scoring_model(const PipelineConfig& cfg, const WindowArtifacts& art);

struct TrainEntry {
    std::string mode;
    int fold = 0;
    EvalMetrics metrics;
    TrainedAgent agent;
};

struct TrainOutcome {
    std::vector<TrainEntry> entries;     // mode-major, fold-minor order
    std::vector<FoldLog> eval_logs;      // greedy test-set step logs
    std::vector<ModeSummary> cost_regret;
};

TrainOutcome run_training(const PipelineConfig& cfg, const WindowArtifacts& art);

std::string metrics_to_csv(const std::vector<TrainEntry>& entries);
std::string scored_windows_to_csv(const std::vector<ScoredWindow>& scored,
                                  const std::vector<Window>& windows);

int cmd_simulate(const PipelineConfig& cfg);
int cmd_ingest(const PipelineConfig& cfg);
int cmd_score(const PipelineConfig& cfg);
int cmd_train(const PipelineConfig& cfg);
int cmd_triage(const PipelineConfig& cfg);
int cmd_oracle(std::string* out_text = nullptr);
int cmd_report(const PipelineConfig& cfg);

}  // namespace flowtriage
