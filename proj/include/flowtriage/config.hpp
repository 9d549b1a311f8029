#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowtriage/aad.hpp"
#include "flowtriage/env.hpp"
#include "flowtriage/ingest.hpp"
#include "flowtriage/policy.hpp"
#include "flowtriage/synth.hpp"
#include "flowtriage/triage.hpp"

namespace flowtriage {

struct InputConfig {
    std::string path;  // empty -> synthesize from the scenario block
    ColumnMapping columns;
};

struct TriageConfig {
    std::string threshold_mode = "absolute";  // absolute | percentile
    double threshold = 5.0;
    double percentile = 95.0;
    std::string mode = "A";  // which trained agent drives containment
    int fold = 0;            // 0 -> highest-numbered fold
    bool reveal_real_ips = false;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    InputConfig input;
    std::int64_t window_ms = 300'000;  // 5-minute windows
    double train_fraction = 0.25;
    double epsilon = 1e-8;
    int vocab_k = 16;
    AETrainConfig autoencoder;
    std::vector<ModeId> modes = {ModeId::A, ModeId::B, ModeId::C, ModeId::D};
    std::map<std::string, RewardMode> reward_overrides;  // keyed by mode letter
    TrainConfig ppo;
    int folds = 5;
    TriageConfig triage;
    BackendConfig backend;
    std::string output_dir = "out";
    int jobs = 1;
    ScenarioConfig scenario = default_scenario();
};

// File values override defaults; unknown keys are rejected.
PipelineConfig config_from_json(const std::string& text);
std::string config_to_json(const PipelineConfig& cfg);

RewardMode reward_mode_for(const PipelineConfig& cfg, ModeId id);

}  // namespace flowtriage
