#include <doctest.h>

#include <string>

#include "flowtriage/config.hpp"
#include "flowtriage/errors.hpp"

using namespace flowtriage;

TEST_CASE("an empty document yields the defaults") {
    const PipelineConfig cfg = config_from_json("{}");
    CHECK(cfg.seed == 0);
    CHECK(cfg.window_ms == 300'000);
    CHECK(cfg.train_fraction == 0.25);
    CHECK(cfg.vocab_k == 16);
    CHECK(cfg.folds == 5);
    CHECK(cfg.jobs == 1);
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.input.path.empty());
    CHECK(cfg.autoencoder.dims == std::vector<int>({6, 8, 2, 8, 6}));
    CHECK(cfg.autoencoder.epochs == 200);
    CHECK(cfg.autoencoder.lr == 1e-2);
    CHECK(cfg.autoencoder.batch_size == 32);
    CHECK(cfg.modes == std::vector<ModeId>({ModeId::A, ModeId::B, ModeId::C, ModeId::D}));
    CHECK(cfg.ppo.gamma == 0.99);
    CHECK(cfg.ppo.gae_lambda == 0.95);
    CHECK(cfg.ppo.clip_epsilon == 0.2);
    CHECK(cfg.ppo.lr == 3e-4);
    CHECK(cfg.ppo.epochs_per_update == 4);
    CHECK(cfg.ppo.minibatch == 64);
    CHECK(cfg.ppo.passes == 50);
    CHECK(cfg.ppo.entropy_coef == 0.01);
    CHECK(cfg.ppo.hidden == 64);
    CHECK(cfg.triage.threshold_mode == "absolute");
    CHECK(cfg.triage.threshold == 5.0);
    CHECK(cfg.triage.percentile == 95.0);
    CHECK(cfg.triage.mode == "A");
    CHECK(cfg.triage.fold == 0);
    CHECK_FALSE(cfg.triage.reveal_real_ips);
    CHECK(cfg.backend.url.empty());
    CHECK(cfg.backend.model == "gpt-4o-mini");
    CHECK(cfg.scenario.duration_min == 120);
    CHECK(cfg.reward_overrides.empty());
}

TEST_CASE("unknown keys are rejected wherever they appear") {
    CHECK_THROWS_AS(config_from_json(R"({"sseed": 1})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"ppo": {"learning_rate": 0.1}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"triage": {"thresh": 2}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"scenario": {"minutes": 10}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"input": {"file": "x.csv"}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"reward_matrices": {"E": {"tp": 1}}})"),
                    ValidationError);
}

TEST_CASE("values parse into the right fields") {
    const std::string text = R"({
        "seed": 42,
        "window_ms": 60000,
        "train_fraction": 0.3,
        "vocab_k": 8,
        "folds": 3,
        "jobs": 4,
        "output_dir": "artifacts",
        "input": {"path": "flows.csv", "columns": {"timestamp": "ts", "label": ""}},
        "autoencoder": {"epochs": 50, "lr": 0.005},
        "modes": ["B", "D"],
        "ppo": {"passes": 10, "hidden": 32},
        "triage": {"threshold_mode": "percentile", "percentile": 90.0, "mode": "B", "fold": 2},
        "backend": {"url": "http://localhost:8080", "model": "m", "timeout_s": 5},
        "scenario": {"duration_min": 30, "flood": {"dest_port": 8081}}
    })";
    const PipelineConfig cfg = config_from_json(text);
    CHECK(cfg.seed == 42);
    CHECK(cfg.window_ms == 60000);
    CHECK(cfg.train_fraction == 0.3);
    CHECK(cfg.vocab_k == 8);
    CHECK(cfg.folds == 3);
    CHECK(cfg.jobs == 4);
    CHECK(cfg.output_dir == "artifacts");
    CHECK(cfg.input.path == "flows.csv");
    CHECK(cfg.input.columns.timestamp == "ts");
    CHECK(cfg.input.columns.label.empty());
    CHECK(cfg.input.columns.src_ip == "src_ip");  // untouched defaults stay
    CHECK(cfg.autoencoder.epochs == 50);
    CHECK(cfg.autoencoder.lr == 0.005);
    CHECK(cfg.modes == std::vector<ModeId>({ModeId::B, ModeId::D}));
    CHECK(cfg.ppo.passes == 10);
    CHECK(cfg.ppo.hidden == 32);
    CHECK(cfg.ppo.gamma == 0.99);
    CHECK(cfg.triage.threshold_mode == "percentile");
    CHECK(cfg.triage.percentile == 90.0);
    CHECK(cfg.triage.mode == "B");
    CHECK(cfg.triage.fold == 2);
    CHECK(cfg.backend.url == "http://localhost:8080");
    CHECK(cfg.backend.timeout_s == 5);
    CHECK(cfg.scenario.duration_min == 30);
    CHECK(cfg.scenario.flood_dest_port == 8081);
}

TEST_CASE("reward overrides replace matrices per mode") {
    const std::string text = R"({
        "reward_matrices": {
            "A": {"tp": 2.0, "fn": -4.0},
            "C": {"sigma": 0.0, "fp": -2.0}
        }
    })";
    const PipelineConfig cfg = config_from_json(text);
    REQUIRE(cfg.reward_overrides.count("A") == 1);
    const RewardMode a = reward_mode_for(cfg, ModeId::A);
    CHECK(a.tp == 2.0);
    CHECK(a.fn == -4.0);
    CHECK(a.tn == 1.0);   // untouched defaults
    CHECK(a.fp == -1.0);
    const RewardMode b = reward_mode_for(cfg, ModeId::B);
    CHECK(b.tn == 2.0);   // no override: built-in matrix
    CHECK(b.fp == -3.0);
    const RewardMode c = reward_mode_for(cfg, ModeId::C);
    CHECK(c.fp == -2.0);

    // a matrix that rewards the wrong action is rejected
    CHECK_THROWS_AS(config_from_json(R"({"reward_matrices": {"A": {"tp": -5.0}}})"),
                    ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"reward_matrices": {"B": {"fp": 3.0}}})"),
                    ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"reward_matrices": {"D": {"sigma": -0.1}}})"),
                    ValidationError);
}

TEST_CASE("documents round-trip through the emitter") {
    PipelineConfig cfg = config_from_json("{}");
    cfg.seed = 7;
    cfg.triage.threshold = 2.5;
    cfg.reward_overrides["A"] = default_mode(ModeId::A);
    const std::string text = config_to_json(cfg);
    const PipelineConfig back = config_from_json(text);
    CHECK(config_to_json(back) == text);
    CHECK(back.seed == 7);
    CHECK(back.triage.threshold == 2.5);
    CHECK(back.scenario.scan_bursts.size() == cfg.scenario.scan_bursts.size());
    CHECK(back.scenario.flood_bursts.size() == cfg.scenario.flood_bursts.size());
    CHECK(back.reward_overrides.count("A") == 1);
}

TEST_CASE("range validations fire") {
    CHECK_THROWS_AS(config_from_json(R"({"train_fraction": 0.0})"), BadFraction);
    CHECK_THROWS_AS(config_from_json(R"({"train_fraction": 1.0})"), BadFraction);
    CHECK_THROWS_AS(config_from_json(R"({"window_ms": 0})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"vocab_k": 0})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"folds": 1})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"jobs": 0})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"modes": []})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"modes": ["Z"]})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"ppo": {"gamma": 0.0}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"ppo": {"gamma": 1.5}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"ppo": {"clip_epsilon": 0.0}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"triage": {"threshold_mode": "topk"}})"),
                    ValidationError);
    CHECK_THROWS(config_from_json("not json"));
}
