#include "flowtriage/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "flowtriage/csv.hpp"
#include "flowtriage/errors.hpp"
#include "flowtriage/io.hpp"

namespace flowtriage {
namespace {

void run_parallel(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(jobs, static_cast<int>(n));
    pool.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::string format_double(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

}  // namespace

FlowDataset load_dataset(const PipelineConfig& cfg) {
    if (cfg.input.path.empty()) {
        ScenarioConfig sc = cfg.scenario;
        sc.seed = derive_seed(cfg.seed, "scenario");
        return compose_scenario(sc);
    }
    const std::string text = read_file(cfg.input.path);
    ParseResult parsed = parse_flows(text, cfg.input.columns, cfg.input.path);
    if (!parsed.malformed.empty()) {
        std::fprintf(stderr, "warning: %zu malformed rows skipped in %s\n",
                     parsed.malformed.size(), cfg.input.path.c_str());
    }
    return dedupe_and_sort(parsed.dataset).dataset;
}

WindowArtifacts build_window_artifacts(const PipelineConfig& cfg, const FlowDataset& d) {
    if (d.records.empty()) throw EmptyInput("dataset has no records");
    WindowArtifacts art;
    art.windows = partition_windows(d, cfg.window_ms);

    const TrainSplit split = split_train_period(d, cfg.train_fraction);
    const std::vector<Window> train_windows = partition_windows(split.train, cfg.window_ms);
    art.vocab = build_vocab(train_windows, cfg.vocab_k);

    std::vector<Eigen::Matrix<double, 6, 1>> benign_rows;
    for (const auto& w : train_windows) {
        Window benign_only;
        benign_only.index = w.index;
        for (const auto& f : w.flows) {
            if (!f.label.has_value()) throw UnlabeledRecord(f.flow_id);
            if (*f.label == 0) benign_only.flows.push_back(f);
        }
        if (!benign_only.flows.empty()) benign_rows.push_back(aggregate_numeric(benign_only));
    }
    if (benign_rows.empty()) {
        throw ValidationError("no benign training rows in the training period");
    }
    Eigen::MatrixXd benign(static_cast<long>(benign_rows.size()), 6);
    for (std::size_t i = 0; i < benign_rows.size(); ++i) {
        benign.row(static_cast<long>(i)) = benign_rows[i].transpose();
    }
    art.standardizer = fit_standardizer(benign, cfg.epsilon);
    art.benign_train_std = standardize(art.standardizer, benign);

    art.scaler.standardizer = art.standardizer;
    art.scaler.sections = {static_cast<long>(art.vocab.src_ip.size()) + 1,
                           static_cast<long>(art.vocab.dest_ip.size()) + 1,
                           static_cast<long>(art.vocab.protocol.size()) + 1};

    art.scaled_states.reserve(art.windows.size());
    art.labels.reserve(art.windows.size());
    for (const auto& w : art.windows) {
        art.scaled_states.push_back(art.scaler.apply(build_state(w, art.vocab).concat()));
        art.labels.push_back(w.label);
    }
    return art;
}

ScoringModel train_scoring_model(const PipelineConfig& cfg, const WindowArtifacts& art) {
    AETrainConfig ae = cfg.autoencoder;
    ae.seed = derive_seed(cfg.seed, "autoencoder");
    ScoringModel sm;
    sm.model = train_autoencoder(art.benign_train_std, ae);
    sm.standardizer = art.standardizer;
    return sm;
}

TrainOutcome run_training(const PipelineConfig& cfg, const WindowArtifacts& art) {
    const std::vector<FoldSplit> folds = time_series_folds(art.windows, cfg.folds);

    struct Task {
        ModeId mode;
        FoldSplit fold;
    };
    std::vector<Task> tasks;
    for (ModeId mode : cfg.modes) {
        for (const auto& fold : folds) tasks.push_back({mode, fold});
    }

    TrainOutcome outcome;
    outcome.entries.resize(tasks.size());
    outcome.eval_logs.resize(tasks.size());

    run_parallel(tasks.size(), cfg.jobs, [&](std::size_t ti) {
        const Task& task = tasks[ti];
        const RewardMode mode = reward_mode_for(cfg, task.mode);
        const std::string tag = to_string(task.mode) + "-fold" + std::to_string(task.fold.fold);

        auto subset = [&](const std::vector<int>& idx) {
            std::vector<Eigen::VectorXd> states;
            std::vector<int> labels;
            std::vector<int> indices;
            for (int w : idx) {
                states.push_back(art.scaled_states[static_cast<std::size_t>(w)]);
                labels.push_back(art.labels[static_cast<std::size_t>(w)]);
                indices.push_back(art.windows[static_cast<std::size_t>(w)].index);
            }
            return std::tuple{std::move(states), std::move(labels), std::move(indices)};
        };

        auto [train_states, train_labels, train_indices] = subset(task.fold.train);
        ContainmentEnv train_env(std::move(train_states), std::move(train_labels),
                                 std::move(train_indices), mode,
                                 derive_seed(cfg.seed, "env-" + tag));

        TrainConfig ppo = cfg.ppo;
        ppo.seed = derive_seed(cfg.seed, "ppo-" + tag);
        TrainedAgent agent = train_agent(train_env, ppo, art.scaler, task.fold.fold);

        auto [test_states, test_labels, test_indices] = subset(task.fold.test);
        const EvalMetrics metrics = evaluate(agent, test_states, test_labels, mode);

        ContainmentEnv eval_env(test_states, test_labels, test_indices, mode,
                                derive_seed(cfg.seed, "eval-" + tag));
        while (!eval_env.done()) {
            const int a = greedy_action(action_probs(forward(agent.policy, eval_env.current_state())));
            eval_env.step(a);
        }

        outcome.entries[ti] = {to_string(task.mode), task.fold.fold, metrics, std::move(agent)};
        outcome.eval_logs[ti] = {task.fold.fold, to_string(task.mode), eval_env.take_log()};
    });

    outcome.cost_regret = summarize_cost_regret(outcome.eval_logs);
    return outcome;
}

std::string metrics_to_csv(const std::vector<TrainEntry>& entries) {
    std::ostringstream out;
    out << "mode,fold,precision,recall,f1,tp,fp,fn,tn,mean_cost,mean_regret,reduction_pct\n";
    for (const auto& e : entries) {
        const EvalMetrics& m = e.metrics;
        out << e.mode << "," << e.fold << "," << m.precision << "," << m.recall << "," << m.f1
            << "," << m.tp << "," << m.fp << "," << m.fn << "," << m.tn << "," << m.mean_cost
            << "," << m.mean_regret << "," << m.reduction_pct << "\n";
    }
    return out.str();
}

std::string scored_windows_to_csv(const std::vector<ScoredWindow>& scored,
                                  const std::vector<Window>& windows) {
    if (scored.size() != windows.size()) throw LengthMismatch("scored vs windows");
    std::ostringstream out;
    out << "t,start,aad_score,label,flow_id,src_ip,dest_ip,dest_port,flow_count,"
           "distinct_dest_count\n";
    for (std::size_t i = 0; i < scored.size(); ++i) {
        const ScoredWindow& s = scored[i];
        out << s.index << "," << format_timestamp_iso(windows[i].start_ms) << "," << s.aad_score
            << "," << s.label << "," << s.metadata.flow_id << "," << s.metadata.src_ip << ","
            << s.metadata.dest_ip << "," << s.metadata.dest_port << "," << s.metadata.flow_count
            << "," << s.metadata.distinct_dest_count << "\n";
    }
    return out.str();
}

int cmd_simulate(const PipelineConfig& cfg) {
    ScenarioConfig sc = cfg.scenario;
    sc.seed = derive_seed(cfg.seed, "scenario");
    ScenarioSummary summary;
    const FlowDataset d = compose_scenario(sc, &summary);
    ensure_dir(cfg.output_dir);
    write_file(cfg.output_dir + "/dataset.csv", dataset_to_csv(d));
    write_file(cfg.output_dir + "/scenario_summary.txt", summary_to_string(summary) + "\n");
    std::printf("wrote %s/dataset.csv: %s\n", cfg.output_dir.c_str(),
                summary_to_string(summary).c_str());
    return 0;
}

int cmd_ingest(const PipelineConfig& cfg) {
    if (cfg.input.path.empty()) {
        throw ValidationError("ingest requires an input file (--input)");
    }
    const std::string text = read_file(cfg.input.path);
    ParseResult parsed = parse_flows(text, cfg.input.columns, cfg.input.path);
    DedupeResult deduped = dedupe_and_sort(parsed.dataset);

    ensure_dir(cfg.output_dir);
    write_file(cfg.output_dir + "/normalized.csv", dataset_to_csv(deduped.dataset));
    std::ostringstream bad;
    bad << "line,reason\n";
    for (const auto& m : parsed.malformed) {
        bad << m.line_number << "," << csv::escape_field(m.reason) << "\n";
    }
    write_file(cfg.output_dir + "/malformed.csv", bad.str());

    std::ostringstream summary;
    summary << "rows=" << parsed.rows_total << " parsed=" << parsed.dataset.records.size()
            << " malformed=" << parsed.malformed.size()
            << " duplicates_removed=" << deduped.duplicates_removed
            << " kept=" << deduped.dataset.records.size();
    write_file(cfg.output_dir + "/ingest_summary.txt", summary.str() + "\n");
    std::printf("%s\n", summary.str().c_str());
    return 0;
}

int cmd_score(const PipelineConfig& cfg) {
    const FlowDataset d = load_dataset(cfg);
    const WindowArtifacts art = build_window_artifacts(cfg, d);
    const ScoringModel sm = train_scoring_model(cfg, art);
    const std::vector<ScoredWindow> scored = score_windows(sm.model, sm.standardizer, art.windows);

    ensure_dir(cfg.output_dir);
    write_file(cfg.output_dir + "/scoring_model.json", scoring_model_to_json(sm));
    write_file(cfg.output_dir + "/scored_windows.csv", scored_windows_to_csv(scored, art.windows));
    {
        std::vector<WindowState> states;
        for (const auto& w : art.windows) states.push_back(build_state(w, art.vocab));
        write_file(cfg.output_dir + "/states.csv", states_to_csv(states, art.vocab));
    }

    std::vector<double> benign_scores, attack_scores;
    for (const auto& s : scored) {
        (s.label == 1 ? attack_scores : benign_scores).push_back(s.aad_score);
    }
    std::printf("scored %zu windows (%zu attack, %zu benign); median AAD attack=%s benign=%s\n",
                scored.size(), attack_scores.size(), benign_scores.size(),
                format_double(median_of(attack_scores)).c_str(),
                format_double(median_of(benign_scores)).c_str());
    return 0;
}

int cmd_train(const PipelineConfig& cfg) {
    const FlowDataset d = load_dataset(cfg);
    const WindowArtifacts art = build_window_artifacts(cfg, d);
    const TrainOutcome outcome = run_training(cfg, art);

    ensure_dir(cfg.output_dir);
    for (const auto& e : outcome.entries) {
        const std::string stem = e.mode + "_fold" + std::to_string(e.fold);
        write_file(cfg.output_dir + "/agents/agent_" + stem + ".json", agent_to_json(e.agent));
        write_file(cfg.output_dir + "/curves/curve_" + stem + ".csv",
                   curve_to_csv(e.agent.curve));
    }
    write_file(cfg.output_dir + "/metrics.csv", metrics_to_csv(outcome.entries));
    write_file(cfg.output_dir + "/cost_regret.csv", summary_to_csv(outcome.cost_regret));
    write_file(cfg.output_dir + "/eval_steps.csv", steps_to_csv(outcome.eval_logs));

    std::printf("trained %zu agents (%zu modes x %d folds); metrics in %s/metrics.csv\n",
                outcome.entries.size(), cfg.modes.size(), cfg.folds, cfg.output_dir.c_str());
    return 0;
}

int cmd_triage(const PipelineConfig& cfg) {
    const std::string model_path = cfg.output_dir + "/scoring_model.json";
    if (!file_exists(model_path)) throw MissingArtifact(model_path);
    const int fold = cfg.triage.fold > 0 ? cfg.triage.fold : cfg.folds;
    const std::string agent_path = cfg.output_dir + "/agents/agent_" + cfg.triage.mode + "_fold" +
                                   std::to_string(fold) + ".json";
    if (!file_exists(agent_path)) throw MissingArtifact(agent_path);

    const ScoringModel sm = scoring_model_from_json(read_file(model_path));
    const TrainedAgent agent = agent_from_json(read_file(agent_path));

    const FlowDataset d = load_dataset(cfg);
    const WindowArtifacts art = build_window_artifacts(cfg, d);
    const std::vector<ScoredWindow> scored = score_windows(sm.model, sm.standardizer, art.windows);

    std::vector<int> actions;
    actions.reserve(art.windows.size());
    for (const auto& s : art.scaled_states) {
        actions.push_back(greedy_action(action_probs(forward(agent.policy, s))));
    }

    const std::vector<PriorityItem> items = compute_priorities(actions, scored, art.windows);
    const double threshold = cfg.triage.threshold_mode == "percentile"
                                 ? percentile_threshold(items, cfg.triage.percentile)
                                 : cfg.triage.threshold;
    const Selection selection = select_for_analysis(items, threshold);

    BackendConfig backend_cfg = cfg.backend;
    const bool reveal = cfg.triage.reveal_real_ips && backend_cfg.url.empty();
    auto backend = make_backend(backend_cfg);
    PseudonymMap map;
    const TriageOutput output =
        build_reports(selection.items, *backend, map, threshold, reveal);

    ensure_dir(cfg.output_dir);
    for (const auto& r : output.reports) {
        write_file(cfg.output_dir + "/reports/flow_" + r.flow_id + ".json", report_to_json(r));
    }
    for (const auto& item : selection.items) {
        WindowMetadata masked = item.metadata;
        masked.src_ip = map.token_for(item.metadata.src_ip);
        masked.dest_ip = map.token_for(item.metadata.dest_ip);
        const std::string stem = cfg.output_dir + "/spl/window_" +
                                 std::to_string(item.window_index);
        write_file(stem + "_burst.spl",
                   generate_spl(masked, SplTemplate::BurstTransaction) + "\n");
        write_file(stem + "_host.spl", generate_spl(masked, SplTemplate::HostFilter) + "\n");
    }
    write_file(cfg.output_dir + "/master_triage.csv", output.master_csv);
    write_file(cfg.output_dir + "/pseudonyms.csv", map.to_csv());

    std::ostringstream summary;
    summary << "selected " << selection.items.size() << " of " << items.size() << " windows"
            << " (threshold " << format_double(threshold) << ", reduction "
            << format_double(selection.reduction_pct) << "%), " << output.reports.size()
            << " flow reports";
    write_file(cfg.output_dir + "/triage_summary.txt", summary.str() + "\n");
    std::printf("%s\n", summary.str().c_str());
    return 0;
}

int cmd_oracle(std::string* out_text) {
    std::ostringstream report;
    int failures = 0;
    auto check = [&](const std::string& name, bool ok, const std::string& detail) {
        report << (ok ? "PASS" : "FAIL") << " " << name << ": " << detail << "\n";
        if (!ok) ++failures;
    };

    Window w;
    w.index = 0;
    const int sports[4] = {443, 443, 22, 22};
    const int dports[4] = {52344, 52345, 52346, 52347};
    const std::int64_t bin[4] = {1200, 1300, 8000, 9000};
    const std::int64_t bout[4] = {300, 350, 9000, 11000};
    for (int i = 0; i < 4; ++i) {
        FlowRecord f;
        f.timestamp_ms = 1000 * (i + 1);
        f.flow_id = "w0_f" + std::to_string(i);
        f.src_ip = "10.0.2.4";
        f.dest_ip = "10.0.2.15";
        f.src_port = sports[i];
        f.dest_port = dports[i];
        f.protocol = Protocol::TCP;
        f.bytes_in = bin[i];
        f.bytes_out = bout[i];
        f.label = 1;
        w.flows.push_back(std::move(f));
    }
    w.end_ms = 300'000;
    w.label = 1;

    const Eigen::Matrix<double, 6, 1> agg = aggregate_numeric(w);
    Eigen::Matrix<double, 6, 1> agg_expected;
    agg_expected << 232.5, 443, 52345.5, 52347, 4875, 11000;
    check("aggregation", agg == agg_expected,
          "[232.5, 443, 52345.5, 52347, 4875, 11000]");

    Standardizer st;
    st.mu << 200, 400, 52000, 52000, 2000, 5000;
    st.sigma << 100, 100, 200, 200, 2000, 3000;
    st.epsilon = 1e-8;
    const Eigen::Matrix<double, 6, 1> x = standardize_row(st, agg);
    Eigen::Matrix<double, 6, 1> x_expected;
    x_expected << 0.325, 0.43, 1.7275, 1.735, 1.4375, 2.0;
    check("standardization", (x - x_expected).cwiseAbs().maxCoeff() < 1e-9,
          "[0.325, 0.43, 1.7275, 1.735, 1.4375, 2.0] within 1e-9");

    Eigen::MatrixXd W1(4, 6);
    W1 << 0.30, 0.10, 0.05, 0.05, 0.10, 0.20,
          0.10, 0.20, 0.10, 0.10, 0.20, 0.10,
          0.05, 0.05, 0.30, 0.30, 0.10, 0.10,
          0.10, 0.10, 0.20, 0.20, 0.10, 0.05;
    Eigen::MatrixXd W2(2, 4);
    W2 << 0.6, 0.2, 0.1, 0.1,
          0.1, 0.2, 0.6, 0.1;
    Eigen::MatrixXd A(6, 2);
    A << 0.20, 0.00,
         0.10, 0.05,
         0.30, 0.10,
         0.30, 0.10,
         0.10, 0.20,
         0.05, 0.40;
    const AEModel model = load_explicit_weights(
        {W1, W2, A},
        {Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(6)},
        {Activation::Relu, Activation::Relu, Activation::Identity});

    const ForwardTrace trace = model.net.forward_trace(x);
    const Eigen::VectorXd z = trace.post[2];
    check("bottleneck",
          std::abs(z[0] - 0.9482) < 1e-3 && std::abs(z[1] - 1.2297) < 1e-3,
          "z = [" + format_double(z[0]) + ", " + format_double(z[1]) +
              "] vs [0.9482, 1.2297] within 1e-3");

    const double aad = aad_score(model, x);
    check("reconstruction score", std::abs(aad - 1.1558) < 1e-3,
          format_double(aad) + " vs 1.1558 within 1e-3");

    const Eigen::Vector2d probs = action_probs(Eigen::Vector2d(-1.2, 1.6));
    check("action probabilities",
          std::abs(probs[0] - 0.057) < 5e-3 && std::abs(probs[1] - 0.943) < 5e-3,
          "[" + format_double(probs[0]) + ", " + format_double(probs[1]) +
              "] vs [0.057, 0.943] within 5e-3");

    ScoredWindow sw;
    sw.index = 0;
    sw.aad_score = aad;
    sw.metadata = build_metadata(w);
    sw.label = 1;
    const auto contained = compute_priorities({1}, {sw}, {w});
    const auto allowed = compute_priorities({0}, {sw}, {w});
    check("priority gating",
          contained[0].priority == aad && allowed[0].priority == 0.0,
          "contain -> " + format_double(contained[0].priority) + ", allow -> 0");

    const std::string text = report.str();
    std::printf("%s", text.c_str());
    if (out_text) *out_text = text;
    return failures == 0 ? 0 : 2;
}

int cmd_report(const PipelineConfig& cfg) {
    const char* files[] = {"scenario_summary.txt", "ingest_summary.txt", "metrics.csv",
                           "cost_regret.csv", "triage_summary.txt"};
    bool any = false;
    std::ostringstream out;
    for (const char* name : files) {
        const std::string path = cfg.output_dir + "/" + name;
        if (!file_exists(path)) continue;
        any = true;
        out << "== " << name << " ==\n" << read_file(path) << "\n";
    }
    if (!any) throw MissingArtifact(cfg.output_dir + " (no pipeline outputs found)");
    std::printf("%s", out.str().c_str());
    return 0;
}

}  // namespace flowtriage
