#include "flowtriage/config.hpp"

#include <initializer_list>
#include <set>

#include <nlohmann/json.hpp>

#include "flowtriage/errors.hpp"

namespace flowtriage {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!obj.is_object()) throw ValidationError("config section '" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!ok.count(key)) {
            throw ValidationError("unknown config key '" + where + "." + key + "'");
        }
    }
}

template <typename T>
void maybe(const json& obj, const char* key, T& target) {
    if (obj.contains(key)) target = obj.at(key).get<T>();
}

void parse_columns(const json& j, ColumnMapping& cols) {
    check_keys(j,
               {"timestamp", "flow_id", "src_ip", "dest_ip", "src_port", "dest_port", "protocol",
                "bytes_in", "bytes_out", "label"},
               "input.columns");
    maybe(j, "timestamp", cols.timestamp);
    maybe(j, "flow_id", cols.flow_id);
    maybe(j, "src_ip", cols.src_ip);
    maybe(j, "dest_ip", cols.dest_ip);
    maybe(j, "src_port", cols.src_port);
    maybe(j, "dest_port", cols.dest_port);
    maybe(j, "protocol", cols.protocol);
    maybe(j, "bytes_in", cols.bytes_in);
    maybe(j, "bytes_out", cols.bytes_out);
    maybe(j, "label", cols.label);
}

ScanBurst parse_scan_burst(const json& j, const std::string& where) {
    check_keys(j, {"start_min", "duration_min", "port_lo", "port_hi", "src_ip"}, where);
    ScanBurst b;
    maybe(j, "start_min", b.start_min);
    maybe(j, "duration_min", b.duration_min);
    maybe(j, "port_lo", b.port_lo);
    maybe(j, "port_hi", b.port_hi);
    maybe(j, "src_ip", b.src_ip);
    return b;
}

void parse_scenario(const json& j, ScenarioConfig& sc) {
    check_keys(j,
               {"duration_min", "start_epoch_ms", "benign", "scan_target", "scan_bursts",
                "authorized_scan_bursts", "flood"},
               "scenario");
    maybe(j, "duration_min", sc.duration_min);
    maybe(j, "start_epoch_ms", sc.start_epoch_ms);
    maybe(j, "scan_target", sc.scan_target);
    if (j.contains("benign")) {
        const auto& b = j.at("benign");
        check_keys(b,
                   {"rate_per_min", "hosts", "servers", "port_weights", "bytes_in_log_mu",
                    "bytes_in_log_sigma", "bytes_out_log_mu", "bytes_out_log_sigma"},
                   "scenario.benign");
        maybe(b, "rate_per_min", sc.benign.rate_per_min);
        maybe(b, "hosts", sc.benign.hosts);
        maybe(b, "servers", sc.benign.servers);
        if (b.contains("port_weights")) {
            sc.benign.port_weights.clear();
            for (const auto& pw : b.at("port_weights")) {
                if (!pw.is_array() || pw.size() != 2) {
                    throw ValidationError("scenario.benign.port_weights entries must be "
                                          "[port, weight] pairs");
                }
                sc.benign.port_weights.emplace_back(pw.at(0).get<int>(), pw.at(1).get<double>());
            }
        }
        maybe(b, "bytes_in_log_mu", sc.benign.bytes_in_log_mu);
        maybe(b, "bytes_in_log_sigma", sc.benign.bytes_in_log_sigma);
        maybe(b, "bytes_out_log_mu", sc.benign.bytes_out_log_mu);
        maybe(b, "bytes_out_log_sigma", sc.benign.bytes_out_log_sigma);
    }
    if (j.contains("scan_bursts")) {
        sc.scan_bursts.clear();
        for (const auto& sb : j.at("scan_bursts")) {
            sc.scan_bursts.push_back(parse_scan_burst(sb, "scenario.scan_bursts[]"));
        }
    }
    if (j.contains("authorized_scan_bursts")) {
        sc.authorized_scan_bursts.clear();
        for (const auto& sb : j.at("authorized_scan_bursts")) {
            sc.authorized_scan_bursts.push_back(
                parse_scan_burst(sb, "scenario.authorized_scan_bursts[]"));
        }
    }
    if (j.contains("flood")) {
        const auto& f = j.at("flood");
        check_keys(f, {"src", "target", "dest_port", "bytes_log_mu", "bytes_log_sigma", "bursts"},
                   "scenario.flood");
        maybe(f, "src", sc.flood_src);
        maybe(f, "target", sc.flood_target);
        maybe(f, "dest_port", sc.flood_dest_port);
        maybe(f, "bytes_log_mu", sc.flood_bytes_log_mu);
        maybe(f, "bytes_log_sigma", sc.flood_bytes_log_sigma);
        if (f.contains("bursts")) {
            sc.flood_bursts.clear();
            for (const auto& fb : f.at("bursts")) {
                check_keys(fb, {"start_min", "duration_min", "rate_per_min"},
                           "scenario.flood.bursts[]");
                FloodBurst b;
                maybe(fb, "start_min", b.start_min);
                maybe(fb, "duration_min", b.duration_min);
                maybe(fb, "rate_per_min", b.rate_per_min);
                sc.flood_bursts.push_back(b);
            }
        }
    }
}

RewardMode parse_reward_matrix(const json& j, ModeId id, const std::string& where) {
    check_keys(j, {"tp", "tn", "fp", "fn", "sigma"}, where);
    RewardMode m = default_mode(id);
    maybe(j, "tp", m.tp);
    maybe(j, "tn", m.tn);
    maybe(j, "fp", m.fp);
    maybe(j, "fn", m.fn);
    maybe(j, "sigma", m.noise_sigma);
    if (m.tp <= m.fn || m.tn <= m.fp) {
        throw ValidationError(where + ": correct action must be strictly preferred given truth");
    }
    if (m.noise_sigma < 0.0) throw ValidationError(where + ": sigma must be >= 0");
    return m;
}

}  // namespace

PipelineConfig config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc,
               {"seed", "input", "window_ms", "train_fraction", "epsilon", "vocab_k",
                "autoencoder", "modes", "reward_matrices", "ppo", "folds", "triage", "backend",
                "output_dir", "jobs", "scenario"},
               "<root>");

    PipelineConfig cfg;
    maybe(doc, "seed", cfg.seed);
    maybe(doc, "window_ms", cfg.window_ms);
    maybe(doc, "train_fraction", cfg.train_fraction);
    maybe(doc, "epsilon", cfg.epsilon);
    maybe(doc, "vocab_k", cfg.vocab_k);
    maybe(doc, "folds", cfg.folds);
    maybe(doc, "output_dir", cfg.output_dir);
    maybe(doc, "jobs", cfg.jobs);

    if (doc.contains("input")) {
        const auto& in = doc.at("input");
        check_keys(in, {"path", "columns"}, "input");
        maybe(in, "path", cfg.input.path);
        if (in.contains("columns")) parse_columns(in.at("columns"), cfg.input.columns);
    }

    if (doc.contains("autoencoder")) {
        const auto& ae = doc.at("autoencoder");
        check_keys(ae, {"dims", "epochs", "lr", "batch_size"}, "autoencoder");
        maybe(ae, "dims", cfg.autoencoder.dims);
        maybe(ae, "epochs", cfg.autoencoder.epochs);
        maybe(ae, "lr", cfg.autoencoder.lr);
        maybe(ae, "batch_size", cfg.autoencoder.batch_size);
    }

    if (doc.contains("modes")) {
        cfg.modes.clear();
        for (const auto& m : doc.at("modes")) {
            cfg.modes.push_back(mode_from_string(m.get<std::string>()));
        }
        if (cfg.modes.empty()) throw ValidationError("modes list must not be empty");
    }

    if (doc.contains("reward_matrices")) {
        const auto& rm = doc.at("reward_matrices");
        check_keys(rm, {"A", "B", "C", "D"}, "reward_matrices");
        for (const auto& [key, value] : rm.items()) {
            cfg.reward_overrides[key] =
                parse_reward_matrix(value, mode_from_string(key), "reward_matrices." + key);
        }
    }

    if (doc.contains("ppo")) {
        const auto& p = doc.at("ppo");
        check_keys(p,
                   {"gamma", "gae_lambda", "clip_epsilon", "lr", "epochs_per_update", "minibatch",
                    "passes", "entropy_coef", "hidden"},
                   "ppo");
        maybe(p, "gamma", cfg.ppo.gamma);
        maybe(p, "gae_lambda", cfg.ppo.gae_lambda);
        maybe(p, "clip_epsilon", cfg.ppo.clip_epsilon);
        maybe(p, "lr", cfg.ppo.lr);
        maybe(p, "epochs_per_update", cfg.ppo.epochs_per_update);
        maybe(p, "minibatch", cfg.ppo.minibatch);
        maybe(p, "passes", cfg.ppo.passes);
        maybe(p, "entropy_coef", cfg.ppo.entropy_coef);
        maybe(p, "hidden", cfg.ppo.hidden);
        if (!(cfg.ppo.gamma > 0.0 && cfg.ppo.gamma <= 1.0)) {
            throw ValidationError("ppo.gamma must lie in (0, 1]");
        }
        if (cfg.ppo.clip_epsilon <= 0.0) throw ValidationError("ppo.clip_epsilon must be > 0");
    }

    if (doc.contains("triage")) {
        const auto& t = doc.at("triage");
        check_keys(t, {"threshold_mode", "threshold", "percentile", "mode", "fold",
                       "reveal_real_ips"},
                   "triage");
        maybe(t, "threshold_mode", cfg.triage.threshold_mode);
        maybe(t, "threshold", cfg.triage.threshold);
        maybe(t, "percentile", cfg.triage.percentile);
        maybe(t, "mode", cfg.triage.mode);
        maybe(t, "fold", cfg.triage.fold);
        maybe(t, "reveal_real_ips", cfg.triage.reveal_real_ips);
        if (cfg.triage.threshold_mode != "absolute" && cfg.triage.threshold_mode != "percentile") {
            throw ValidationError("triage.threshold_mode must be 'absolute' or 'percentile'");
        }
    }

    if (doc.contains("backend")) {
        const auto& b = doc.at("backend");
        check_keys(b, {"url", "model", "timeout_s"}, "backend");
        maybe(b, "url", cfg.backend.url);
        maybe(b, "model", cfg.backend.model);
        maybe(b, "timeout_s", cfg.backend.timeout_s);
    }

    if (doc.contains("scenario")) parse_scenario(doc.at("scenario"), cfg.scenario);

    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
        throw BadFraction(cfg.train_fraction);
    }
    if (cfg.window_ms <= 0) throw ValidationError("window_ms must be positive");
    if (cfg.vocab_k < 1) throw ValidationError("vocab_k must be >= 1");
    if (cfg.folds < 2) throw ValidationError("folds must be >= 2");
    if (cfg.jobs < 1) throw ValidationError("jobs must be >= 1");
    return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
    json doc;
    doc["seed"] = cfg.seed;
    doc["input"] = {{"path", cfg.input.path},
                    {"columns",
                     {{"timestamp", cfg.input.columns.timestamp},
                      {"flow_id", cfg.input.columns.flow_id},
                      {"src_ip", cfg.input.columns.src_ip},
                      {"dest_ip", cfg.input.columns.dest_ip},
                      {"src_port", cfg.input.columns.src_port},
                      {"dest_port", cfg.input.columns.dest_port},
                      {"protocol", cfg.input.columns.protocol},
                      {"bytes_in", cfg.input.columns.bytes_in},
                      {"bytes_out", cfg.input.columns.bytes_out},
                      {"label", cfg.input.columns.label}}}};
    doc["window_ms"] = cfg.window_ms;
    doc["train_fraction"] = cfg.train_fraction;
    doc["epsilon"] = cfg.epsilon;
    doc["vocab_k"] = cfg.vocab_k;
    doc["autoencoder"] = {{"dims", cfg.autoencoder.dims},
                          {"epochs", cfg.autoencoder.epochs},
                          {"lr", cfg.autoencoder.lr},
                          {"batch_size", cfg.autoencoder.batch_size}};
    json modes = json::array();
    for (ModeId m : cfg.modes) modes.push_back(to_string(m));
    doc["modes"] = std::move(modes);
    json rm = json::object();
    for (const auto& [key, m] : cfg.reward_overrides) {
        rm[key] = {{"tp", m.tp}, {"tn", m.tn}, {"fp", m.fp}, {"fn", m.fn},
                   {"sigma", m.noise_sigma}};
    }
    doc["reward_matrices"] = std::move(rm);
    doc["ppo"] = {{"gamma", cfg.ppo.gamma},
                  {"gae_lambda", cfg.ppo.gae_lambda},
                  {"clip_epsilon", cfg.ppo.clip_epsilon},
                  {"lr", cfg.ppo.lr},
                  {"epochs_per_update", cfg.ppo.epochs_per_update},
                  {"minibatch", cfg.ppo.minibatch},
                  {"passes", cfg.ppo.passes},
                  {"entropy_coef", cfg.ppo.entropy_coef},
                  {"hidden", cfg.ppo.hidden}};
    doc["folds"] = cfg.folds;
    doc["triage"] = {{"threshold_mode", cfg.triage.threshold_mode},
                     {"threshold", cfg.triage.threshold},
                     {"percentile", cfg.triage.percentile},
                     {"mode", cfg.triage.mode},
                     {"fold", cfg.triage.fold},
                     {"reveal_real_ips", cfg.triage.reveal_real_ips}};
    doc["backend"] = {{"url", cfg.backend.url},
                      {"model", cfg.backend.model},
                      {"timeout_s", cfg.backend.timeout_s}};
    doc["output_dir"] = cfg.output_dir;
    doc["jobs"] = cfg.jobs;

    json scan_bursts = json::array();
    for (const auto& b : cfg.scenario.scan_bursts) {
        scan_bursts.push_back({{"start_min", b.start_min},
                               {"duration_min", b.duration_min},
                               {"port_lo", b.port_lo},
                               {"port_hi", b.port_hi},
                               {"src_ip", b.src_ip}});
    }
    json auth_bursts = json::array();
    for (const auto& b : cfg.scenario.authorized_scan_bursts) {
        auth_bursts.push_back({{"start_min", b.start_min},
                               {"duration_min", b.duration_min},
                               {"port_lo", b.port_lo},
                               {"port_hi", b.port_hi},
                               {"src_ip", b.src_ip}});
    }
    json flood_bursts = json::array();
    for (const auto& b : cfg.scenario.flood_bursts) {
        flood_bursts.push_back({{"start_min", b.start_min},
                                {"duration_min", b.duration_min},
                                {"rate_per_min", b.rate_per_min}});
    }
    json port_weights = json::array();
    for (const auto& [port, w] : cfg.scenario.benign.port_weights) {
        port_weights.push_back(json::array({port, w}));
    }
    doc["scenario"] = {
        {"duration_min", cfg.scenario.duration_min},
        {"start_epoch_ms", cfg.scenario.start_epoch_ms},
        {"scan_target", cfg.scenario.scan_target},
        {"benign",
         {{"rate_per_min", cfg.scenario.benign.rate_per_min},
          {"hosts", cfg.scenario.benign.hosts},
          {"servers", cfg.scenario.benign.servers},
          {"port_weights", std::move(port_weights)},
          {"bytes_in_log_mu", cfg.scenario.benign.bytes_in_log_mu},
          {"bytes_in_log_sigma", cfg.scenario.benign.bytes_in_log_sigma},
          {"bytes_out_log_mu", cfg.scenario.benign.bytes_out_log_mu},
          {"bytes_out_log_sigma", cfg.scenario.benign.bytes_out_log_sigma}}},
        {"scan_bursts", std::move(scan_bursts)},
        {"authorized_scan_bursts", std::move(auth_bursts)},
        {"flood",
         {{"src", cfg.scenario.flood_src},
          {"target", cfg.scenario.flood_target},
          {"dest_port", cfg.scenario.flood_dest_port},
          {"bytes_log_mu", cfg.scenario.flood_bytes_log_mu},
          {"bytes_log_sigma", cfg.scenario.flood_bytes_log_sigma},
          {"bursts", std::move(flood_bursts)}}}};
    return doc.dump(2);
}

RewardMode reward_mode_for(const PipelineConfig& cfg, ModeId id) {
    const auto it = cfg.reward_overrides.find(to_string(id));
    if (it != cfg.reward_overrides.end()) return it->second;
    return default_mode(id);
}

}  // namespace flowtriage
