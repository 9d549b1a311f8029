#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowtriage/flow.hpp"
#include "flowtriage/rng.hpp"

namespace flowtriage {

// One scan sweep: sequential dest ports from a single source to one target,
// all inside [start_min, start_min + duration_min). An empty src_ip means a
// fresh generated source address per burst (rotating scanner).
struct ScanBurst {
    int start_min = 0;
    int duration_min = 1;
    int port_lo = 1;
    int port_hi = 100;
    std::string src_ip;
};

struct FloodBurst {
    int start_min = 0;
    int duration_min = 1;
    double rate_per_min = 600.0;
};

struct BenignProfile {
    double rate_per_min = 100.0;
    std::vector<std::string> hosts = {"10.0.1.1", "10.0.1.2", "10.0.1.3", "10.0.1.4",
                                      "10.0.1.5", "10.0.1.6", "10.0.1.7", "10.0.1.8"};
    std::vector<std::string> servers = {"10.0.0.10", "10.0.0.20", "10.0.0.30",
                                        "93.184.216.34", "151.101.1.69"};
    std::vector<std::pair<int, double>> port_weights = {{53, 0.40}, {80, 0.25},
                                                        {443, 0.25}, {22, 0.10}};
    double bytes_in_log_mu = 7.0;
    double bytes_in_log_sigma = 1.0;
    double bytes_out_log_mu = 6.5;
    double bytes_out_log_sigma = 1.0;
};

struct ScenarioConfig {
    int duration_min = 120;
    std::int64_t start_epoch_ms = 1767225600000;  // 2026-01-01T00:00:00Z
    std::uint64_t seed = 0;

    BenignProfile benign;

    std::string scan_target = "10.0.2.15";
    std::vector<ScanBurst> scan_bursts;             // label 1
    std::vector<ScanBurst> authorized_scan_bursts;  // label 0 (sanctioned sweeps)

    std::string flood_src = "10.0.2.4";
    std::string flood_target = "10.0.2.15";
    int flood_dest_port = 80;
    double flood_bytes_log_mu = 10.5;
    double flood_bytes_log_sigma = 0.3;
    std::vector<FloodBurst> flood_bursts;  // label 1
};

// 120-minute scenario in six 20-minute blocks, each holding one flood, three
// heavy scans, and five light scans (three malicious, two authorized) over a
// benign baseline. Light scans from rotating sources are deliberately
// hard to distinguish from the authorized sweeps.
ScenarioConfig default_scenario();

struct ScenarioSummary {
    long total = 0;
    long benign = 0;
    long malicious = 0;
    long duplicates_removed = 0;
    double malicious_pct = 0.0;
};

FlowDataset gen_benign(const ScenarioConfig& cfg, Rng& rng);
FlowDataset gen_portscan(const ScenarioConfig& cfg, const ScanBurst& burst, int label, Rng& rng);
FlowDataset gen_udp_flood(const ScenarioConfig& cfg, const FloodBurst& burst, Rng& rng);

FlowDataset compose_scenario(const ScenarioConfig& cfg, ScenarioSummary* summary = nullptr);

std::string dataset_to_csv(const FlowDataset& d);
std::string summary_to_string(const ScenarioSummary& s);

}  // namespace flowtriage
