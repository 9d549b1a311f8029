#include "flowtriage/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "flowtriage/errors.hpp"
#include "flowtriage/ingest.hpp"

namespace flowtriage {
namespace {

int ephemeral_port(Rng& rng) { return static_cast<int>(rng.uniform_int(49152, 65535)); }

std::string rotated_source(Rng& rng) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "198.51.%d.%d", static_cast<int>(rng.uniform_int(0, 255)),
                  static_cast<int>(rng.uniform_int(1, 254)));
    return buf;
}

std::int64_t at_offset(const ScenarioConfig& cfg, int minute, double offset_s) {
    return cfg.start_epoch_ms + static_cast<std::int64_t>(minute) * 60'000 +
           static_cast<std::int64_t>(std::llround(offset_s * 1000.0));
}

}  // namespace

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    const int heavy_ports[3] = {150, 250, 400};
    // Light sweeps all cover the same 30 ports: malicious recon and sanctioned
    // inventory scans are deliberately identical in shape, so only their 3:2
    // frequency separates them. Distinguishable shapes would let a policy carve
    // the clusters apart and collapse the precision/recall trade-off; too many
    // ambiguous windows would cap the recall any policy can reach. One light
    // sweep per block plus four sanctioned ones across the run keeps the
    // ambiguity real but small next to the unambiguous floods and heavy scans.
    const int light_ports = 30;
    for (int b = 0; b < 6; ++b) {
        const int base = 20 * b;
        cfg.flood_bursts.push_back({base + 2, 1, 600.0});
        const int heavy_at[3] = {5, 8, 14};
        for (int i = 0; i < 3; ++i) {
            cfg.scan_bursts.push_back({base + heavy_at[i], 1, 1, heavy_ports[i], ""});
        }
        cfg.scan_bursts.push_back({base + 9, 1, 1, light_ports, ""});
        if (b == 0 || b == 2 || b == 3 || b == 5) {
            cfg.authorized_scan_bursts.push_back({base + 11, 1, 1, light_ports, ""});
        }
    }
    return cfg;
}

FlowDataset gen_benign(const ScenarioConfig& cfg, Rng& rng) {
    if (cfg.duration_min <= 0) throw ValidationError("scenario duration must be positive");
    const auto& p = cfg.benign;
    if (p.rate_per_min <= 0.0) throw ValidationError("benign rate must be positive");
    if (p.hosts.empty() || p.servers.empty()) throw ValidationError("benign hosts/servers empty");
    std::vector<double> weights;
    for (const auto& [port, w] : p.port_weights) {
        (void)port;
        weights.push_back(w);
    }

    FlowDataset d;
    d.source_name = "benign";
    const int per_min = static_cast<int>(std::llround(p.rate_per_min));
    for (int m = 0; m < cfg.duration_min; ++m) {
        for (int k = 0; k < per_min; ++k) {
            FlowRecord f;
            // pin the very first flow to the scenario origin so window
            // boundaries line up with whole minutes
            const double offset = (m == 0 && k == 0) ? 0.0 : rng.uniform(0.0, 60.0);
            f.timestamp_ms = at_offset(cfg, m, offset);
            f.src_ip = p.hosts[rng.uniform_int(0, static_cast<long>(p.hosts.size()) - 1)];
            f.src_port = ephemeral_port(rng);
            const std::size_t pick = rng.categorical(weights);
            f.dest_port = p.port_weights[pick].first;
            f.dest_ip = (f.dest_port == 53)
                            ? p.servers.front()
                            : p.servers[rng.uniform_int(0, static_cast<long>(p.servers.size()) - 1)];
            f.protocol = (f.dest_port == 53) ? Protocol::UDP : Protocol::TCP;
            f.bytes_in = static_cast<std::int64_t>(
                std::llround(rng.lognormal(p.bytes_in_log_mu, p.bytes_in_log_sigma)));
            f.bytes_out = static_cast<std::int64_t>(
                std::llround(rng.lognormal(p.bytes_out_log_mu, p.bytes_out_log_sigma)));
            f.label = 0;
            d.records.push_back(std::move(f));
        }
    }
    return d;
}

FlowDataset gen_portscan(const ScenarioConfig& cfg, const ScanBurst& burst, int label, Rng& rng) {
    if (burst.port_hi < burst.port_lo) throw ValidationError("scan port range is empty");
    if (burst.duration_min <= 0) throw ValidationError("scan duration must be positive");
    FlowDataset d;
    d.source_name = "portscan";
    const std::string src = burst.src_ip.empty() ? rotated_source(rng) : burst.src_ip;
    const int count = burst.port_hi - burst.port_lo + 1;
    const double span_s = burst.duration_min * 60.0;
    for (int i = 0; i < count; ++i) {
        FlowRecord f;
        f.timestamp_ms =
            at_offset(cfg, burst.start_min, span_s * (i + 0.5) / static_cast<double>(count));
        f.src_ip = src;
        f.dest_ip = cfg.scan_target;
        f.src_port = ephemeral_port(rng);
        f.dest_port = burst.port_lo + i;
        f.protocol = Protocol::TCP;
        f.bytes_in = 40;
        f.bytes_out = 0;
        f.label = label;
        d.records.push_back(std::move(f));
    }
    return d;
}

FlowDataset gen_udp_flood(const ScenarioConfig& cfg, const FloodBurst& burst, Rng& rng) {
    if (burst.rate_per_min <= 0.0) throw ValidationError("flood rate must be positive");
    if (burst.duration_min <= 0) throw ValidationError("flood duration must be positive");
    FlowDataset d;
    d.source_name = "udp_flood";
    const long count = std::lround(burst.rate_per_min * burst.duration_min);
    const double span_s = burst.duration_min * 60.0;
    for (long i = 0; i < count; ++i) {
        FlowRecord f;
        f.timestamp_ms = at_offset(cfg, burst.start_min, rng.uniform(0.0, span_s));
        f.src_ip = cfg.flood_src;
        f.dest_ip = cfg.flood_target;
        f.src_port = ephemeral_port(rng);
        f.dest_port = cfg.flood_dest_port;
        f.protocol = Protocol::UDP;
        f.bytes_in = static_cast<std::int64_t>(
            std::llround(rng.lognormal(cfg.flood_bytes_log_mu, cfg.flood_bytes_log_sigma)));
        f.bytes_out = static_cast<std::int64_t>(rng.uniform_int(0, 60));
        f.label = 1;
        d.records.push_back(std::move(f));
    }
    return d;
}

FlowDataset compose_scenario(const ScenarioConfig& cfg, ScenarioSummary* summary) {
    for (const auto& b : cfg.scan_bursts) {
        if (b.start_min < 0 || b.start_min + b.duration_min > cfg.duration_min) {
            throw ValidationError("scan burst outside scenario duration");
        }
    }
    for (const auto& b : cfg.authorized_scan_bursts) {
        if (b.start_min < 0 || b.start_min + b.duration_min > cfg.duration_min) {
            throw ValidationError("authorized scan burst outside scenario duration");
        }
    }
    for (const auto& b : cfg.flood_bursts) {
        if (b.start_min < 0 || b.start_min + b.duration_min > cfg.duration_min) {
            throw ValidationError("flood burst outside scenario duration");
        }
    }

    FlowDataset all;
    all.source_name = "synthetic";
    {
        Rng rng(derive_seed(cfg.seed, "benign"));
        auto part = gen_benign(cfg, rng);
        all.records.insert(all.records.end(), part.records.begin(), part.records.end());
    }
    for (std::size_t i = 0; i < cfg.scan_bursts.size(); ++i) {
        Rng rng(derive_seed(cfg.seed, "scan-" + std::to_string(i)));
        auto part = gen_portscan(cfg, cfg.scan_bursts[i], 1, rng);
        all.records.insert(all.records.end(), part.records.begin(), part.records.end());
    }
    for (std::size_t i = 0; i < cfg.authorized_scan_bursts.size(); ++i) {
        Rng rng(derive_seed(cfg.seed, "authorized-scan-" + std::to_string(i)));
        auto part = gen_portscan(cfg, cfg.authorized_scan_bursts[i], 0, rng);
        all.records.insert(all.records.end(), part.records.begin(), part.records.end());
    }
    for (std::size_t i = 0; i < cfg.flood_bursts.size(); ++i) {
        Rng rng(derive_seed(cfg.seed, "flood-" + std::to_string(i)));
        auto part = gen_udp_flood(cfg, cfg.flood_bursts[i], rng);
        all.records.insert(all.records.end(), part.records.begin(), part.records.end());
    }

    DedupeResult deduped = dedupe_and_sort(all);
    FlowDataset out = std::move(deduped.dataset);
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "f%06zu", i);
        out.records[i].flow_id = buf;
    }

    if (summary) {
        summary->total = static_cast<long>(out.records.size());
        summary->malicious = 0;
        for (const auto& r : out.records) {
            if (r.label.value_or(0) == 1) ++summary->malicious;
        }
        summary->benign = summary->total - summary->malicious;
        summary->duplicates_removed = deduped.duplicates_removed;
        summary->malicious_pct =
            summary->total > 0
                ? 100.0 * static_cast<double>(summary->malicious) / static_cast<double>(summary->total)
                : 0.0;
    }
    return out;
}

std::string dataset_to_csv(const FlowDataset& d) {
    std::ostringstream out;
    out << "timestamp,flow_id,src_ip,dest_ip,src_port,dest_port,protocol,bytes_in,bytes_out,label\n";
    for (const auto& r : d.records) {
        out << r.timestamp_ms << "," << r.flow_id << "," << r.src_ip << "," << r.dest_ip << ","
            << r.src_port << "," << r.dest_port << "," << to_string(r.protocol) << ","
            << r.bytes_in << "," << r.bytes_out << ",";
        if (r.label.has_value()) out << *r.label;
        out << "\n";
    }
    return out.str();
}

std::string summary_to_string(const ScenarioSummary& s) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "flows=%ld benign=%ld malicious=%ld (%.2f%%) duplicates_removed=%ld", s.total,
                  s.benign, s.malicious, s.malicious_pct, s.duplicates_removed);
    return buf;
}

}  // namespace flowtriage
