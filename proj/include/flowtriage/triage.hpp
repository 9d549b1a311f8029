#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowtriage/aad.hpp"
#include "flowtriage/flow.hpp"
#include "flowtriage/window.hpp"

namespace flowtriage {

struct PriorityItem {
    int window_index = 0;
    int action = 0;
    double aad_score = 0.0;
    double priority = 0.0;  // action * aad_score
    WindowMetadata metadata;
    std::vector<FlowRecord> flows;
};

// actions, scores, and windows must align positionally
std::vector<PriorityItem> compute_priorities(const std::vector<int>& actions,
                                             const std::vector<ScoredWindow>& scores,
                                             const std::vector<Window>& windows);

struct Selection {
    std::vector<PriorityItem> items;
    double reduction_pct = 0.0;
};

// keeps items with priority strictly greater than the threshold
Selection select_for_analysis(const std::vector<PriorityItem>& items, double threshold);

// nearest-rank percentile of the priority values, for top-p% style gating
double percentile_threshold(const std::vector<PriorityItem>& items, double percentile);

// Stable real-IP <-> token table; tokens allocated in first-seen order.
class PseudonymMap {
  public:
    std::string token_for(const std::string& ip);  // allocates on first sight
    std::optional<std::string> peek_token(const std::string& ip) const;
    std::optional<std::string> real_ip(const std::string& token) const;
    std::size_t size() const { return fwd_.size(); }

    std::string to_csv() const;
    static PseudonymMap from_csv(const std::string& text);

  private:
    std::map<std::string, std::string> fwd_;  // ip -> token
    std::map<std::string, std::string> rev_;  // token -> ip
    std::vector<std::string> order_;          // ips in allocation order
};

std::vector<FlowRecord> pseudonymize(const std::vector<FlowRecord>& flows, PseudonymMap& map);

// replaces every HOST_xxxx token with its real IP
std::string resolve_spl(const std::string& query, const PseudonymMap& map);

enum class SplTemplate { BurstTransaction, HostFilter };

// meta must already carry pseudonymized endpoints
std::string generate_spl(const WindowMetadata& meta, SplTemplate t);

struct MitreResult {
    std::string id;
    std::string name;
    bool low_confidence = false;
};

MitreResult map_mitre(const WindowMetadata& meta, const std::vector<FlowRecord>& flows);

struct AnalystRequest {
    std::string flow_id;
    std::string src;  // pseudonymized unless reports reveal real IPs
    std::string dest;
    int dest_port = 0;
    double priority = 0.0;
    double aad_score = 0.0;
    double threshold = 5.0;
    double median_priority = 0.0;
    MitreResult mitre;
};

struct AnalystVerdict {
    std::string risk_summary;
    std::string mitre_id;
    std::string mitre_name;
    std::string remediation;
    std::string backend_id;
};

class AnalystBackend {
  public:
    virtual ~AnalystBackend() = default;
    virtual AnalystVerdict analyze(const AnalystRequest& req) = 0;
    virtual std::string id() const = 0;
};

// Pure template renderer, severity-banded on priority magnitude.
class StubAnalyst : public AnalystBackend {
  public:
    AnalystVerdict analyze(const AnalystRequest& req) override;
    std::string id() const override { return "stub"; }
};

struct BackendConfig {
    std::string url;    // empty -> stub
    std::string key;    // bearer credential, from environment
    std::string model = "gpt-4o-mini";
    int timeout_s = 30;
};

// Chat-completion client; throws BackendUnavailable on transport or
// protocol failure.
class HttpAnalyst : public AnalystBackend {
  public:
    explicit HttpAnalyst(BackendConfig cfg);
    AnalystVerdict analyze(const AnalystRequest& req) override;
    std::string id() const override { return "http:" + cfg_.model; }

  private:
    BackendConfig cfg_;
};

// HttpAnalyst when a URL is configured, degrading to the stub on failure;
// otherwise the stub directly.
std::unique_ptr<AnalystBackend> make_backend(const BackendConfig& cfg);

struct TriageReport {
    std::string flow_id;
    std::string src;
    std::string dest;
    int dest_port = 0;
    int window_index = 0;
    double priority = 0.0;
    double aad_score = 0.0;
    std::string risk_summary;
    std::string mitre_id;
    std::string mitre_name;
    std::string remediation;
    std::string spl_burst;
    std::string spl_host;
    std::string backend_id;
};

struct TriageOutput {
    std::vector<TriageReport> reports;
    std::string master_csv;  // Flow ID, Source IP, Destination IP, Priority Score, MITRE ID, Agent Answer
};

// Expands each selected window into per-flow reports. Endpoints are
// pseudonymized before the backend sees them; reveal_real_ips renders the
// local artifacts with real addresses (stub backend only).
TriageOutput build_reports(const std::vector<PriorityItem>& selected, AnalystBackend& backend,
                           PseudonymMap& map, double threshold, bool reveal_real_ips = false);

std::string report_to_json(const TriageReport& r);

}  // namespace flowtriage
