#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flowtriage/errors.hpp"
#include "flowtriage/triage.hpp"

// keep last: pulls in resolv.h, whose `res` macro mangles anything
// included after it
#include "httplib.h"

namespace flowtriage {

using nlohmann::json;

namespace {

std::string remediation_for(const MitreResult& mitre) {
    if (mitre.id == "T1046") {
        return "Block the source host at the perimeter, audit exposed services on the swept "
               "ports, and review firewall rules for unnecessary open ports.";
    }
    if (mitre.id == "T1552.005") {
        return "Rotate cloud credentials immediately, enforce IMDSv2 (session-bound metadata "
               "access), and restrict egress to 169.254.169.254.";
    }
    return "Capture application-layer traffic for the flagged host, apply rate limiting, and "
           "verify the destination service against an allowlist.";
}

}  // namespace

AnalystVerdict StubAnalyst::analyze(const AnalystRequest& req) {
    std::string band;
    if (req.median_priority > 0.0 && req.priority > 100.0 * req.median_priority) {
        band = "Critical";
    } else if (req.priority > req.threshold) {
        band = "Malicious/Suspicious";
    } else {
        band = "Monitor";
    }

    std::ostringstream summary;
    summary << band << ": " << req.mitre.name << " (" << req.mitre.id << ") indicators from "
            << req.src << " to " << req.dest << ":" << req.dest_port << "; priority "
            << req.priority << ", anomaly score " << req.aad_score;
    if (req.mitre.low_confidence) summary << " (low-confidence mapping)";

    AnalystVerdict v;
    v.risk_summary = summary.str();
    v.mitre_id = req.mitre.id;
    v.mitre_name = req.mitre.name;
    v.remediation = remediation_for(req.mitre);
    v.backend_id = id();
    return v;
}

HttpAnalyst::HttpAnalyst(BackendConfig cfg) : cfg_(std::move(cfg)) {}

AnalystVerdict HttpAnalyst::analyze(const AnalystRequest& req) {
    if (cfg_.url.rfind("https://", 0) == 0) {
        throw BackendUnavailable("TLS endpoints are not supported in this build");
    }
    const std::size_t scheme = cfg_.url.find("://");
    const std::size_t path_at =
        cfg_.url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    const std::string base =
        path_at == std::string::npos ? cfg_.url : cfg_.url.substr(0, path_at);
    const std::string path =
        path_at == std::string::npos ? "/v1/chat/completions" : cfg_.url.substr(path_at);

    std::ostringstream user;
    user << "Anomalous flow " << req.flow_id << ": " << req.src << " -> " << req.dest << ":"
         << req.dest_port << ". Triage priority " << req.priority << ", anomaly score "
         << req.aad_score << ". Rule-based mapping: " << req.mitre.id << " (" << req.mitre.name
         << "). Provide a one-line verdict and remediation guidance.";

    json body;
    body["model"] = cfg_.model;
    body["messages"] = json::array(
        {{{"role", "system"},
          {"content",
           "Role: Senior SOC Triage Analyst. Assess anomalous network flows and reply with a "
           "concise verdict, the MITRE ATT&CK technique, and remediation guidance."}},
         {{"role", "user"}, {"content", user.str()}}});

    httplib::Client client(base);
    client.set_connection_timeout(cfg_.timeout_s, 0);
    client.set_read_timeout(cfg_.timeout_s, 0);
    httplib::Headers headers;
    if (!cfg_.key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.key);

    const auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) throw BackendUnavailable("no response from " + base);
    if (res->status != 200) {
        throw BackendUnavailable("backend returned status " + std::to_string(res->status));
    }

    std::string content;
    try {
        const json reply = json::parse(res->body);
        content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
        throw BackendUnavailable(std::string("malformed backend reply: ") + e.what());
    }

    AnalystVerdict v;
    v.risk_summary = content;
    v.mitre_id = req.mitre.id;
    v.mitre_name = req.mitre.name;
    v.remediation = remediation_for(req.mitre);
    v.backend_id = id();
    return v;
}

namespace {

class FallbackAnalyst : public AnalystBackend {
  public:
    explicit FallbackAnalyst(std::unique_ptr<AnalystBackend> primary)
        : primary_(std::move(primary)) {}

    AnalystVerdict analyze(const AnalystRequest& req) override {
        try {
            return primary_->analyze(req);
        } catch (const BackendUnavailable& e) {
            if (!warned_) {
                std::fprintf(stderr, "warning: analyst backend unavailable (%s); using stub\n",
                             e.what());
                warned_ = true;
            }
            AnalystVerdict v = stub_.analyze(req);
            v.backend_id = "stub(fallback)";
            return v;
        }
    }

    std::string id() const override { return "fallback(" + primary_->id() + ")"; }

  private:
    std::unique_ptr<AnalystBackend> primary_;
    StubAnalyst stub_;
    bool warned_ = false;
};

}  // namespace

std::unique_ptr<AnalystBackend> make_backend(const BackendConfig& cfg) {
    if (cfg.url.empty()) return std::make_unique<StubAnalyst>();
    return std::make_unique<FallbackAnalyst>(std::make_unique<HttpAnalyst>(cfg));
}

}  // namespace flowtriage
