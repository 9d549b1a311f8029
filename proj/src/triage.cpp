#include "flowtriage/triage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flowtriage/csv.hpp"
#include "flowtriage/errors.hpp"

namespace flowtriage {

using nlohmann::json;

std::vector<PriorityItem> compute_priorities(const std::vector<int>& actions,
                                             const std::vector<ScoredWindow>& scores,
                                             const std::vector<Window>& windows) {
    if (actions.size() != scores.size() || actions.size() != windows.size()) {
        throw LengthMismatch("actions, scores, and windows must align");
    }
    std::vector<PriorityItem> items;
    items.reserve(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        PriorityItem item;
        item.window_index = scores[i].index;
        item.action = actions[i];
        item.aad_score = scores[i].aad_score;
        item.priority = actions[i] == 1 ? scores[i].aad_score : 0.0;
        item.metadata = scores[i].metadata;
        item.flows = windows[i].flows;
        items.push_back(std::move(item));
    }
    std::stable_sort(items.begin(), items.end(), [](const PriorityItem& a, const PriorityItem& b) {
        return a.priority > b.priority;
    });
    return items;
}

Selection select_for_analysis(const std::vector<PriorityItem>& items, double threshold) {
    if (threshold < 0.0) throw ValidationError("triage threshold must be >= 0");
    Selection sel;
    for (const auto& item : items) {
        if (item.priority > threshold) sel.items.push_back(item);
    }
    sel.reduction_pct =
        items.empty() ? 0.0
                      : 100.0 * static_cast<double>(items.size() - sel.items.size()) /
                            static_cast<double>(items.size());
    return sel;
}

double percentile_threshold(const std::vector<PriorityItem>& items, double percentile) {
    if (percentile < 0.0 || percentile > 100.0) {
        throw ValidationError("percentile must lie in [0, 100]");
    }
    if (items.empty()) return 0.0;
    std::vector<double> values;
    values.reserve(items.size());
    for (const auto& item : items) values.push_back(item.priority);
    std::sort(values.begin(), values.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(percentile / 100.0 * static_cast<double>(values.size())));
    return values[rank == 0 ? 0 : rank - 1];
}

std::string PseudonymMap::token_for(const std::string& ip) {
    const auto it = fwd_.find(ip);
    if (it != fwd_.end()) return it->second;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "HOST_%04zu", order_.size());
    fwd_[ip] = buf;
    rev_[buf] = ip;
    order_.push_back(ip);
    return buf;
}

std::optional<std::string> PseudonymMap::peek_token(const std::string& ip) const {
    const auto it = fwd_.find(ip);
    if (it == fwd_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> PseudonymMap::real_ip(const std::string& token) const {
    const auto it = rev_.find(token);
    if (it == rev_.end()) return std::nullopt;
    return it->second;
}

std::string PseudonymMap::to_csv() const {
    std::ostringstream out;
    out << "real_ip,token\n";
    for (const auto& ip : order_) out << csv::escape_field(ip) << "," << fwd_.at(ip) << "\n";
    return out.str();
}

PseudonymMap PseudonymMap::from_csv(const std::string& text) {
    PseudonymMap map;
    const auto lines = csv::split_lines(text);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = csv::split_record(lines[i]);
        if (fields.size() != 2) throw ValidationError("pseudonym map rows need two columns");
        map.fwd_[fields[0]] = fields[1];
        map.rev_[fields[1]] = fields[0];
        map.order_.push_back(fields[0]);
    }
    return map;
}

std::vector<FlowRecord> pseudonymize(const std::vector<FlowRecord>& flows, PseudonymMap& map) {
    std::vector<FlowRecord> out = flows;
    for (auto& f : out) {
        f.src_ip = map.token_for(f.src_ip);
        f.dest_ip = map.token_for(f.dest_ip);
    }
    return out;
}

std::string resolve_spl(const std::string& query, const PseudonymMap& map) {
    static const std::regex token_re("HOST_[0-9]{4}");
    std::string out;
    auto begin = std::sregex_iterator(query.begin(), query.end(), token_re);
    auto end = std::sregex_iterator();
    std::size_t last = 0;
    for (auto it = begin; it != end; ++it) {
        const auto& m = *it;
        const auto ip = map.real_ip(m.str());
        if (!ip.has_value()) throw UnknownToken(m.str());
        out.append(query, last, static_cast<std::size_t>(m.position()) - last);
        out.append(*ip);
        last = static_cast<std::size_t>(m.position() + m.length());
    }
    out.append(query, last, query.size() - last);
    return out;
}

std::string generate_spl(const WindowMetadata& meta, SplTemplate t) {
    std::ostringstream out;
    switch (t) {
        case SplTemplate::BurstTransaction:
            out << "search index=netflow src_ip=" << meta.src_ip
                << " | transaction src_ip dest_ip maxpause=5s"
                << " | where eventcount > 10"
                << " | table _time src_ip dest_ip dest_port eventcount";
            break;
        case SplTemplate::HostFilter:
            out << "search index=netflow src_ip=" << meta.src_ip
                << " | stats count by dest_ip dest_port | sort -count";
            break;
    }
    return out.str();
}

namespace {

constexpr int kManyPortsThreshold = 10;   // distinct dest ports from one source
constexpr int kHighEventRate = 100;       // events per window on a service port

}  // namespace

MitreResult map_mitre(const WindowMetadata& meta, const std::vector<FlowRecord>& flows) {
    std::map<std::string, std::set<int>> ports_by_src;
    std::map<int, int> port_counts;
    bool metadata_endpoint = false;
    for (const auto& f : flows) {
        ports_by_src[f.src_ip].insert(f.dest_port);
        port_counts[f.dest_port] += 1;
        if (f.dest_ip == "169.254.169.254") metadata_endpoint = true;
    }
    for (const auto& [src, ports] : ports_by_src) {
        if (static_cast<int>(ports.size()) >= kManyPortsThreshold) {
            return {"T1046", "Network Service Discovery", false};
        }
    }
    int dominant_port = meta.dest_port;
    int dominant_count = 0;
    for (const auto& [port, count] : port_counts) {
        if (count > dominant_count) {
            dominant_port = port;
            dominant_count = count;
        }
    }
    if ((dominant_port == 53 || dominant_port == 80 || dominant_port == 443) &&
        dominant_count >= kHighEventRate) {
        return {"T1071", "Application Layer Protocol", false};
    }
    if (metadata_endpoint) {
        return {"T1552.005", "Cloud Instance Metadata API", false};
    }
    return {"T1071", "Application Layer Protocol", true};
}

TriageOutput build_reports(const std::vector<PriorityItem>& selected, AnalystBackend& backend,
                           PseudonymMap& map, double threshold, bool reveal_real_ips) {
    std::vector<double> priorities;
    for (const auto& item : selected) priorities.push_back(item.priority);
    std::sort(priorities.begin(), priorities.end());
    const double median =
        priorities.empty()
            ? 0.0
            : (priorities.size() % 2 == 1
                   ? priorities[priorities.size() / 2]
                   : 0.5 * (priorities[priorities.size() / 2 - 1] +
                            priorities[priorities.size() / 2]));

    TriageOutput out;
    std::ostringstream master;
    master << "Flow ID,Source IP,Destination IP,Priority Score,MITRE ID,Agent Answer\n";

    for (const auto& item : selected) {
        const MitreResult mitre = map_mitre(item.metadata, item.flows);
        const std::vector<FlowRecord> anon = pseudonymize(item.flows, map);
        for (std::size_t i = 0; i < item.flows.size(); ++i) {
            const FlowRecord& real = item.flows[i];
            const FlowRecord& masked = anon[i];

            AnalystRequest req;
            req.flow_id = real.flow_id;
            req.src = masked.src_ip;
            req.dest = masked.dest_ip;
            req.dest_port = real.dest_port;
            req.priority = item.priority;
            req.aad_score = item.aad_score;
            req.threshold = threshold;
            req.median_priority = median;
            req.mitre = mitre;
            const AnalystVerdict verdict = backend.analyze(req);

            TriageReport r;
            r.flow_id = real.flow_id;
            r.src = reveal_real_ips ? real.src_ip : masked.src_ip;
            r.dest = reveal_real_ips ? real.dest_ip : masked.dest_ip;
            r.dest_port = real.dest_port;
            r.window_index = item.window_index;
            r.priority = item.priority;
            r.aad_score = item.aad_score;
            r.risk_summary = verdict.risk_summary;
            r.mitre_id = verdict.mitre_id;
            r.mitre_name = verdict.mitre_name;
            r.remediation = verdict.remediation;

            WindowMetadata masked_meta = item.metadata;
            masked_meta.src_ip = map.token_for(item.metadata.src_ip);
            masked_meta.dest_ip = map.token_for(item.metadata.dest_ip);
            r.spl_burst = generate_spl(masked_meta, SplTemplate::BurstTransaction);
            r.spl_host = generate_spl(masked_meta, SplTemplate::HostFilter);
            r.backend_id = verdict.backend_id;

            master << csv::escape_field(r.flow_id) << "," << csv::escape_field(r.src) << ","
                   << csv::escape_field(r.dest) << "," << r.priority << "," << r.mitre_id << ","
                   << csv::escape_field(r.risk_summary) << "\n";
            out.reports.push_back(std::move(r));
        }
    }
    out.master_csv = master.str();
    return out;
}

std::string report_to_json(const TriageReport& r) {
    json doc;
    doc["flow_id"] = r.flow_id;
    doc["src"] = r.src;
    doc["dest"] = r.dest;
    doc["dest_port"] = r.dest_port;
    doc["window_index"] = r.window_index;
    doc["priority"] = r.priority;
    doc["aad_score"] = r.aad_score;
    doc["risk_summary"] = r.risk_summary;
    doc["mitre"] = {{"id", r.mitre_id}, {"name", r.mitre_name}};
    doc["remediation"] = r.remediation;
    doc["spl"] = {{"burst_transaction", r.spl_burst}, {"host_filter", r.spl_host}};
    doc["backend"] = r.backend_id;
    return doc.dump(2);
}

}  // namespace flowtriage
