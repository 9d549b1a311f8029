#include "flowtriage/flow.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace flowtriage {

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::TCP: return "TCP";
        case Protocol::UDP: return "UDP";
        case Protocol::ICMP: return "ICMP";
        default: return "OTHER";
    }
}

Protocol protocol_from_string(const std::string& s) {
    std::string up;
    up.reserve(s.size());
    for (char c : s) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "TCP" || up == "6") return Protocol::TCP;
    if (up == "UDP" || up == "17") return Protocol::UDP;
    if (up == "ICMP" || up == "1") return Protocol::ICMP;
    return Protocol::OTHER;
}

bool satisfies_dataset_invariants(const FlowDataset& d) {
    using Key = std::tuple<std::int64_t, std::string, std::string, int, int>;
    std::set<Key> seen;
    std::int64_t prev_ts = INT64_MIN;
    for (const auto& r : d.records) {
        if (r.timestamp_ms < prev_ts) return false;
        prev_ts = r.timestamp_ms;
        Key key{r.timestamp_ms, r.src_ip, r.dest_ip, r.src_port, r.dest_port};
        if (!seen.insert(key).second) return false;
    }
    return true;
}

}  // namespace flowtriage
