#ifndef FLOWTRIAGE_FLOW_HPP
#define FLOWTRIAGE_FLOW_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flowtriage {

enum class Protocol { TCP, UDP, ICMP, OTHER };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

// One network flow event. Timestamps are epoch milliseconds after
// ingestion regardless of the source format.
struct FlowRecord {
    std::int64_t timestamp_ms = 0;
    std::string flow_id;
    std::string src_ip;
    std::string dest_ip;
    int src_port = 0;
    int dest_port = 0;
    Protocol protocol = Protocol::OTHER;
    std::int64_t bytes_in = 0;
    std::int64_t bytes_out = 0;
    std::optional<int> label;  // 1 = malicious, 0 = benign
};

struct FlowDataset {
    std::vector<FlowRecord> records;
    std::string source_name;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// True when records are sorted non-decreasing by timestamp and no two
// records share the dedup key. Used by property tests and as a
// post-ingest sanity gate.
bool satisfies_dataset_invariants(const FlowDataset& d);

}  // namespace flowtriage

#endif  // FLOWTRIAGE_FLOW_HPP
