#ifndef FLOWTRIAGE_INGEST_HPP
#define FLOWTRIAGE_INGEST_HPP

#include <string>
#include <vector>

#include "flowtriage/flow.hpp"

namespace flowtriage {

// Maps FlowRecord fields to header names of a concrete export. The BOTS
// export and the Suricata export name their columns differently, so the
// mapping is configuration.
struct ColumnMapping {
    std::string timestamp = "timestamp";
    std::string flow_id = "flow_id";  // empty -> synthesize row_<n>
    std::string src_ip = "src_ip";
    std::string dest_ip = "dest_ip";
    std::string src_port = "src_port";
    std::string dest_port = "dest_port";
    std::string protocol = "protocol";
    std::string bytes_in = "bytes_in";
    std::string bytes_out = "bytes_out";
    std::string label = "label";  // empty -> no labels in this source
};

struct MalformedRow {
    std::size_t line_number = 0;  // 1-based, header is line 1
    std::string reason;
};

struct ParseResult {
    FlowDataset dataset;
    std::size_t rows_total = 0;
    std::vector<MalformedRow> malformed;
};

struct DedupeResult {
    FlowDataset dataset;
    std::size_t duplicates_removed = 0;
};

// Parse a CSV export. Timestamps may be ISO-8601 or epoch seconds
// (epoch milliseconds are also recognized by magnitude); the format is
// detected from the first well-formed row and then applied to the column.
// Malformed rows are collected in the result, never silently dropped.
// Throws MissingColumn / EmptyInput.
ParseResult parse_flows(const std::string& csv_text, const ColumnMapping& schema,
                        const std::string& source_name = "csv");

// Stable-sort by timestamp and drop later records that repeat the dedup
// key (timestamp, src_ip, dest_ip, src_port, dest_port). Byte counters are
// deliberately not part of the key: SIEM re-ingestion duplicates tend to
// differ only in counters, and the first occurrence is kept.
DedupeResult dedupe_and_sort(const FlowDataset& d);

struct TrainSplit {
    FlowDataset train;  // earliest ceil(alpha * N) records
    FlowDataset all;
};

// Temporal split for benign-only model fitting. Throws BadFraction.
TrainSplit split_train_period(const FlowDataset& d, double alpha);

// Keep exactly the label-0 records. Every record must carry a label;
// throws UnlabeledRecord otherwise. An all-malicious training period
// yields an empty dataset, which callers must treat as fatal before
// anomaly-model training.
FlowDataset filter_benign(const FlowDataset& train);

// Timestamp parsing helpers (exposed for tests).
// Returns epoch ms; throws Error on unparseable input.
std::int64_t parse_timestamp_ms(const std::string& text);

std::string format_timestamp_iso(std::int64_t epoch_ms);

}  // namespace flowtriage

#endif  // FLOWTRIAGE_INGEST_HPP
