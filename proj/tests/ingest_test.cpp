#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "flowtriage/errors.hpp"
#include "flowtriage/ingest.hpp"

using namespace flowtriage;

namespace {

const char* kHeader =
    "timestamp,flow_id,src_ip,dest_ip,src_port,dest_port,protocol,bytes_in,bytes_out,label\n";

std::string sample_csv() {
    std::string s = kHeader;
    s += "2024-01-01T00:00:00Z,f0,10.0.0.1,10.0.0.2,443,52344,TCP,1200,300,0\n";
    s += "2024-01-01T00:00:10Z,f1,10.0.0.1,10.0.0.2,443,52345,TCP,1300,350,0\n";
    s += "2024-01-01T00:00:20Z,f2,10.0.0.3,10.0.0.2,22,52346,TCP,8000,9000,1\n";
    s += "2024-01-01T00:00:30Z,f3,10.0.0.3,10.0.0.2,22,52347,TCP,9000,11000,1\n";
    return s;
}

}  // namespace

TEST_CASE("parses a four-row export faithfully") {
    const ParseResult r = parse_flows(sample_csv(), ColumnMapping{});
    REQUIRE(r.dataset.size() == 4);
    CHECK(r.rows_total == 4);
    CHECK(r.malformed.empty());
    const FlowRecord& a = r.dataset.records[0];
    CHECK(a.timestamp_ms == 1704067200000LL);
    CHECK(a.flow_id == "f0");
    CHECK(a.src_ip == "10.0.0.1");
    CHECK(a.dest_ip == "10.0.0.2");
    CHECK(a.src_port == 443);
    CHECK(a.dest_port == 52344);
    CHECK(a.protocol == Protocol::TCP);
    CHECK(a.bytes_in == 1200);
    CHECK(a.bytes_out == 300);
    REQUIRE(a.label.has_value());
    CHECK(*a.label == 0);
    const FlowRecord& d = r.dataset.records[3];
    CHECK(d.src_port == 22);
    CHECK(d.dest_port == 52347);
    CHECK(d.bytes_out == 11000);
    REQUIRE(d.label.has_value());
    CHECK(*d.label == 1);
}

TEST_CASE("header-only input is rejected") {
    CHECK_THROWS_AS(parse_flows(kHeader, ColumnMapping{}), EmptyInput);
    CHECK_THROWS_AS(parse_flows("", ColumnMapping{}), EmptyInput);
}

TEST_CASE("a missing mapped column is a hard error") {
    const std::string csv =
        "timestamp,src_ip,dest_ip\n2024-01-01T00:00:00Z,a,b\n";
    CHECK_THROWS_AS(parse_flows(csv, ColumnMapping{}), MissingColumn);
}

TEST_CASE("bad rows are quarantined, not dropped silently") {
    std::string csv = kHeader;
    csv += "2024-01-01T00:00:00Z,f0,a,b,443,52344,TCP,abc,300,0\n";  // bytes_in not a number
    csv += "2024-01-01T00:00:10Z,f1,a,b,443,52345,TCP,1300,350,0\n";
    csv += "2024-01-01T00:00:20Z,f2,a,b,99999,52346,TCP,10,10,0\n";  // port out of range
    csv += "2024-01-01T00:00:30Z,f3,a,b,22,52347,TCP,10,10,2\n";     // label not 0/1
    const ParseResult r = parse_flows(csv, ColumnMapping{});
    CHECK(r.rows_total == 4);
    REQUIRE(r.dataset.size() == 1);
    CHECK(r.dataset.records[0].flow_id == "f1");
    REQUIRE(r.malformed.size() == 3);
    // header is line 1, so the first data row is line 2
    CHECK(r.malformed[0].line_number == 2);
    CHECK(r.malformed[1].line_number == 4);
    CHECK(r.malformed[2].line_number == 5);
    for (const MalformedRow& m : r.malformed) CHECK_FALSE(m.reason.empty());
}

TEST_CASE("timestamp formats normalize to the same epoch") {
    // 2024-01-01T00:00:00Z == 1704067200 s == 1704067200000 ms
    CHECK(parse_timestamp_ms("2024-01-01T00:00:00Z") == 1704067200000LL);
    CHECK(parse_timestamp_ms("1704067200") == 1704067200000LL);
    CHECK(parse_timestamp_ms("1704067200000") == 1704067200000LL);
    CHECK(format_timestamp_iso(1704067200000LL) == "2024-01-01T00:00:00Z");
    CHECK(parse_timestamp_ms(format_timestamp_iso(1704070923000LL)) == 1704070923000LL);
    CHECK_THROWS_AS(parse_timestamp_ms("yesterday"), Error);
}

TEST_CASE("epoch-seconds exports parse column-wide") {
    std::string csv = kHeader;
    csv += "1704067200,f0,a,b,1,2,UDP,1,1,0\n";
    csv += "1704067260,f1,a,b,1,2,UDP,1,1,0\n";
    const ParseResult r = parse_flows(csv, ColumnMapping{});
    REQUIRE(r.dataset.size() == 2);
    CHECK(r.dataset.records[1].timestamp_ms - r.dataset.records[0].timestamp_ms == 60000);
}

TEST_CASE("unlabeled sources leave label unset") {
    ColumnMapping schema;
    schema.label = "";
    schema.flow_id = "";
    std::string csv = "timestamp,src_ip,dest_ip,src_port,dest_port,protocol,bytes_in,bytes_out\n";
    csv += "1704067200,a,b,1,2,TCP,1,1\n";
    const ParseResult r = parse_flows(csv, schema);
    REQUIRE(r.dataset.size() == 1);
    CHECK_FALSE(r.dataset.records[0].label.has_value());
    CHECK(r.dataset.records[0].flow_id == "row_1");
}

namespace {

FlowRecord rec(std::int64_t ts, const std::string& src, int sport, int dport,
               std::int64_t bin = 10, std::int64_t bout = 10, int label = 0) {
    FlowRecord f;
    f.timestamp_ms = ts;
    f.flow_id = "x";
    f.src_ip = src;
    f.dest_ip = "10.0.0.9";
    f.src_port = sport;
    f.dest_port = dport;
    f.protocol = Protocol::TCP;
    f.bytes_in = bin;
    f.bytes_out = bout;
    f.label = label;
    return f;
}

}  // namespace

TEST_CASE("dedupe keeps the first record per key and sorts by time") {
    FlowDataset d;
    d.records = {rec(30, "a", 1, 2), rec(10, "b", 1, 2), rec(20, "c", 1, 2)};
    const DedupeResult r = dedupe_and_sort(d);
    CHECK(r.duplicates_removed == 0);
    REQUIRE(r.dataset.size() == 3);
    CHECK(r.dataset.records[0].timestamp_ms == 10);
    CHECK(r.dataset.records[1].timestamp_ms == 20);
    CHECK(r.dataset.records[2].timestamp_ms == 30);
    CHECK(satisfies_dataset_invariants(r.dataset));

    // same five-tuple with different byte counters is still a duplicate
    FlowDataset dup;
    dup.records = {rec(10, "a", 1, 2, 100, 100), rec(10, "a", 1, 2, 999, 999)};
    const DedupeResult r2 = dedupe_and_sort(dup);
    CHECK(r2.duplicates_removed == 1);
    REQUIRE(r2.dataset.size() == 1);
    CHECK(r2.dataset.records[0].bytes_in == 100);

    // idempotent on clean data
    const DedupeResult r3 = dedupe_and_sort(r.dataset);
    CHECK(r3.duplicates_removed == 0);
    CHECK(r3.dataset.size() == r.dataset.size());
}

TEST_CASE("training split takes the earliest ceil(alpha*N) records") {
    FlowDataset d;
    for (int i = 0; i < 100; ++i) d.records.push_back(rec(i * 1000, "a", 1, i));
    const TrainSplit s = split_train_period(d, 0.25);
    CHECK(s.train.size() == 25);
    CHECK(s.all.size() == 100);
    CHECK(s.train.records.back().timestamp_ms == 24000);

    FlowDataset small;
    for (int i = 0; i < 4; ++i) small.records.push_back(rec(i, "a", 1, i));
    CHECK(split_train_period(small, 0.5).train.size() == 2);   // ceil(2.0)
    CHECK(split_train_period(small, 0.26).train.size() == 2);  // ceil(1.04)
    CHECK(split_train_period(small, 0.75).train.size() == 3);  // ceil(3.0)
    CHECK(split_train_period(small, 0.01).train.size() == 1);  // ceil(0.04)

    CHECK_THROWS_AS(split_train_period(d, 0.0), BadFraction);
    CHECK_THROWS_AS(split_train_period(d, 1.0), BadFraction);
    CHECK_THROWS_AS(split_train_period(d, -0.1), BadFraction);
}

TEST_CASE("benign filter keeps exactly the label-0 records") {
    FlowDataset d;
    d.records = {rec(0, "a", 1, 1, 10, 10, 0), rec(1, "a", 1, 2, 10, 10, 1),
                 rec(2, "a", 1, 3, 10, 10, 0)};
    const FlowDataset benign = filter_benign(d);
    REQUIRE(benign.size() == 2);
    CHECK(benign.records[0].dest_port == 1);
    CHECK(benign.records[1].dest_port == 3);

    FlowDataset all_bad;
    all_bad.records = {rec(0, "a", 1, 1, 10, 10, 1)};
    CHECK(filter_benign(all_bad).empty());

    FlowDataset unlabeled;
    unlabeled.records = {rec(0, "a", 1, 1)};
    unlabeled.records[0].label.reset();
    CHECK_THROWS_AS(filter_benign(unlabeled), UnlabeledRecord);
}
