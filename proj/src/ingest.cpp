#include "flowtriage/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

#include "flowtriage/csv.hpp"
#include "flowtriage/errors.hpp"

namespace flowtriage {
namespace {

bool is_numeric(const std::string& s) {
    if (s.empty()) return false;
    bool digit_seen = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digit_seen = true;
        } else if (c == '.' || (c == '-' && i == 0) || (c == '+' && i == 0)) {
            continue;
        } else {
            return false;
        }
    }
    return digit_seen;
}

// days since 1970-01-01 for a civil date (valid for all relevant years)
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

std::int64_t parse_iso8601_ms(const std::string& s) {
    // YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|±hh:mm]
    int y, mo, d, h, mi;
    double sec;
    char sep;
    if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d, &sep, &h, &mi, &sec) != 7 ||
        (sep != 'T' && sep != ' ' && sep != 't')) {
        throw Error("unparseable ISO-8601 timestamp: " + s);
    }
    std::int64_t offset_min = 0;
    const std::size_t tz = s.find_first_of("Zz+", 11);
    if (tz != std::string::npos && (s[tz] == '+')) {
        int oh = 0, om = 0;
        if (std::sscanf(s.c_str() + tz + 1, "%d:%d", &oh, &om) >= 1) offset_min = oh * 60 + om;
    } else {
        // a '-' after the time part is a negative offset
        const std::size_t tpos = s.find(':');
        const std::size_t neg = (tpos == std::string::npos) ? std::string::npos : s.find('-', tpos);
        if (neg != std::string::npos) {
            int oh = 0, om = 0;
            if (std::sscanf(s.c_str() + neg + 1, "%d:%d", &oh, &om) >= 1) offset_min = -(oh * 60 + om);
        }
    }
    const std::int64_t days = days_from_civil(y, mo, d);
    const double ms = (static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec) * 1000.0;
    return static_cast<std::int64_t>(std::llround(ms)) - offset_min * 60'000;
}

enum class TsFormat { Unknown, EpochSeconds, EpochMillis, Iso8601 };

TsFormat detect_format(const std::string& s) {
    if (is_numeric(s)) {
        const double v = std::strtod(s.c_str(), nullptr);
        // 1e12 seconds is year 33658; values that large are milliseconds
        return std::fabs(v) >= 1e12 ? TsFormat::EpochMillis : TsFormat::EpochSeconds;
    }
    return TsFormat::Iso8601;
}

std::int64_t parse_ts(const std::string& s, TsFormat fmt) {
    switch (fmt) {
        case TsFormat::EpochSeconds:
            return static_cast<std::int64_t>(std::llround(std::strtod(s.c_str(), nullptr) * 1000.0));
        case TsFormat::EpochMillis:
            return static_cast<std::int64_t>(std::llround(std::strtod(s.c_str(), nullptr)));
        default:
            return parse_iso8601_ms(s);
    }
}

struct ColumnIndex {
    int timestamp = -1, flow_id = -1, src_ip = -1, dest_ip = -1;
    int src_port = -1, dest_port = -1, protocol = -1;
    int bytes_in = -1, bytes_out = -1, label = -1;
};

int require_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    throw MissingColumn(name);
}

int optional_column(const std::vector<std::string>& header, const std::string& name) {
    if (name.empty()) return -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

long parse_long(const std::string& s, const char* what) {
    long v = 0;
    const char* begin = s.c_str();
    const char* end = begin + s.size();
    auto [p, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || p != end) throw Error(std::string("bad ") + what + ": '" + s + "'");
    return v;
}

}  // namespace

std::int64_t parse_timestamp_ms(const std::string& text) {
    return parse_ts(text, detect_format(text));
}

std::string format_timestamp_iso(std::int64_t epoch_ms) {
    std::int64_t days = epoch_ms / 86'400'000;
    std::int64_t rem = epoch_ms % 86'400'000;
    if (rem < 0) {
        rem += 86'400'000;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    const int h = static_cast<int>(rem / 3'600'000);
    const int mi = static_cast<int>(rem / 60'000 % 60);
    const int s = static_cast<int>(rem / 1000 % 60);
    const int ms = static_cast<int>(rem % 1000);
    char buf[40];
    if (ms == 0) {
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d, h, mi, s);
    } else {
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", y, m, d, h, mi,
                      s, ms);
    }
    return buf;
}

ParseResult parse_flows(const std::string& csv_text, const ColumnMapping& schema,
                        const std::string& source_name) {
    const auto lines = csv::split_lines(csv_text);
    if (lines.empty()) throw EmptyInput("no header row");
    const auto header = csv::split_record(lines[0]);

    ColumnIndex idx;
    idx.timestamp = require_column(header, schema.timestamp);
    idx.src_ip = require_column(header, schema.src_ip);
    idx.dest_ip = require_column(header, schema.dest_ip);
    idx.src_port = require_column(header, schema.src_port);
    idx.dest_port = require_column(header, schema.dest_port);
    idx.protocol = require_column(header, schema.protocol);
    idx.bytes_in = require_column(header, schema.bytes_in);
    idx.bytes_out = require_column(header, schema.bytes_out);
    idx.flow_id = optional_column(header, schema.flow_id);
    idx.label = optional_column(header, schema.label);

    if (lines.size() <= 1) throw EmptyInput("header only, zero data rows");

    ParseResult result;
    result.dataset.source_name = source_name;
    TsFormat ts_format = TsFormat::Unknown;

    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        ++result.rows_total;
        const auto fields = csv::split_record(lines[li]);
        try {
            auto field = [&](int col) -> const std::string& {
                if (col < 0 || static_cast<std::size_t>(col) >= fields.size())
                    throw Error("row has too few fields");
                return fields[static_cast<std::size_t>(col)];
            };

            FlowRecord rec;
            if (ts_format == TsFormat::Unknown) ts_format = detect_format(field(idx.timestamp));
            rec.timestamp_ms = parse_ts(field(idx.timestamp), ts_format);
            rec.src_ip = field(idx.src_ip);
            rec.dest_ip = field(idx.dest_ip);

            const long sp = parse_long(field(idx.src_port), "src_port");
            const long dp = parse_long(field(idx.dest_port), "dest_port");
            if (sp < 0 || sp > 65535) throw Error("src_port out of [0,65535]: " + std::to_string(sp));
            if (dp < 0 || dp > 65535) throw Error("dest_port out of [0,65535]: " + std::to_string(dp));
            rec.src_port = static_cast<int>(sp);
            rec.dest_port = static_cast<int>(dp);

            rec.protocol = protocol_from_string(field(idx.protocol));
            rec.bytes_in = parse_long(field(idx.bytes_in), "bytes_in");
            rec.bytes_out = parse_long(field(idx.bytes_out), "bytes_out");
            if (rec.bytes_in < 0 || rec.bytes_out < 0) throw Error("negative byte count");

            rec.flow_id = (idx.flow_id >= 0) ? field(idx.flow_id)
                                             : "row_" + std::to_string(result.rows_total);
            if (idx.label >= 0) {
                const std::string& lab = field(idx.label);
                if (!lab.empty()) {
                    if (lab == "0") rec.label = 0;
                    else if (lab == "1") rec.label = 1;
                    else throw Error("label must be 0 or 1, got '" + lab + "'");
                }
            }
            result.dataset.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            result.malformed.push_back({li + 1, e.what()});
        }
    }
    return result;
}

DedupeResult dedupe_and_sort(const FlowDataset& d) {
    DedupeResult out;
    out.dataset.source_name = d.source_name;
    out.dataset.records = d.records;
    std::stable_sort(out.dataset.records.begin(), out.dataset.records.end(),
                     [](const FlowRecord& a, const FlowRecord& b) {
                         return a.timestamp_ms < b.timestamp_ms;
                     });

    using Key = std::tuple<std::int64_t, std::string, std::string, int, int>;
    std::set<Key> seen;
    std::vector<FlowRecord> kept;
    kept.reserve(out.dataset.records.size());
    for (auto& r : out.dataset.records) {
        Key key{r.timestamp_ms, r.src_ip, r.dest_ip, r.src_port, r.dest_port};
        if (seen.insert(key).second) {
            kept.push_back(std::move(r));
        } else {
            ++out.duplicates_removed;
        }
    }
    out.dataset.records = std::move(kept);
    return out;
}

TrainSplit split_train_period(const FlowDataset& d, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw BadFraction(alpha);
    const std::size_t n = d.records.size();
    const std::size_t n_train =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n))));
    TrainSplit split;
    split.all = d;
    split.train.source_name = d.source_name;
    split.train.records.assign(d.records.begin(), d.records.begin() + static_cast<long>(n_train));
    return split;
}

FlowDataset filter_benign(const FlowDataset& train) {
    FlowDataset out;
    out.source_name = train.source_name;
    for (const auto& r : train.records) {
        if (!r.label.has_value()) throw UnlabeledRecord(r.flow_id);
        if (*r.label == 0) out.records.push_back(r);
    }
    return out;
}

}  // namespace flowtriage
