#include "flowtriage/window.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "flowtriage/errors.hpp"

namespace flowtriage {
namespace {

// modal value; ties broken by first occurrence in the flow list
template <typename T, typename Getter>
T modal_value(const std::vector<FlowRecord>& flows, Getter get) {
    std::map<T, int> counts;
    for (const auto& f : flows) counts[get(f)]++;
    int best = 0;
    for (const auto& [v, c] : counts) best = std::max(best, c);
    for (const auto& f : flows) {
        if (counts[get(f)] == best) return get(f);
    }
    return get(flows.front());
}

// top-k values by count, tie-break lexicographic; OTHER slot appended
std::vector<std::string> top_k(const std::map<std::string, int>& counts, int k) {
    std::vector<std::pair<std::string, int>> items(counts.begin(), counts.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(items.size()) > k) items.resize(static_cast<std::size_t>(k));
    std::vector<std::string> vocab;
    vocab.reserve(items.size());
    for (const auto& [v, c] : items) vocab.push_back(v);
    return vocab;
}

// counts per vocab slot; unseen values land in the trailing OTHER slot
void count_into(Eigen::VectorXd& out, long base, const std::vector<std::string>& vocab,
                const std::vector<FlowRecord>& flows,
                const std::function<std::string(const FlowRecord&)>& get) {
    for (const auto& f : flows) {
        const std::string v = get(f);
        const auto it = std::find(vocab.begin(), vocab.end(), v);
        const long slot = (it == vocab.end()) ? static_cast<long>(vocab.size())
                                              : (it - vocab.begin());
        out[base + slot] += 1.0;
    }
}

}  // namespace

Eigen::VectorXd WindowState::concat() const {
    Eigen::VectorXd v(6 + categorical.size());
    v.head<6>() = numeric;
    v.tail(categorical.size()) = categorical;
    return v;
}

std::vector<Window> partition_windows(const FlowDataset& d, std::int64_t delta_ms) {
    if (delta_ms <= 0) throw ValidationError("window duration must be positive");
    std::vector<Window> windows;
    if (d.records.empty()) return windows;

    const std::int64_t t0 = d.records.front().timestamp_ms;
    std::map<std::int64_t, std::vector<FlowRecord>> buckets;
    for (const auto& r : d.records) {
        buckets[(r.timestamp_ms - t0) / delta_ms].push_back(r);
    }
    int idx = 0;
    for (auto& [bucket, flows] : buckets) {
        Window w;
        w.index = idx++;
        w.start_ms = t0 + bucket * delta_ms;
        w.end_ms = w.start_ms + delta_ms;
        w.flows = std::move(flows);
        for (const auto& f : w.flows) {
            if (f.label.has_value() && *f.label == 1) w.label = 1;
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

Eigen::Matrix<double, 6, 1> aggregate_numeric(const Window& w) {
    if (w.flows.empty()) throw EmptyWindow(w.index);
    double sp_sum = 0, sp_max = 0, dp_sum = 0, dp_max = 0, bi_sum = 0, bo_max = 0;
    for (const auto& f : w.flows) {
        sp_sum += f.src_port;
        sp_max = std::max(sp_max, static_cast<double>(f.src_port));
        dp_sum += f.dest_port;
        dp_max = std::max(dp_max, static_cast<double>(f.dest_port));
        bi_sum += static_cast<double>(f.bytes_in);
        bo_max = std::max(bo_max, static_cast<double>(f.bytes_out));
    }
    const double n = static_cast<double>(w.flows.size());
    Eigen::Matrix<double, 6, 1> v;
    v << sp_sum / n, sp_max, dp_sum / n, dp_max, bi_sum / n, bo_max;
    return v;
}

CategoricalVocab build_vocab(const std::vector<Window>& train_windows, int k) {
    if (k < 1) throw ValidationError("vocab size must be >= 1");
    std::map<std::string, int> src, dst, proto;
    for (const auto& w : train_windows) {
        for (const auto& f : w.flows) {
            src[f.src_ip]++;
            dst[f.dest_ip]++;
            proto[to_string(f.protocol)]++;
        }
    }
    CategoricalVocab vocab;
    vocab.src_ip = top_k(src, k);
    vocab.dest_ip = top_k(dst, k);
    vocab.protocol = top_k(proto, k);
    return vocab;
}

WindowState build_state(const Window& w, const CategoricalVocab& vocab) {
    if (w.flows.empty()) throw EmptyWindow(w.index);
    WindowState s;
    s.numeric = aggregate_numeric(w);
    s.categorical = Eigen::VectorXd::Zero(vocab.dim());
    long base = 0;
    count_into(s.categorical, base, vocab.src_ip, w.flows,
               [](const FlowRecord& f) { return f.src_ip; });
    base += static_cast<long>(vocab.src_ip.size()) + 1;
    count_into(s.categorical, base, vocab.dest_ip, w.flows,
               [](const FlowRecord& f) { return f.dest_ip; });
    base += static_cast<long>(vocab.dest_ip.size()) + 1;
    count_into(s.categorical, base, vocab.protocol, w.flows,
               [](const FlowRecord& f) { return to_string(f.protocol); });
    s.dim = 6 + static_cast<int>(s.categorical.size());
    return s;
}

WindowMetadata build_metadata(const Window& w) {
    if (w.flows.empty()) throw EmptyWindow(w.index);
    WindowMetadata m;
    m.flow_id = modal_value<std::string>(w.flows, [](const FlowRecord& f) { return f.flow_id; });
    m.src_ip = modal_value<std::string>(w.flows, [](const FlowRecord& f) { return f.src_ip; });
    m.dest_ip = modal_value<std::string>(w.flows, [](const FlowRecord& f) { return f.dest_ip; });
    m.dest_port = modal_value<int>(w.flows, [](const FlowRecord& f) { return f.dest_port; });
    m.flow_count = static_cast<int>(w.flows.size());
    std::set<std::string> dests;
    for (const auto& f : w.flows) dests.insert(f.dest_ip);
    m.distinct_dest_count = static_cast<int>(dests.size());
    return m;
}

std::string states_to_csv(const std::vector<WindowState>& states, const CategoricalVocab& vocab) {
    std::ostringstream out;
    out << "src_port_mean,src_port_max,dest_port_mean,dest_port_max,bytes_in_mean,bytes_out_max";
    auto emit_header = [&](const std::string& attr, const std::vector<std::string>& values) {
        for (const auto& v : values) out << "," << attr << "_" << v;
        out << "," << attr << "_OTHER";
    };
    emit_header("src_ip", vocab.src_ip);
    emit_header("dest_ip", vocab.dest_ip);
    emit_header("protocol", vocab.protocol);
    out << "\n";
    for (const auto& s : states) {
        const Eigen::VectorXd v = s.concat();
        for (long i = 0; i < v.size(); ++i) {
            if (i) out << ",";
            out << v[i];
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace flowtriage
