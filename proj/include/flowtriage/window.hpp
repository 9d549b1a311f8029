#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "flowtriage/flow.hpp"

namespace flowtriage {

// Fixed-duration time bucket with its member flows.
struct Window {
    int index = 0;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::vector<FlowRecord> flows;
    int label = 0;  // 1 if any member flow is malicious
};

// Reduced-cardinality categorical encodings: top-k values per attribute + OTHER.
struct CategoricalVocab {
    std::vector<std::string> src_ip;    // last slot is implicit OTHER
    std::vector<std::string> dest_ip;
    std::vector<std::string> protocol;

    // slots including OTHER buckets
    int dim() const {
        return static_cast<int>(src_ip.size() + dest_ip.size() + protocol.size()) + 3;
    }
};

struct WindowState {
    Eigen::Matrix<double, 6, 1> numeric;  // [sport_mean, sport_max, dport_mean, dport_max, bytes_in_mean, bytes_out_max]
    Eigen::VectorXd categorical;          // per-vocab-slot counts, OTHER last per attribute
    int dim = 0;

    Eigen::VectorXd concat() const;
};

// Representative values are per-field modes, ties broken by first occurrence.
struct WindowMetadata {
    std::string flow_id;
    std::string src_ip;
    std::string dest_ip;
    int dest_port = 0;
    int flow_count = 0;
    int distinct_dest_count = 0;
};

std::vector<Window> partition_windows(const FlowDataset& d, std::int64_t delta_ms);

Eigen::Matrix<double, 6, 1> aggregate_numeric(const Window& w);

CategoricalVocab build_vocab(const std::vector<Window>& train_windows, int k);

WindowState build_state(const Window& w, const CategoricalVocab& vocab);

WindowMetadata build_metadata(const Window& w);

// Debug export: one row per window, numeric columns then categorical slot counts.
std::string states_to_csv(const std::vector<WindowState>& states, const CategoricalVocab& vocab);

}  // namespace flowtriage
