#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmarl/textio.hpp"

namespace qmarl {

/// One row of the per-epoch training log.
struct MetricsRecord {
    int epoch = 0;
    double mean_return = 0.0;
    double mean_edge_queue = 0.0;
    double mean_cloud_queue = 0.0;
    double empty_event_ratio = 0.0;
    double overflow_event_ratio = 0.0;
    double actor_loss = 0.0;
    double critic_loss = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "epoch,mean_return,mean_edge_queue,mean_cloud_queue,empty_event_ratio,"
    "overflow_event_ratio,actor_loss,critic_loss";

inline void write_metrics_header(std::ostream& out) { out << kMetricsHeader << '\n'; }

inline void write_metrics_row(std::ostream& out, const MetricsRecord& r) {
    out << r.epoch << ',' << textio::fmt(r.mean_return) << ',' << textio::fmt(r.mean_edge_queue) << ','
        << textio::fmt(r.mean_cloud_queue) << ',' << textio::fmt(r.empty_event_ratio) << ','
        << textio::fmt(r.overflow_event_ratio) << ',' << textio::fmt(r.actor_loss) << ','
        << textio::fmt(r.critic_loss) << '\n';
}

inline std::vector<MetricsRecord> read_metrics_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("metrics file is empty");
    if (line == std::string(kMetricsHeader) + "\r") line.pop_back();
    if (line != kMetricsHeader)
        throw std::runtime_error("metrics file has unexpected header: " + line);
    std::vector<MetricsRecord> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = textio::split(line, ',');
        if (cells.size() != 8)
            throw std::runtime_error("metrics row has " + std::to_string(cells.size()) +
                                     " cells, expected 8: " + line);
        MetricsRecord r;
        r.epoch = textio::parse_int(cells[0]);
        r.mean_return = textio::parse_double(cells[1]);
        r.mean_edge_queue = textio::parse_double(cells[2]);
        r.mean_cloud_queue = textio::parse_double(cells[3]);
        r.empty_event_ratio = textio::parse_double(cells[4]);
        r.overflow_event_ratio = textio::parse_double(cells[5]);
        r.actor_loss = textio::parse_double(cells[6]);
        r.critic_loss = textio::parse_double(cells[7]);
        rows.push_back(r);
    }
    return rows;
}

/// Fraction of the gap to zero reward closed relative to a uniform-random
/// policy: 1 - mean_return / random_return. Both returns are nonpositive by
/// construction of the reward, so the reference must be strictly negative.
inline double achievability(double mean_return, double random_return) {
    if (random_return >= 0.0)
        throw std::invalid_argument("achievability undefined: random-policy return must be negative");
    return 1.0 - mean_return / random_return;
}

/// Ordered key/value summary written as "key value" lines.
struct Summary {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
    void add(const std::string& key, double value) { entries.emplace_back(key, textio::fmt(value)); }
    void add(const std::string& key, int value) { entries.emplace_back(key, std::to_string(value)); }

    bool has(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return true;
        return false;
    }

    const std::string& get(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return v;
        throw std::runtime_error("summary has no key: " + key);
    }

    double get_double(const std::string& key) const { return textio::parse_double(get(key)); }
};

inline void write_summary(std::ostream& out, const Summary& summary) {
    for (const auto& [key, value] : summary.entries) out << key << ' ' << value << '\n';
}

inline Summary read_summary(std::istream& in) {
    Summary summary;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t space = line.find(' ');
        if (space == std::string::npos)
            throw std::runtime_error("summary line is not 'key value': " + line);
        summary.add(line.substr(0, space), line.substr(space + 1));
    }
    return summary;
}

}  // namespace qmarl
