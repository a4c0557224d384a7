#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace diffpath {

using node_id = std::int32_t;

enum class model_family { exponential, power_law, rayleigh };

// Parametric family for edge transmission times. delta is the waiting-time
// offset of the power-law model and is ignored by the other two.
struct transmission_model {
    model_family family = model_family::exponential;
    double delta = 1.0;

    void validate() const {
        if (family == model_family::power_law && !(delta > 0.0))
            throw std::invalid_argument("power-law model requires delta > 0");
    }
};

inline std::uint64_t edge_key(node_id src, node_id dst) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
           static_cast<std::uint32_t>(dst);
}

inline std::pair<node_id, node_id> edge_nodes(std::uint64_t key) {
    return {static_cast<node_id>(key >> 32),
            static_cast<node_id>(key & 0xffffffffu)};
}

using edge_set = std::unordered_set<std::uint64_t>;

struct cascade_event {
    node_id node = 0;
    double time = 0.0;
};

// One contagion's record: (node, infection time) pairs sorted by time, plus
// the observation window. Nodes absent from the record were not infected
// within [start_time, start_time + window].
class cascade {
public:
    cascade() = default;

    cascade(std::string id, std::vector<cascade_event> events, double window)
        : id_(std::move(id)), events_(std::move(events)), window_(window) {
        if (events_.empty())
            throw std::invalid_argument("cascade '" + id_ + "' has no events");
        if (!(window_ > 0.0))
            throw std::invalid_argument("cascade '" + id_ + "' window must be positive");
        by_node_.reserve(events_.size());
        double prev = events_.front().time;
        for (const auto& ev : events_) {
            if (ev.time < prev)
                throw std::invalid_argument("cascade '" + id_ + "' events not sorted by time");
            prev = ev.time;
            if (!by_node_.emplace(ev.node, ev.time).second)
                throw std::invalid_argument("cascade '" + id_ + "' repeats node " +
                                            std::to_string(ev.node));
        }
        const double t0 = events_.front().time;
        if (events_.back().time > t0 + window_)
            throw std::invalid_argument("cascade '" + id_ + "' has events beyond its window");
    }

    const std::string& id() const { return id_; }
    const std::vector<cascade_event>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    double window() const { return window_; }
    double start_time() const { return events_.front().time; }
    double horizon() const { return start_time() + window_; }

    bool contains(node_id n) const { return by_node_.count(n) != 0; }

    std::optional<double> time_of(node_id n) const {
        auto it = by_node_.find(n);
        if (it == by_node_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::string id_;
    std::vector<cascade_event> events_;
    double window_ = 0.0;
    std::unordered_map<node_id, double> by_node_;
};

// Sparse directed rate map at one time step. Absent keys mean rate zero;
// stored rates are strictly positive and self-loops are rejected.
class rate_snapshot {
public:
    rate_snapshot() = default;
    rate_snapshot(int step, double time) : step_(step), time_(time) {}

    int step() const { return step_; }
    double time() const { return time_; }
    void set_step(int step, double time) {
        step_ = step;
        time_ = time;
    }

    void set(node_id src, node_id dst, double rate) {
        if (src == dst)
            throw std::invalid_argument("rate_snapshot: self-loop on node " + std::to_string(src));
        if (!(rate > 0.0))
            throw std::invalid_argument("rate_snapshot: rate must be positive");
        rates_[edge_key(src, dst)] = rate;
    }

    double rate(node_id src, node_id dst) const {
        auto it = rates_.find(edge_key(src, dst));
        return it == rates_.end() ? 0.0 : it->second;
    }

    bool contains(node_id src, node_id dst) const {
        return rates_.count(edge_key(src, dst)) != 0;
    }

    bool erase(node_id src, node_id dst) { return rates_.erase(edge_key(src, dst)) > 0; }

    std::size_t size() const { return rates_.size(); }
    bool empty() const { return rates_.empty(); }

    const std::unordered_map<std::uint64_t, double>& rates() const { return rates_; }

    edge_set edges() const {
        edge_set out;
        out.reserve(rates_.size());
        for (const auto& [k, v] : rates_) out.insert(k);
        return out;
    }

    // All endpoints of stored edges, sorted ascending.
    std::vector<node_id> node_set() const {
        std::unordered_set<node_id> seen;
        for (const auto& [k, v] : rates_) {
            auto [s, d] = edge_nodes(k);
            seen.insert(s);
            seen.insert(d);
        }
        std::vector<node_id> out(seen.begin(), seen.end());
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    int step_ = 0;
    double time_ = 0.0;
    std::unordered_map<std::uint64_t, double> rates_;
};

// An infected node with no positive-rate parent preceding it: the likelihood
// has no finite value, so callers must be able to catch and handle this.
struct unexplained_infection : std::runtime_error {
    node_id node;
    explicit unexplained_infection(node_id n)
        : std::runtime_error("node " + std::to_string(n) +
                             " has no positive-rate parent explaining its infection"),
          node(n) {}
};

struct no_data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
    int line;
    parse_error(const std::string& what, int line_no)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

enum class node_label { unknown, media, blog };

struct node_info {
    node_id id = 0;
    std::string name;
    node_label label = node_label::unknown;
};

using label_map = std::unordered_map<node_id, node_label>;

}  // namespace diffpath
