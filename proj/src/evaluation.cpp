#include "diffpath/evaluation.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace diffpath {

namespace {

std::size_t intersection_size(const edge_set& a, const edge_set& b) {
    const edge_set& small = a.size() <= b.size() ? a : b;
    const edge_set& large = a.size() <= b.size() ? b : a;
    std::size_t n = 0;
    for (std::uint64_t k : small) n += large.count(k);
    return n;
}

}  // namespace

std::pair<double, double> precision_recall(const edge_set& inferred, const edge_set& truth) {
    const double common = static_cast<double>(intersection_size(inferred, truth));
    const double precision = inferred.empty() ? 1.0 : common / static_cast<double>(inferred.size());
    const double recall = truth.empty() ? 1.0 : common / static_cast<double>(truth.size());
    return {precision, recall};
}

std::pair<double, double> precision_recall(const rate_snapshot& inferred, const edge_set& truth) {
    return precision_recall(inferred.edges(), truth);
}

double accuracy(const edge_set& inferred, const edge_set& truth) {
    const double denominator = static_cast<double>(inferred.size() + truth.size());
    if (denominator == 0.0) return 0.0;
    const double common = static_cast<double>(intersection_size(inferred, truth));
    const double symmetric_diff = denominator - 2.0 * common;
    return 1.0 - symmetric_diff / denominator;
}

double accuracy(const rate_snapshot& inferred, const rate_snapshot& truth) {
    return accuracy(inferred.edges(), truth.edges());
}

double mse(const rate_snapshot& inferred, const rate_snapshot& truth, const edge_set* support) {
    edge_set merged;
    if (!support) {
        merged = truth.edges();
        for (const auto& [k, v] : inferred.rates()) merged.insert(k);
        support = &merged;
    }
    if (support->empty()) throw std::domain_error("mse: empty support");

    double sum = 0.0;
    for (std::uint64_t k : *support) {
        const auto [s, d] = edge_nodes(k);
        const double diff = truth.rate(s, d) - inferred.rate(s, d);
        sum += diff * diff;
    }
    return sum / static_cast<double>(support->size());
}

namespace {

struct compact_graph {
    std::vector<node_id> nodes;                 // sorted endpoints
    std::unordered_map<node_id, int> position;
    std::vector<std::vector<int>> out;

    explicit compact_graph(const rate_snapshot& snapshot) {
        nodes = snapshot.node_set();
        position.reserve(nodes.size());
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i) position[nodes[i]] = i;
        out.resize(nodes.size());
        for (const auto& [k, v] : snapshot.rates()) {
            const auto [s, d] = edge_nodes(k);
            out[position[s]].push_back(position[d]);
        }
        for (auto& row : out) std::sort(row.begin(), row.end());
    }

    double harmonic_from(int start) const {
        std::vector<int> dist(nodes.size(), -1);
        dist[start] = 0;
        std::deque<int> frontier{start};
        double sum = 0.0;
        while (!frontier.empty()) {
            const int u = frontier.front();
            frontier.pop_front();
            for (int v : out[u]) {
                if (dist[v] >= 0) continue;
                dist[v] = dist[u] + 1;
                sum += 1.0 / dist[v];
                frontier.push_back(v);
            }
        }
        return sum;
    }
};

}  // namespace

double harmonic_centrality(const rate_snapshot& snapshot, node_id src) {
    const compact_graph g(snapshot);
    auto it = g.position.find(src);
    if (it == g.position.end())
        throw std::domain_error("harmonic_centrality: node " + std::to_string(src) +
                                " is not in the snapshot");
    return g.harmonic_from(it->second);
}

std::vector<std::pair<node_id, double>> harmonic_centrality_all(const rate_snapshot& snapshot) {
    const compact_graph g(snapshot);
    std::vector<std::pair<node_id, double>> out;
    out.reserve(g.nodes.size());
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
        out.emplace_back(g.nodes[i], g.harmonic_from(i));
    return out;
}

std::map<node_label, double> top_k_label_share(const rate_snapshot& snapshot,
                                               const label_map& labels, int k) {
    if (k < 1) throw std::invalid_argument("top_k_label_share: k must be >= 1");
    auto scored = harmonic_centrality_all(snapshot);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    const std::size_t take = std::min<std::size_t>(k, scored.size());

    std::map<node_label, double> shares{{node_label::media, 0.0},
                                        {node_label::blog, 0.0},
                                        {node_label::unknown, 0.0}};
    if (take == 0) return shares;
    for (std::size_t i = 0; i < take; ++i) {
        auto it = labels.find(scored[i].first);
        shares[it == labels.end() ? node_label::unknown : it->second] += 1.0;
    }
    for (auto& [label, count] : shares) count /= static_cast<double>(take);
    return shares;
}

edge_type_counts_t edge_type_counts(const rate_snapshot& snapshot, const label_map& labels) {
    edge_type_counts_t counts;
    auto label_of = [&](node_id n) {
        auto it = labels.find(n);
        return it == labels.end() ? node_label::unknown : it->second;
    };
    for (const auto& [k, v] : snapshot.rates()) {
        const auto [s, d] = edge_nodes(k);
        const node_label ls = label_of(s);
        const node_label ld = label_of(d);
        if (ls == node_label::unknown || ld == node_label::unknown)
            ++counts.with_unknown;
        else if (ls == node_label::media && ld == node_label::media)
            ++counts.media_media;
        else if (ls == node_label::media && ld == node_label::blog)
            ++counts.media_blog;
        else if (ls == node_label::blog && ld == node_label::media)
            ++counts.blog_media;
        else
            ++counts.blog_blog;
    }
    return counts;
}

snapshot_score score_snapshot(const rate_snapshot& inferred, const rate_snapshot& truth) {
    snapshot_score s;
    s.step = inferred.step();
    s.t = inferred.time();
    const edge_set inferred_edges = inferred.edges();
    const edge_set truth_edges = truth.edges();
    std::tie(s.precision, s.recall) = precision_recall(inferred_edges, truth_edges);
    s.accuracy = accuracy(inferred_edges, truth_edges);
    if (inferred_edges.empty() && truth_edges.empty())
        s.mse = 0.0;
    else
        s.mse = mse(inferred, truth);
    return s;
}

}  // namespace diffpath
