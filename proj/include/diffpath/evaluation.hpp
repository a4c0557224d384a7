#pragma once

#include <map>
#include <utility>
#include <vector>

#include "diffpath/types.hpp"

namespace diffpath {

// precision = |E ∩ Ê| / |Ê| (1 when Ê is empty),
// recall    = |E ∩ Ê| / |E| (1 when E is empty)
std::pair<double, double> precision_recall(const edge_set& inferred, const edge_set& truth);
std::pair<double, double> precision_recall(const rate_snapshot& inferred, const edge_set& truth);

// 1 - |EΔÊ| / (|E| + |Ê|); zero when both sets are empty. An inferred
// network with no edges or only false edges scores zero.
double accuracy(const rate_snapshot& inferred, const rate_snapshot& truth);
double accuracy(const edge_set& inferred, const edge_set& truth);

// Mean of (a* - â)^2 over the support (default: union of both edge sets);
// absent rates read as zero. Throws std::domain_error on empty support.
double mse(const rate_snapshot& inferred, const rate_snapshot& truth,
           const edge_set* support = nullptr);

// Sum over reachable nodes R of 1 / d(src, R) with d the directed unweighted
// hop count over stored edges. Throws std::domain_error when src is not an
// endpoint of the snapshot.
double harmonic_centrality(const rate_snapshot& snapshot, node_id src);

// centrality of every endpoint, ordered by node id
std::vector<std::pair<node_id, double>> harmonic_centrality_all(const rate_snapshot& snapshot);

// Fraction of each label among the k most central nodes (ties broken by
// ascending node id; all nodes when fewer than k).
std::map<node_label, double> top_k_label_share(const rate_snapshot& snapshot,
                                               const label_map& labels, int k);

struct edge_type_counts_t {
    long media_media = 0;
    long media_blog = 0;
    long blog_media = 0;
    long blog_blog = 0;
    long with_unknown = 0;  // at least one endpoint unlabeled
};

edge_type_counts_t edge_type_counts(const rate_snapshot& snapshot, const label_map& labels);

struct snapshot_score {
    int step = 0;
    double t = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
    double mse = 0.0;
};

// Scores one inferred snapshot against true rates at the same time.
snapshot_score score_snapshot(const rate_snapshot& inferred, const rate_snapshot& truth);

}  // namespace diffpath
