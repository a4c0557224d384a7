#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "diffpath/rng.hpp"
#include "diffpath/types.hpp"

namespace diffpath {

// Stochastic Kronecker graph: 2x2 probability seed, k recursive levels,
// 2^k nodes, exact edge count sampled by recursive quadrant descent.
struct kronecker_spec {
    std::array<std::array<double, 2>, 2> seed{{{0.9, 0.5}, {0.5, 0.3}}};
    int iterations = 10;
    int target_edges = 2048;

    int node_count() const { return 1 << iterations; }
    void validate() const;
};

std::vector<std::pair<node_id, node_id>> generate_kronecker(const kronecker_spec& spec,
                                                            std::uint64_t rng_seed);

enum class pattern_kind { slab, square, chainsaw, hump, constant };

const char* pattern_kind_name(pattern_kind k);
pattern_kind pattern_kind_from_name(const std::string& name);

// Time profile of one edge's true transmission rate. Values lie in [0, peak].
// chainsaw/hump/constant are continuous in t; slab/square jump at their
// boundaries.
struct evolution_pattern {
    pattern_kind kind = pattern_kind::constant;
    double peak = 1.0;
    double onset = 0.0;
    double duration = 1.0;  // slab, hump
    double period = 1.0;    // square, chainsaw

    double rate_at(double t) const;
};

double pattern_rate(const evolution_pattern& p, double t);

struct ground_truth_edge {
    node_id src = 0;
    node_id dst = 0;
    evolution_pattern pattern;
};

class ground_truth_network {
public:
    ground_truth_network() = default;
    ground_truth_network(int node_count, std::vector<ground_truth_edge> edges);

    int node_count() const { return node_count_; }
    const std::vector<ground_truth_edge>& edges() const { return edges_; }

    rate_snapshot rates_at(double t) const;
    edge_set edges_at(double t) const;  // edges with positive rate at t

    // out-adjacency (dst, rate) per node at time t; zero-rate edges omitted
    std::vector<std::vector<std::pair<node_id, double>>> adjacency_at(double t) const;

private:
    int node_count_ = 0;
    std::vector<ground_truth_edge> edges_;
};

struct pattern_ranges {
    std::pair<double, double> peak{0.5, 2.0};
    double horizon = 100.0;                    // onsets are uniform in [0, horizon)
    std::pair<double, double> duration{20.0, 50.0};
    std::pair<double, double> period{20.0, 50.0};
    std::vector<pattern_kind> kinds{pattern_kind::slab, pattern_kind::square,
                                    pattern_kind::chainsaw, pattern_kind::hump,
                                    pattern_kind::constant};

    void validate() const;
};

// Assigns each edge a pattern kind uniformly from ranges.kinds with uniform
// peak/onset/duration/period. Deterministic in rng_seed.
ground_truth_network assign_patterns(int node_count,
                                     const std::vector<std::pair<node_id, node_id>>& edges,
                                     const pattern_ranges& ranges, std::uint64_t rng_seed);

// One tentative transmission draw made during simulation; used to check
// first-parent semantics on instrumented runs.
struct tentative_draw {
    node_id src = 0;
    node_id dst = 0;
    double time = 0.0;  // absolute tentative infection time
};

// Simulates one cascade with rates frozen at t_step. The root is infected at
// absolute time t_step; a node's infection time is the earliest tentative
// transmission among its infected parents; events past the window are
// discarded.
cascade simulate_cascade(const ground_truth_network& net, const transmission_model& model,
                         double t_step, node_id root, double window, std::uint64_t rng_seed,
                         std::vector<tentative_draw>* trace = nullptr);

// per_step cascades for every integer step in [0, horizon_steps), uniformly
// random roots, start_time tagged with the step. Parallel across cascades;
// deterministic in rng_seed regardless of thread count.
std::vector<cascade> generate_cascade_set(const ground_truth_network& net,
                                          const transmission_model& model, int horizon_steps,
                                          int per_step, double window, std::uint64_t rng_seed);

}  // namespace diffpath
