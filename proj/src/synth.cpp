#include "diffpath/synth.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "diffpath/parallel.hpp"

namespace diffpath {

void kronecker_spec::validate() const {
    if (iterations < 1 || iterations > 30)
        throw std::invalid_argument("kronecker iterations must be in [1, 30]");
    for (const auto& row : seed)
        for (double p : row)
            if (p < 0.0 || p > 1.0)
                throw std::invalid_argument("kronecker seed entries must be probabilities");
    const double total = seed[0][0] + seed[0][1] + seed[1][0] + seed[1][1];
    if (!(total > 0.0)) throw std::invalid_argument("kronecker seed matrix is all zero");
    const std::int64_t n = node_count();
    if (target_edges < 1 || static_cast<std::int64_t>(target_edges) > n * (n - 1))
        throw std::invalid_argument("target_edges out of range for node count");
}

std::vector<std::pair<node_id, node_id>> generate_kronecker(const kronecker_spec& spec,
                                                            std::uint64_t rng_seed) {
    spec.validate();
    rng r(rng_seed);
    const double total = spec.seed[0][0] + spec.seed[0][1] + spec.seed[1][0] + spec.seed[1][1];
    const double c00 = spec.seed[0][0] / total;
    const double c01 = c00 + spec.seed[0][1] / total;
    const double c10 = c01 + spec.seed[1][0] / total;

    edge_set seen;
    std::vector<std::pair<node_id, node_id>> edges;
    edges.reserve(spec.target_edges);
    const std::int64_t budget = 100ll * spec.target_edges;

    for (std::int64_t attempt = 0;
         attempt < budget && edges.size() < static_cast<std::size_t>(spec.target_edges);
         ++attempt) {
        node_id src = 0;
        node_id dst = 0;
        for (int level = 0; level < spec.iterations; ++level) {
            const double u = r.uniform();
            const int a = u < c01 ? 0 : 1;
            const int b = (u < c00 || (u >= c01 && u < c10)) ? 0 : 1;
            src = static_cast<node_id>((src << 1) | a);
            dst = static_cast<node_id>((dst << 1) | b);
        }
        if (src == dst) continue;
        if (!seen.insert(edge_key(src, dst)).second) continue;
        edges.emplace_back(src, dst);
    }
    if (edges.size() < static_cast<std::size_t>(spec.target_edges))
        throw std::runtime_error("kronecker sampling exhausted its resample budget (placed " +
                                 std::to_string(edges.size()) + " of " +
                                 std::to_string(spec.target_edges) + " edges)");
    std::sort(edges.begin(), edges.end());
    return edges;
}

const char* pattern_kind_name(pattern_kind k) {
    switch (k) {
        case pattern_kind::slab: return "slab";
        case pattern_kind::square: return "square";
        case pattern_kind::chainsaw: return "chainsaw";
        case pattern_kind::hump: return "hump";
        case pattern_kind::constant: return "constant";
    }
    return "constant";
}

pattern_kind pattern_kind_from_name(const std::string& name) {
    if (name == "slab") return pattern_kind::slab;
    if (name == "square") return pattern_kind::square;
    if (name == "chainsaw") return pattern_kind::chainsaw;
    if (name == "hump") return pattern_kind::hump;
    if (name == "constant") return pattern_kind::constant;
    throw std::invalid_argument("unknown pattern kind '" + name + "'");
}

double evolution_pattern::rate_at(double t) const {
    switch (kind) {
        case pattern_kind::constant:
            return peak;
        case pattern_kind::slab:
            return (t >= onset && t < onset + duration) ? peak : 0.0;
        case pattern_kind::square: {
            if (t < onset) return 0.0;
            const double phase = std::fmod(t - onset, period);
            return phase < 0.5 * period ? peak : 0.0;
        }
        case pattern_kind::chainsaw: {
            if (t < onset) return 0.0;
            const double phase = std::fmod(t - onset, period);
            const double half = 0.5 * period;
            return phase < half ? peak * (phase / half) : peak * (1.0 - (phase - half) / half);
        }
        case pattern_kind::hump: {
            if (t < onset || t >= onset + duration) return 0.0;
            return 0.5 * peak * (1.0 - std::cos(2.0 * M_PI * (t - onset) / duration));
        }
    }
    return 0.0;
}

double pattern_rate(const evolution_pattern& p, double t) { return p.rate_at(t); }

ground_truth_network::ground_truth_network(int node_count, std::vector<ground_truth_edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
    edge_set seen;
    for (const auto& e : edges_) {
        if (e.src == e.dst)
            throw std::invalid_argument("ground truth contains self-loop on node " +
                                        std::to_string(e.src));
        if (e.src < 0 || e.dst < 0 || e.src >= node_count_ || e.dst >= node_count_)
            throw std::invalid_argument("ground truth edge endpoint outside node universe");
        if (!seen.insert(edge_key(e.src, e.dst)).second)
            throw std::invalid_argument("ground truth repeats edge " + std::to_string(e.src) +
                                        "->" + std::to_string(e.dst));
    }
}

rate_snapshot ground_truth_network::rates_at(double t) const {
    rate_snapshot snap(0, t);
    for (const auto& e : edges_) {
        const double a = e.pattern.rate_at(t);
        if (a > 0.0) snap.set(e.src, e.dst, a);
    }
    return snap;
}

edge_set ground_truth_network::edges_at(double t) const {
    edge_set out;
    for (const auto& e : edges_)
        if (e.pattern.rate_at(t) > 0.0) out.insert(edge_key(e.src, e.dst));
    return out;
}

std::vector<std::vector<std::pair<node_id, double>>> ground_truth_network::adjacency_at(
    double t) const {
    std::vector<std::vector<std::pair<node_id, double>>> adj(node_count_);
    for (const auto& e : edges_) {
        const double a = e.pattern.rate_at(t);
        if (a > 0.0) adj[e.src].emplace_back(e.dst, a);
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());
    return adj;
}

void pattern_ranges::validate() const {
    if (!(peak.first > 0.0) || peak.second < peak.first)
        throw std::invalid_argument("invalid peak range");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(duration.first > 0.0) || duration.second < duration.first)
        throw std::invalid_argument("invalid duration range");
    if (!(period.first > 0.0) || period.second < period.first)
        throw std::invalid_argument("invalid period range");
    if (kinds.empty()) throw std::invalid_argument("at least one pattern kind required");
}

ground_truth_network assign_patterns(int node_count,
                                     const std::vector<std::pair<node_id, node_id>>& edges,
                                     const pattern_ranges& ranges, std::uint64_t rng_seed) {
    if (edges.empty()) throw std::invalid_argument("assign_patterns: empty edge list");
    ranges.validate();
    rng r(rng_seed);
    std::vector<ground_truth_edge> out;
    out.reserve(edges.size());
    for (const auto& [src, dst] : edges) {
        evolution_pattern p;
        p.kind = ranges.kinds[r.uniform_index(ranges.kinds.size())];
        p.peak = r.uniform(ranges.peak.first, ranges.peak.second);
        p.onset = r.uniform(0.0, ranges.horizon);
        p.duration = r.uniform(ranges.duration.first, ranges.duration.second);
        p.period = r.uniform(ranges.period.first, ranges.period.second);
        out.push_back({src, dst, p});
    }
    return ground_truth_network(node_count, std::move(out));
}

namespace {

using adjacency = std::vector<std::vector<std::pair<node_id, double>>>;

double draw_transmission_time(const transmission_model& m, double alpha, rng& r) {
    switch (m.family) {
        case model_family::exponential: return r.exponential(alpha);
        case model_family::power_law: return r.pareto(alpha, m.delta);
        case model_family::rayleigh: return r.rayleigh(alpha);
    }
    return 0.0;
}

// First-parent event-queue simulation over a frozen adjacency. The root is
// infected at t0; each newly infected node draws one tentative transmission
// per out-edge and a node's infection time is the minimum tentative time.
std::vector<cascade_event> run_cascade(const adjacency& adj, const transmission_model& model,
                                       double t0, node_id root, double window, rng& r,
                                       std::vector<tentative_draw>* trace) {
    const double t_end = t0 + window;
    using entry = std::tuple<double, node_id, node_id>;
    std::priority_queue<entry, std::vector<entry>, std::greater<entry>> queue;
    queue.emplace(t0, root, root);

    std::vector<cascade_event> events;
    std::unordered_set<node_id> infected;
    while (!queue.empty()) {
        const auto [t, node, src] = queue.top();
        queue.pop();
        if (!infected.insert(node).second) continue;
        events.push_back({node, t});
        for (const auto& [dst, alpha] : adj[node]) {
            if (infected.count(dst)) continue;
            const double tentative = t + draw_transmission_time(model, alpha, r);
            if (trace) trace->push_back({node, dst, tentative});
            if (tentative > t_end) continue;
            queue.emplace(tentative, dst, node);
        }
    }
    return events;
}

}  // namespace

cascade simulate_cascade(const ground_truth_network& net, const transmission_model& model,
                         double t_step, node_id root, double window, std::uint64_t rng_seed,
                         std::vector<tentative_draw>* trace) {
    if (root < 0 || root >= net.node_count())
        throw std::invalid_argument("simulate_cascade: root outside node universe");
    if (!(window > 0.0)) throw std::invalid_argument("simulate_cascade: window must be positive");
    model.validate();

    const adjacency adj = net.adjacency_at(t_step);
    rng r(rng_seed);
    auto events = run_cascade(adj, model, t_step, root, window, r, trace);
    return cascade("c" + std::to_string(root) + "@" + std::to_string(t_step), std::move(events),
                   window);
}

std::vector<cascade> generate_cascade_set(const ground_truth_network& net,
                                          const transmission_model& model, int horizon_steps,
                                          int per_step, double window, std::uint64_t rng_seed) {
    if (horizon_steps < 1) throw std::invalid_argument("horizon_steps must be >= 1");
    if (per_step < 1) throw std::invalid_argument("per_step must be >= 1");
    if (!(window > 0.0)) throw std::invalid_argument("window must be positive");
    model.validate();

    std::vector<adjacency> adj_cache(horizon_steps);
    for (int s = 0; s < horizon_steps; ++s) adj_cache[s] = net.adjacency_at(s);

    const std::size_t total = static_cast<std::size_t>(horizon_steps) * per_step;
    std::vector<cascade> out(total);
    parallel_for(total, [&](std::size_t i) {
        const int step = static_cast<int>(i / per_step);
        const int idx = static_cast<int>(i % per_step);
        // independent substream per cascade, so results do not depend on
        // scheduling
        rng r(rng::mix(rng_seed, static_cast<std::uint64_t>(step),
                       static_cast<std::uint64_t>(idx)));
        const node_id root = static_cast<node_id>(r.uniform_index(net.node_count()));
        auto events = run_cascade(adj_cache[step], model, static_cast<double>(step), root,
                                  window, r, nullptr);
        out[i] = cascade("s" + std::to_string(step) + "_c" + std::to_string(idx),
                         std::move(events), window);
    });
    return out;
}

}  // namespace diffpath
