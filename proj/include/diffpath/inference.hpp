#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "diffpath/rng.hpp"
#include "diffpath/types.hpp"

namespace diffpath {

enum class step_schedule { constant, inv_sqrt };
enum class sampling_scheme { windowed_uniform, windowed_exponential };

struct inference_config {
    transmission_model model;
    double epsilon = 1e-6;    // feasible lower bound; rates at or below it are omitted
    double rho = 0.95;        // aging factor for edges with inactive sources
    double gamma0 = 0.1;
    step_schedule schedule = step_schedule::constant;
    int iterations = -1;      // negative: min(5000, 10 * cascades in window)
    double sample_window = 10.0;
    sampling_scheme sampling = sampling_scheme::windowed_uniform;
    double tau = 0.0;         // exponential sampling scale; 0: sample_window / 3
    double time_resolution = 1.0;
    double init_rate = 1e-2;  // starting rate for newly feasible edges
    // Upper projection bound. The hazard-quotient gradient is bounded only
    // by 1/(epsilon * h): one step from a nearly-floored parent sum can move
    // a rate by gamma/epsilon unless boxed.
    double max_rate = 10.0;
    // Output significance threshold: emitted snapshots drop rates at or
    // below max(epsilon, output_floor). Zero keeps the bare epsilon drop.
    double output_floor = 0.0;
    // Per-update bound on |gamma * gradient|; infinity disables clipping.
    double max_step = std::numeric_limits<double>::infinity();

    double drop_threshold() const { return std::max(epsilon, output_floor); }

    double step_size(long k) const;
    double tau_or_default() const { return tau > 0.0 ? tau : sample_window / 3.0; }
    void validate() const;
};

// Cascades indexed by start time. Window queries return exactly the cascades
// with start_time in (t - T, t]; order among equal start times is insertion
// order.
class cascade_store {
public:
    cascade_store() = default;
    explicit cascade_store(std::vector<cascade> cascades);

    void add(cascade c);
    const std::vector<cascade>& all() const { return cascades_; }
    std::size_t size() const { return cascades_.size(); }
    bool empty() const { return cascades_.empty(); }

    // index range [first, last) of cascades with start_time in (t_lo, t_hi]
    std::pair<std::size_t, std::size_t> window_range(double t_lo, double t_hi) const;

    // ordered pairs (j, i) co-infected with t_j < t_i in some cascade,
    // over the whole store
    const edge_set& feasible_all() const;

private:
    std::vector<cascade> cascades_;
    mutable edge_set feasible_cache_;
    mutable bool feasible_valid_ = false;
};

// Ordered pairs (j, i) co-infected with t_j < t_i in at least one cascade of
// the window (t - T, t].
edge_set feasible_edges(const cascade_store& store, double t_lo, double t_hi);

// Draws one cascade from the window (t - T, t]: uniform, or with probability
// proportional to exp(-(t - start_time) / tau). Throws no_data_error when
// the window is empty.
const cascade& sample_cascade(const cascade_store& store, double t,
                              const inference_config& config, rng& r);

// One projected stochastic-gradient step on the sampled cascade: every stored
// rate whose source is infected in the cascade moves against its gradient and
// is clamped below at epsilon; all other rates are untouched (bit-exact).
rate_snapshot sg_step(const rate_snapshot& rates, const cascade& c,
                      const inference_config& config, long k);

// Multiplies every stored rate whose source is not in active_sources by rho.
rate_snapshot age_unused_edges(const rate_snapshot& rates,
                               const std::unordered_set<node_id>& active_sources, double rho);

// Removes rates at or below the feasibility floor.
rate_snapshot drop_floor(const rate_snapshot& rates, double epsilon);

struct step_diag {
    int step = 0;
    double t = 0.0;
    long n_cascades = 0;   // cascades sampled this step
    long n_edges = 0;      // edges in the returned snapshot
    long skips = 0;        // unexplained infections skipped
    double step_norm = 0.0;  // mean per-iteration L2 norm of the rate change
    long edge_updates = 0;
};

// Solves the network inference problem at time t, warm-started from prev.
// Edges newly feasible in the window enter at init_rate; carried edges keep
// their previous rates; after K sampled-gradient iterations, edges whose
// source appeared in no sampled cascade are aged by rho, and rates at or
// below epsilon are dropped. An empty window carries prev forward with aging
// applied to all sources.
rate_snapshot infer_at_time(const cascade_store& store, double t, const rate_snapshot& prev,
                            const inference_config& config, rng& r,
                            step_diag* diag = nullptr);

using step_observer = std::function<void(const step_diag&)>;

// Runs infer_at_time at time_resolution spacing over (t_start, t_end],
// chaining snapshots; one snapshot per step.
std::vector<rate_snapshot> infer_dynamic(const cascade_store& store, double t_start,
                                         double t_end, const inference_config& config,
                                         std::uint64_t rng_seed,
                                         const step_observer& on_step = {});

struct static_options {
    int max_epochs = 100;
    double tol = 1e-4;       // relative NLL improvement between epochs
    long probe_every = 0;    // 0 disables probing
    // receives the raw iterate (before the epsilon drop)
    std::function<void(long iteration, const rate_snapshot&)> probe;
};

// Batch mode: ignores windows and aging, shuffles all cascades each epoch and
// applies one gradient step per cascade; stops when the full-data NLL gain
// between epochs falls under tol (relative) or at max_epochs.
rate_snapshot infer_static(const cascade_store& store, const inference_config& config,
                           const static_options& opts, std::uint64_t rng_seed);

// Full-data negative log-likelihood of the store under the given rates.
double total_neg_log_likelihood(const cascade_store& store, const rate_snapshot& rates,
                                const transmission_model& m);

}  // namespace diffpath
