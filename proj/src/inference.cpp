#include "diffpath/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "diffpath/model.hpp"

namespace diffpath {

double inference_config::step_size(long k) const {
    if (schedule == step_schedule::inv_sqrt)
        return gamma0 / std::sqrt(static_cast<double>(std::max<long>(k, 1)));
    return gamma0;
}

void inference_config::validate() const {
    model.validate();
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(init_rate > epsilon))
        throw std::invalid_argument("init_rate must exceed epsilon");
    if (!(max_rate > init_rate))
        throw std::invalid_argument("max_rate must exceed init_rate");
    if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
    if (!(rho > 0.0) || rho > 1.0) throw std::invalid_argument("rho must be in (0, 1]");
    if (!(gamma0 > 0.0)) throw std::invalid_argument("gamma0 must be positive");
    if (!(sample_window > 0.0)) throw std::invalid_argument("sample_window must be positive");
    if (sampling == sampling_scheme::windowed_exponential && tau < 0.0)
        throw std::invalid_argument("tau must be non-negative");
    if (!(time_resolution > 0.0))
        throw std::invalid_argument("time_resolution must be positive");
}

cascade_store::cascade_store(std::vector<cascade> cascades) : cascades_(std::move(cascades)) {
    std::stable_sort(cascades_.begin(), cascades_.end(),
                     [](const cascade& a, const cascade& b) {
                         return a.start_time() < b.start_time();
                     });
}

void cascade_store::add(cascade c) {
    auto pos = std::upper_bound(cascades_.begin(), cascades_.end(), c.start_time(),
                                [](double t, const cascade& x) { return t < x.start_time(); });
    cascades_.insert(pos, std::move(c));
    feasible_valid_ = false;
}

std::pair<std::size_t, std::size_t> cascade_store::window_range(double t_lo, double t_hi) const {
    auto lo = std::upper_bound(cascades_.begin(), cascades_.end(), t_lo,
                               [](double t, const cascade& x) { return t < x.start_time(); });
    auto hi = std::upper_bound(cascades_.begin(), cascades_.end(), t_hi,
                               [](double t, const cascade& x) { return t < x.start_time(); });
    return {static_cast<std::size_t>(lo - cascades_.begin()),
            static_cast<std::size_t>(hi - cascades_.begin())};
}

namespace {

void collect_feasible(const cascade& c, edge_set& out) {
    const auto& events = c.events();
    for (std::size_t a = 0; a < events.size(); ++a)
        for (std::size_t b = a + 1; b < events.size(); ++b)
            if (events[a].time < events[b].time)
                out.insert(edge_key(events[a].node, events[b].node));
}

}  // namespace

const edge_set& cascade_store::feasible_all() const {
    if (!feasible_valid_) {
        feasible_cache_.clear();
        for (const auto& c : cascades_) collect_feasible(c, feasible_cache_);
        feasible_valid_ = true;
    }
    return feasible_cache_;
}

edge_set feasible_edges(const cascade_store& store, double t_lo, double t_hi) {
    const auto [lo, hi] = store.window_range(t_lo, t_hi);
    edge_set out;
    for (std::size_t i = lo; i < hi; ++i) collect_feasible(store.all()[i], out);
    return out;
}

namespace {

// Flat view of the variable set for one solve: rates grouped by source so a
// cascade's updates touch contiguous ranges.
struct working_set {
    std::vector<std::uint64_t> keys;  // sorted; source in the high bits
    std::vector<double> rates;
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::unordered_map<node_id, std::pair<std::size_t, std::size_t>> by_src;

    static working_set build(const rate_snapshot& prev, const edge_set& feasible,
                             double init_rate) {
        working_set ws;
        ws.keys.reserve(prev.size() + feasible.size());
        for (const auto& [k, v] : prev.rates()) ws.keys.push_back(k);
        for (std::uint64_t k : feasible)
            if (!prev.rates().count(k)) ws.keys.push_back(k);
        std::sort(ws.keys.begin(), ws.keys.end());

        ws.rates.resize(ws.keys.size());
        ws.index.reserve(ws.keys.size());
        for (std::size_t i = 0; i < ws.keys.size(); ++i) {
            auto it = prev.rates().find(ws.keys[i]);
            ws.rates[i] = it == prev.rates().end() ? init_rate : it->second;
            ws.index.emplace(ws.keys[i], i);
            const node_id src = edge_nodes(ws.keys[i]).first;
            auto [pos, fresh] = ws.by_src.try_emplace(src, i, i + 1);
            if (!fresh) pos->second.second = i + 1;
        }
        return ws;
    }

    rate_snapshot to_snapshot() const {
        rate_snapshot snap;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const auto [s, d] = edge_nodes(keys[i]);
            snap.set(s, d, rates[i]);
        }
        return snap;
    }
};

struct apply_stats {
    long updates = 0;
    long skips = 0;
    double sq_norm = 0.0;
};

// One stochastic-gradient application of a single cascade. Hazard
// denominators are computed from the rates as they were on entry, so the
// per-edge updates are order-independent.
apply_stats apply_cascade(working_set& ws, const cascade& c, const transmission_model& m,
                          double gamma, double epsilon, double max_rate, double max_step) {
    apply_stats st;
    const auto& events = c.events();

    std::unordered_map<node_id, double> denom;
    denom.reserve(events.size());
    for (std::size_t i = 1; i < events.size(); ++i) {
        double h = 0.0;
        for (std::size_t k = 0; k < i; ++k) {
            const double dt = events[i].time - events[k].time;
            if (!detail::pair_active(m, dt)) continue;
            auto it = ws.index.find(edge_key(events[k].node, events[i].node));
            if (it == ws.index.end()) continue;
            h += ws.rates[it->second] * detail::hazard_rate_factor(m, dt);
        }
        if (h <= 0.0) ++st.skips;  // infection has no stored explanation
        denom.emplace(events[i].node, h);
    }

    const double horizon = c.horizon();
    for (const auto& ev : events) {
        auto range = ws.by_src.find(ev.node);
        if (range == ws.by_src.end()) continue;
        for (std::size_t idx = range->second.first; idx < range->second.second; ++idx) {
            const node_id dst = edge_nodes(ws.keys[idx]).second;
            double grad;
            if (const auto td = c.time_of(dst)) {
                const double dt = *td - ev.time;
                if (!detail::pair_active(m, dt)) continue;
                const double h = denom.find(dst)->second;
                if (h <= 0.0) continue;
                grad = detail::survival_factor(m, dt) -
                       detail::hazard_rate_factor(m, dt) / h;
            } else {
                const double dt = horizon - ev.time;
                if (!detail::pair_active(m, dt)) continue;
                grad = detail::survival_factor(m, dt);
            }
            const double old = ws.rates[idx];
            const double step = std::clamp(gamma * grad, -max_step, max_step);
            const double fresh = std::min(std::max(old - step, epsilon), max_rate);
            ws.rates[idx] = fresh;
            st.sq_norm += (fresh - old) * (fresh - old);
            ++st.updates;
        }
    }
    return st;
}

// Draws cascades from one window; exponential weights are prebuilt so each
// draw costs O(log n).
class window_sampler {
public:
    window_sampler(const cascade_store& store, std::size_t lo, std::size_t hi, double t,
                   const inference_config& config)
        : store_(store), lo_(lo), hi_(hi) {
        if (config.sampling == sampling_scheme::windowed_exponential) {
            const double tau = config.tau_or_default();
            cum_.reserve(hi - lo);
            double acc = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                acc += std::exp(-(t - store.all()[i].start_time()) / tau);
                cum_.push_back(acc);
            }
        }
    }

    const cascade& draw(rng& r) const {
        if (cum_.empty()) return store_.all()[lo_ + r.uniform_index(hi_ - lo_)];
        const double u = r.uniform() * cum_.back();
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        const std::size_t off = std::min<std::size_t>(it - cum_.begin(), cum_.size() - 1);
        return store_.all()[lo_ + off];
    }

private:
    const cascade_store& store_;
    std::size_t lo_;
    std::size_t hi_;
    std::vector<double> cum_;
};

}  // namespace

const cascade& sample_cascade(const cascade_store& store, double t,
                              const inference_config& config, rng& r) {
    const auto [lo, hi] = store.window_range(t - config.sample_window, t);
    if (lo == hi)
        throw no_data_error("no cascades with start time in (" +
                            std::to_string(t - config.sample_window) + ", " +
                            std::to_string(t) + "]");
    return window_sampler(store, lo, hi, t, config).draw(r);
}

rate_snapshot sg_step(const rate_snapshot& rates, const cascade& c,
                      const inference_config& config, long k) {
    working_set ws = working_set::build(rates, {}, config.init_rate);
    apply_cascade(ws, c, config.model, config.step_size(k), config.epsilon, config.max_rate,
                  config.max_step);
    rate_snapshot out = ws.to_snapshot();
    out.set_step(rates.step(), rates.time());
    return out;
}

rate_snapshot age_unused_edges(const rate_snapshot& rates,
                               const std::unordered_set<node_id>& active_sources, double rho) {
    if (!(rho > 0.0) || rho > 1.0) throw std::invalid_argument("rho must be in (0, 1]");
    rate_snapshot out(rates.step(), rates.time());
    for (const auto& [k, v] : rates.rates()) {
        const auto [s, d] = edge_nodes(k);
        out.set(s, d, active_sources.count(s) ? v : v * rho);
    }
    return out;
}

rate_snapshot drop_floor(const rate_snapshot& rates, double epsilon) {
    rate_snapshot out(rates.step(), rates.time());
    for (const auto& [k, v] : rates.rates()) {
        if (v <= epsilon) continue;
        const auto [s, d] = edge_nodes(k);
        out.set(s, d, v);
    }
    return out;
}

rate_snapshot infer_at_time(const cascade_store& store, double t, const rate_snapshot& prev,
                            const inference_config& config, rng& r, step_diag* diag) {
    config.validate();
    step_diag d;
    d.step = prev.step() + 1;
    d.t = t;

    const auto [lo, hi] = store.window_range(t - config.sample_window, t);
    rate_snapshot out;
    if (lo == hi) {
        // no data in the window: carry the previous estimate forward, aged
        out = drop_floor(age_unused_edges(prev, {}, config.rho), config.drop_threshold());
    } else {
        const edge_set feasible = feasible_edges(store, t - config.sample_window, t);
        working_set ws = working_set::build(prev, feasible, config.init_rate);
        const long n_window = static_cast<long>(hi - lo);
        const long iterations =
            config.iterations >= 0 ? config.iterations : std::min<long>(5000, 10 * n_window);
        const window_sampler sampler(store, lo, hi, t, config);

        std::unordered_set<node_id> active;
        double norm_sum = 0.0;
        for (long k = 1; k <= iterations; ++k) {
            const cascade& c = sampler.draw(r);
            for (const auto& ev : c.events()) active.insert(ev.node);
            const apply_stats st = apply_cascade(ws, c, config.model, config.step_size(k),
                                                 config.epsilon, config.max_rate,
                                                 config.max_step);
            d.skips += st.skips;
            d.edge_updates += st.updates;
            norm_sum += std::sqrt(st.sq_norm);
        }
        d.n_cascades = iterations;
        d.step_norm = iterations > 0 ? norm_sum / static_cast<double>(iterations) : 0.0;
        out = drop_floor(age_unused_edges(ws.to_snapshot(), active, config.rho),
                         config.drop_threshold());
    }
    out.set_step(d.step, t);
    d.n_edges = static_cast<long>(out.size());
    if (diag) *diag = d;
    return out;
}

std::vector<rate_snapshot> infer_dynamic(const cascade_store& store, double t_start,
                                         double t_end, const inference_config& config,
                                         std::uint64_t rng_seed, const step_observer& on_step) {
    config.validate();
    if (!(t_end > t_start)) throw std::invalid_argument("infer_dynamic: t_end must exceed t_start");

    const long n_steps =
        std::max<long>(1, std::llround((t_end - t_start) / config.time_resolution));
    rng r(rng_seed);
    rate_snapshot prev(0, t_start);
    std::vector<rate_snapshot> out;
    out.reserve(n_steps);
    for (long k = 1; k <= n_steps; ++k) {
        const double t = t_start + static_cast<double>(k) * config.time_resolution;
        step_diag d;
        out.push_back(infer_at_time(store, t, prev, config, r, &d));
        if (on_step) on_step(d);
        prev = out.back();
    }
    return out;
}

double total_neg_log_likelihood(const cascade_store& store, const rate_snapshot& rates,
                                const transmission_model& m) {
    double nll = 0.0;
    for (const auto& c : store.all()) nll += cascade_neg_log_likelihood(c, rates, m);
    return nll;
}

rate_snapshot infer_static(const cascade_store& store, const inference_config& config,
                           const static_options& opts, std::uint64_t rng_seed) {
    config.validate();
    if (store.empty()) throw std::invalid_argument("infer_static: empty cascade store");
    if (opts.max_epochs < 1) throw std::invalid_argument("infer_static: max_epochs must be >= 1");

    const edge_set& feasible = store.feasible_all();
    if (feasible.empty()) return rate_snapshot(0, 0.0);

    working_set ws = working_set::build(rate_snapshot(), feasible, config.init_rate);
    rng r(rng_seed);
    std::vector<std::size_t> order(store.size());
    std::iota(order.begin(), order.end(), 0);

    double prev_nll = std::numeric_limits<double>::infinity();
    long iteration = 0;
    for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        // Fisher-Yates with our own draws, for reproducible shuffles
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[r.uniform_index(i)]);

        for (std::size_t idx : order) {
            ++iteration;
            apply_cascade(ws, store.all()[idx], config.model, config.step_size(iteration),
                          config.epsilon, config.max_rate, config.max_step);
            if (opts.probe_every > 0 && opts.probe && iteration % opts.probe_every == 0)
                opts.probe(iteration, ws.to_snapshot());
        }

        const double nll = total_neg_log_likelihood(store, ws.to_snapshot(), config.model);
        if (epoch > 1 && prev_nll - nll < opts.tol * std::abs(prev_nll)) break;
        prev_nll = nll;
    }
    return drop_floor(ws.to_snapshot(), config.drop_threshold());
}

}  // namespace diffpath
