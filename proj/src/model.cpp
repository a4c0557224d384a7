#include "diffpath/model.hpp"

#include <cmath>
#include <stdexcept>

namespace diffpath {

namespace detail {

bool pair_active(const transmission_model& m, double dt) {
    if (m.family == model_family::power_law) return dt > m.delta;
    return dt > 0.0;
}

double survival_factor(const transmission_model& m, double dt) {
    switch (m.family) {
        case model_family::exponential: return dt;
        case model_family::power_law: return std::log(dt / m.delta);
        case model_family::rayleigh: return 0.5 * dt * dt;
    }
    return 0.0;
}

double hazard_rate_factor(const transmission_model& m, double dt) {
    switch (m.family) {
        case model_family::exponential: return 1.0;
        case model_family::power_law: return 1.0 / dt;
        case model_family::rayleigh: return dt;
    }
    return 0.0;
}

namespace {

double checked_dt(const transmission_model& m, double t_src, double t_dst) {
    const double dt = t_dst - t_src;
    if (!pair_active(m, dt))
        throw std::domain_error("transmission time ordering violated (dt=" +
                                std::to_string(dt) + ")");
    return dt;
}

void check_alpha(double alpha) {
    if (alpha < 0.0) throw std::domain_error("transmission rate must be non-negative");
}

}  // namespace

}  // namespace detail

double log_survival(const transmission_model& m, double t_src, double t_dst, double alpha) {
    detail::check_alpha(alpha);
    const double dt = detail::checked_dt(m, t_src, t_dst);
    return -alpha * detail::survival_factor(m, dt);
}

double hazard(const transmission_model& m, double t_src, double t_dst, double alpha) {
    detail::check_alpha(alpha);
    const double dt = detail::checked_dt(m, t_src, t_dst);
    return alpha * detail::hazard_rate_factor(m, dt);
}

double transmission_density(const transmission_model& m, double t_src, double t_dst,
                            double alpha) {
    detail::check_alpha(alpha);
    const double dt = t_dst - t_src;
    if (!detail::pair_active(m, dt)) return 0.0;
    const double haz = alpha * detail::hazard_rate_factor(m, dt);
    return haz * std::exp(-alpha * detail::survival_factor(m, dt));
}

double node_total_hazard(const cascade& c, node_id dst, double t, const rate_snapshot& rates,
                         const transmission_model& m) {
    double sum = 0.0;
    for (const auto& ev : c.events()) {
        if (ev.time >= t) break;  // events sorted
        if (ev.node == dst) continue;
        const double a = rates.rate(ev.node, dst);
        if (a <= 0.0) continue;
        const double dt = t - ev.time;
        if (!detail::pair_active(m, dt)) continue;
        sum += a * detail::hazard_rate_factor(m, dt);
    }
    return sum;
}

double grad_edge_infected(const transmission_model& m, const cascade& c, node_id src,
                          node_id dst, const rate_snapshot& rates) {
    const auto ts = c.time_of(src);
    const auto td = c.time_of(dst);
    if (!ts || !td) throw std::domain_error("grad_edge_infected: both endpoints must be infected");
    const double dt = detail::checked_dt(m, *ts, *td);
    const double h = node_total_hazard(c, dst, *td, rates, m);
    if (h <= 0.0) throw unexplained_infection(dst);
    return detail::survival_factor(m, dt) - detail::hazard_rate_factor(m, dt) / h;
}

double grad_edge_uninfected(const transmission_model& m, double t_src, double horizon) {
    if (m.family == model_family::power_law) {
        if (!(horizon - t_src > m.delta))
            throw std::domain_error("grad_edge_uninfected: horizon within power-law offset");
    } else if (horizon < t_src) {
        throw std::domain_error("grad_edge_uninfected: horizon precedes source infection");
    }
    return detail::survival_factor(m, horizon - t_src);
}

double cascade_neg_log_likelihood(const cascade& c, const rate_snapshot& rates,
                                  const transmission_model& m) {
    const double horizon = c.horizon();
    std::unordered_map<node_id, double> hazard_sum;
    double nll = 0.0;

    for (const auto& [key, alpha] : rates.rates()) {
        const auto [s, d] = edge_nodes(key);
        const auto ts = c.time_of(s);
        if (!ts) continue;
        const auto td = c.time_of(d);
        if (td) {
            const double dt = *td - *ts;
            if (!detail::pair_active(m, dt)) continue;
            nll += alpha * detail::survival_factor(m, dt);
            hazard_sum[d] += alpha * detail::hazard_rate_factor(m, dt);
        } else {
            const double dt = horizon - *ts;
            if (!detail::pair_active(m, dt)) continue;
            nll += alpha * detail::survival_factor(m, dt);
        }
    }

    const auto& events = c.events();
    for (std::size_t i = 1; i < events.size(); ++i) {
        auto it = hazard_sum.find(events[i].node);
        const double h = it == hazard_sum.end() ? 0.0 : it->second;
        if (h <= 0.0) throw unexplained_infection(events[i].node);
        nll -= std::log(h);
    }
    return nll;
}

std::vector<edge_gradient> cascade_gradient(const cascade& c, const rate_snapshot& rates,
                                            const transmission_model& m) {
    const double horizon = c.horizon();
    std::unordered_map<node_id, double> hazard_sum;
    for (const auto& [key, alpha] : rates.rates()) {
        const auto [s, d] = edge_nodes(key);
        const auto ts = c.time_of(s);
        if (!ts) continue;
        const auto td = c.time_of(d);
        if (!td) continue;
        const double dt = *td - *ts;
        if (!detail::pair_active(m, dt)) continue;
        hazard_sum[d] += alpha * detail::hazard_rate_factor(m, dt);
    }

    std::vector<edge_gradient> out;
    for (const auto& [key, alpha] : rates.rates()) {
        const auto [s, d] = edge_nodes(key);
        const auto ts = c.time_of(s);
        if (!ts) continue;
        const auto td = c.time_of(d);
        if (td) {
            const double dt = *td - *ts;
            if (!detail::pair_active(m, dt)) continue;
            // hazard_sum[d] includes this edge's own term, so it is positive
            const double g = detail::survival_factor(m, dt) -
                             detail::hazard_rate_factor(m, dt) / hazard_sum[d];
            out.push_back({s, d, g});
        } else {
            const double dt = horizon - *ts;
            if (!detail::pair_active(m, dt)) continue;
            out.push_back({s, d, detail::survival_factor(m, dt)});
        }
    }
    return out;
}

}  // namespace diffpath
