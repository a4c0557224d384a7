#pragma once

#include <vector>

#include "diffpath/types.hpp"

namespace diffpath {

// Pairwise transmission likelihood pieces. All three families factor the same
// way: -log S(t_dst | t_src; a) = a * survival_factor(dt) and
// H(t_dst | t_src; a) = a * hazard_rate_factor(dt), so the per-node hazard is
// linear in the rate vector.
//
//   family        -log S / a        H / a        support
//   exponential   dt                1            dt > 0
//   power law     log(dt / delta)   1 / dt       dt > delta
//   rayleigh      dt^2 / 2          dt           dt > 0

namespace detail {

// true when (t_src, t_dst) lies inside the model's transmission support
bool pair_active(const transmission_model& m, double dt);

double survival_factor(const transmission_model& m, double dt);
double hazard_rate_factor(const transmission_model& m, double dt);

}  // namespace detail

double log_survival(const transmission_model& m, double t_src, double t_dst, double alpha);
double hazard(const transmission_model& m, double t_src, double t_dst, double alpha);

// Density of transmission at t_dst given infection of the source at t_src.
// Total in the time arguments: returns 0 outside the support.
double transmission_density(const transmission_model& m, double t_src, double t_dst,
                            double alpha);

// Sum of pairwise hazards at time t over stored in-edges of dst whose source
// was infected strictly before t.
double node_total_hazard(const cascade& c, node_id dst, double t, const rate_snapshot& rates,
                         const transmission_model& m);

// Derivative of the cascade's negative log-likelihood in the rate of edge
// (src, dst) when both endpoints are infected with t_src < t_dst.
double grad_edge_infected(const transmission_model& m, const cascade& c, node_id src,
                          node_id dst, const rate_snapshot& rates);

// Derivative contribution of one uninfected-target survival term; does not
// depend on the current rate.
double grad_edge_uninfected(const transmission_model& m, double t_src, double horizon);

// Negative log-likelihood of a cascade under the given rates. Only stored
// edges contribute; throws unexplained_infection if some non-root infected
// node has zero total hazard.
double cascade_neg_log_likelihood(const cascade& c, const rate_snapshot& rates,
                                  const transmission_model& m);

struct edge_gradient {
    node_id src = 0;
    node_id dst = 0;
    double value = 0.0;
};

// Full gradient of the cascade's negative log-likelihood over all stored
// edges whose source is infected. Edges outside the model support or with an
// uninfected source contribute nothing and are omitted.
std::vector<edge_gradient> cascade_gradient(const cascade& c, const rate_snapshot& rates,
                                            const transmission_model& m);

}  // namespace diffpath
