#pragma once

#include <functional>
#include <string>
#include <vector>

#include "deepgraph/optim.hpp"
#include "deepgraph/rng.hpp"

namespace deepgraph {

struct GradCheckGroup {
    std::string name;
    double max_relative_error = 0.0;
    int coords_checked = 0;
};

struct GradCheckReport {
    double max_relative_error = 0.0;
    int coords_checked = 0;
    std::vector<GradCheckGroup> groups;
};

// Central-difference check of the analytic gradients already stored in the
// parameters. `loss_fn` must be deterministic (no dropout, frozen sampling)
// and re-evaluate the loss at the parameters' current values. At least
// `min_coords` coordinates are probed, spread over the parameter groups;
// relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
GradCheckReport finite_difference_check(const std::function<double()>& loss_fn,
                                        const std::vector<Parameter*>& params, double eps,
                                        int min_coords, Rng& rng);

}  // namespace deepgraph
