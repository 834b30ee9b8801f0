#include "deepgraph/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace deepgraph {

GradCheckReport finite_difference_check(const std::function<double()>& loss_fn,
                                        const std::vector<Parameter*>& params, double eps,
                                        int min_coords, Rng& rng) {
    if (params.empty()) throw std::invalid_argument("finite_difference_check: no parameters");
    std::size_t total = 0;
    for (const Parameter* p : params) total += p->value.size();
    if (total == 0) throw std::invalid_argument("finite_difference_check: empty parameters");

    GradCheckReport report;
    const int per_group =
        std::max(1, (min_coords + int(params.size()) - 1) / int(params.size()));

    for (Parameter* p : params) {
        GradCheckGroup group;
        group.name = p->name;
        const int n = int(p->value.size());
        std::vector<int> coords;
        if (n <= per_group) {
            coords.resize(std::size_t(n));
            for (int i = 0; i < n; ++i) coords[std::size_t(i)] = i;
        } else {
            coords = rng.sample_without_replacement(n, per_group);
        }
        for (int c : coords) {
            double& w = p->value.data[std::size_t(c)];
            const double saved = w;
            const double analytic = p->grad.data[std::size_t(c)];
            // Central differences at eps plus two coarser probes: the fine
            // probe bounds the truncation error, the coarse ones the rounding
            // noise on coordinates with tiny gradients. A wrong analytic
            // gradient disagrees at every scale.
            double rel = std::numeric_limits<double>::infinity();
            for (const double scale : {1.0, 16.0, 256.0}) {
                const double h = eps * scale;
                w = saved + h;
                const double f_plus = loss_fn();
                w = saved - h;
                const double f_minus = loss_fn();
                w = saved;
                if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
                    throw std::runtime_error("finite_difference_check: non-finite loss");
                }
                const double numeric = (f_plus - f_minus) / (2.0 * h);
                const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
                rel = std::min(rel, std::fabs(analytic - numeric) / denom);
                if (rel < 1e-9) break;
            }
            group.max_relative_error = std::max(group.max_relative_error, rel);
            ++group.coords_checked;
        }
        report.max_relative_error = std::max(report.max_relative_error, group.max_relative_error);
        report.coords_checked += group.coords_checked;
        report.groups.push_back(std::move(group));
    }
    return report;
}

}  // namespace deepgraph
