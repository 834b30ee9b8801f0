#include "deepgraph/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace deepgraph {

RmsProp::RmsProp(double decay, double epsilon) : decay_(decay), epsilon_(epsilon) {
    if (decay <= 0.0 || decay >= 1.0) throw std::invalid_argument("rmsprop: decay must be in (0,1)");
    if (epsilon <= 0.0) throw std::invalid_argument("rmsprop: epsilon must be > 0");
}

void RmsProp::step(std::vector<Parameter*>& params, double lr) {
    if (mean_square_.empty()) {
        mean_square_.reserve(params.size());
        for (const Parameter* p : params) mean_square_.emplace_back(p->value.rows, p->value.cols);
    }
    if (mean_square_.size() != params.size()) {
        throw std::invalid_argument("rmsprop: parameter set changed between steps");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        DenseMatrix& s = mean_square_[k];
        if (!s.same_shape(p.value)) throw std::invalid_argument("rmsprop: parameter shape changed");
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad.data[i];
            double& si = s.data[i];
            si = decay_ * si + (1.0 - decay_) * g * g;
            p.value.data[i] -= lr * g / (std::sqrt(si) + epsilon_);
        }
        p.zero_grad();
    }
}

}  // namespace deepgraph
