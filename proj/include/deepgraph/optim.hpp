#pragma once

#include <string>
#include <vector>

#include "deepgraph/matrix.hpp"

namespace deepgraph {

struct Parameter {
    std::string name;
    DenseMatrix value;
    DenseMatrix grad;

    Parameter() = default;
    Parameter(std::string n, DenseMatrix v)
        : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}

    void zero_grad() { grad.set_zero(); }
};

// RMSProp: s <- decay*s + (1-decay)*g^2 ; w <- w - lr*g/(sqrt(s)+eps).
class RmsProp {
public:
    explicit RmsProp(double decay = 0.9, double epsilon = 1e-8);

    // Applies one update to every parameter and zeroes the gradients.
    void step(std::vector<Parameter*>& params, double lr);

    double decay() const { return decay_; }
    double epsilon() const { return epsilon_; }

private:
    double decay_;
    double epsilon_;
    std::vector<DenseMatrix> mean_square_;
};

}  // namespace deepgraph
