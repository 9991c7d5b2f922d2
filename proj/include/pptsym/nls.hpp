#pragma once

#include "pptsym/linalg.hpp"

#include <functional>

namespace pptsym {

using ResidualFn = std::function<void(const RVec& x, RVec& r)>;

struct LsqResult {
    RVec x;
    double residual_norm = 0.0;
    int evaluations = 0;
};

// Levenberg-Marquardt with forward-difference Jacobian (Eigen unsupported
// module). m is the residual length and must be >= x0.size().
LsqResult least_squares(const ResidualFn& f, int m, const RVec& x0, int max_evals = 4000);

}  // namespace pptsym
