#include "pptsym/nls.hpp"

#include "pptsym/errors.hpp"

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace pptsym {

namespace {
struct Functor {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = RVec;
    using ValueType = RVec;
    using JacobianType = RMat;

    const ResidualFn* f;
    int n, m;
    int values() const { return m; }
    int inputs() const { return n; }
    int operator()(const RVec& x, RVec& r) const {
        r.resize(m);
        (*f)(x, r);
        return 0;
    }
};
}  // namespace

LsqResult least_squares(const ResidualFn& f, int m, const RVec& x0, int max_evals) {
    const int n = static_cast<int>(x0.size());
    if (m < n) throw PreconditionError("least_squares: fewer residuals than unknowns");
    Functor fn{&f, n, m};
    Eigen::NumericalDiff<Functor> nd(fn);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor>> lm(nd);
    lm.parameters.maxfev = max_evals;
    lm.parameters.xtol = 1e-15;
    lm.parameters.ftol = 1e-15;
    RVec x = x0;
    lm.minimize(x);
    RVec r(m);
    f(x, r);
    return {x, r.norm(), static_cast<int>(lm.nfev)};
}

}  // namespace pptsym
