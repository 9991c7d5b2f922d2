#include "pptsym/poly.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace pptsym::poly {

Poly add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), cplx(0));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

Poly mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, cplx(0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

Poly scale(const Poly& a, cplx s) {
    Poly r(a);
    for (auto& c : r) c *= s;
    return r;
}

Poly pow(const Poly& a, int n) {
    Poly r{cplx(1)};
    for (int i = 0; i < n; ++i) r = mul(r, a);
    return r;
}

cplx eval(const Poly& p, cplx x) {
    cplx r(0);
    for (size_t i = p.size(); i-- > 0;) r = r * x + p[i];
    return r;
}

cplx deriv_eval(const Poly& p, cplx x) {
    cplx r(0);
    for (size_t i = p.size(); i-- > 1;) r = r * x + p[i] * static_cast<double>(i);
    return r;
}

Poly trim(const Poly& p, double rel) {
    double m = 0;
    for (auto& c : p) m = std::max(m, std::abs(c));
    Poly r(p);
    while (!r.empty() && std::abs(r.back()) <= rel * m) r.pop_back();
    return r;
}

int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

std::vector<cplx> roots(const Poly& p_in) {
    Poly p = trim(p_in);
    int n = degree(p);
    std::vector<cplx> out;
    if (n < 1) return out;
    CMat comp = CMat::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -p[i] / p[n];
    Eigen::ComplexEigenSolver<CMat> es(comp, false);
    for (int i = 0; i < n; ++i) {
        cplx z = es.eigenvalues()(i);
        for (int it = 0; it < 4; ++it) {
            cplx d = deriv_eval(p, z);
            if (std::abs(d) == 0) break;
            cplx step = eval(p, z) / d;
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
            if (std::abs(step) > 1e-3 * std::max(1.0, std::abs(z))) break;
            z -= step;
        }
        out.push_back(z);
    }
    return out;
}

}  // namespace pptsym::poly
