#pragma once

#include "pptsym/linalg.hpp"

#include <vector>

namespace pptsym::poly {

// Coefficient vectors in ascending powers: p[0] + p[1] x + ...
using Poly = std::vector<cplx>;

Poly add(const Poly& a, const Poly& b);
Poly mul(const Poly& a, const Poly& b);
Poly scale(const Poly& a, cplx s);
Poly pow(const Poly& a, int n);
cplx eval(const Poly& p, cplx x);
cplx deriv_eval(const Poly& p, cplx x);
// Drops leading coefficients with |c| <= rel * max|c|.
Poly trim(const Poly& p, double rel = 1e-13);
int degree(const Poly& p);

// All roots via companion-matrix eigenvalues followed by a few Newton
// steps on the original coefficients.
std::vector<cplx> roots(const Poly& p);

}  // namespace pptsym::poly
