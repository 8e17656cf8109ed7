#pragma once

#include <functional>

namespace catmmv {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_subdivisions = 10000;
};

// Adaptive Gauss-Kronrod (G7,K15) on a finite interval.  Throws QuadratureFailure
// if the error estimate cannot be brought under tolerance within the subdivision
// budget.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

// Integral over (a, +inf) via the rational tail map z = a + u/(1-u), u in (0,1).
// Suited to integrands with an exponentially decaying tail.
double integrate_upper_infinite(const std::function<double(double)>& f, double a,
                                const QuadratureOptions& opts = {});

}  // namespace catmmv
