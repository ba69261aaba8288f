#pragma once

#include <functional>

namespace otrank {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
    int intervals = 0;
};

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
};

// Globally adaptive 7/15-point Gauss-Kronrod quadrature on a finite [a, b].
// The interval with the largest error estimate is bisected until the summed
// estimate meets max(abs_tol, rel_tol * |value|).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts = {});

}  // namespace otrank
