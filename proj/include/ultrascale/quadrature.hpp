#pragma once

#include <functional>

namespace us {

struct QuadResult {
    double value = 0;
    double error = 0;  // Kronrod minus Gauss, summed over panels
    long evals = 0;
    bool converged = false;
};

using Integrand = std::function<double(double)>;

// One 15-point Kronrod panel with the embedded 7-point Gauss error estimate.
QuadResult gk15(const Integrand& f, double a, double b);

// Global adaptive bisection of the worst panel until the summed estimate meets the tolerance.
QuadResult integrate_adaptive(const Integrand& f, double a, double b, double abs_tol = 0.0,
                              double rel_tol = 1e-13, long max_panels = 4096);

// n equal Kronrod panels, no adaptation.
QuadResult integrate_panels(const Integrand& f, double a, double b, long n);

}
