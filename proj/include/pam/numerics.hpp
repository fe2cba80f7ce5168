#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pam::num {

struct RootResult {
    double x;
    double fx;
    int iterations;
    bool converged;
};

/// Brent's bracketing root finder (inverse quadratic / secant steps safeguarded by
/// bisection). Requires f(a) and f(b) of opposite sign (or one of them zero).
RootResult brent(const std::function<double(double)>& f, double a, double b, double xtol = 1e-13,
                 int max_iter = 200);

/// Plain bisection on a sign change; slower but independent of brent().
RootResult bisect(const std::function<double(double)>& f, double a, double b, double xtol = 1e-14,
                  int max_iter = 400);

struct Extremum {
    double x;
    double fx;
};

/// Golden-section search for the minimum of a unimodal function on [a, b].
Extremum golden_minimize(const std::function<double(double)>& f, double a, double b, double xtol = 1e-10);

/// Golden-section search for the maximum of a unimodal function on [a, b].
Extremum golden_maximize(const std::function<double(double)>& f, double a, double b, double xtol = 1e-10);

struct LinearFit {
    double slope;
    double intercept;
    double slope_stderr;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Neumaier-compensated summation, used for order-stable reductions.
class CompensatedSum {
public:
    void add(double v) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// log(sum_i w_i exp(x_i)) computed stably; weights must be nonnegative.
double log_sum_exp(std::span<const double> x, std::span<const double> weights);

/// Mean and standard error of the mean from batch means (nbatch contiguous blocks).
struct MeanWithError {
    double mean;
    double stderr_;
};
MeanWithError batch_mean(std::span<const double> values, std::size_t nbatch = 100);

/// Evenly spaced grid of n >= 2 points on [a, b].
std::vector<double> linspace(double a, double b, std::size_t n);

/// True if consecutive secant slopes are nondecreasing within tol (discrete convexity
/// on a possibly non-uniform grid).
bool discretely_convex(std::span<const double> x, std::span<const double> y, double tol);

}  // namespace pam::num
