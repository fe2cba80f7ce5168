#include "pam/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pam/errors.hpp"

namespace pam::num {

RootResult brent(const std::function<double(double)>& f, double a, double b, double xtol, int max_iter) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return {a, fa, 0, true};
    if (fb == 0.0) return {b, fb, 0, true};
    if ((fa > 0.0) == (fb > 0.0)) throw PreconditionError("brent: root not bracketed");
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 1; iter <= max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return {b, fb, iter, true};
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
    }
    return {b, fb, max_iter, false};
}

RootResult bisect(const std::function<double(double)>& f, double a, double b, double xtol, int max_iter) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return {a, fa, 0, true};
    if (fb == 0.0) return {b, fb, 0, true};
    if ((fa > 0.0) == (fb > 0.0)) throw PreconditionError("bisect: root not bracketed");
    for (int iter = 1; iter <= max_iter; ++iter) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0 || 0.5 * std::abs(b - a) < xtol) return {m, fm, iter, true};
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    return {0.5 * (a + b), f(0.5 * (a + b)), max_iter, false};
}

Extremum golden_minimize(const std::function<double(double)>& f, double a, double b, double xtol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (std::abs(b - a) > xtol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? Extremum{x1, f1} : Extremum{x2, f2};
}

Extremum golden_maximize(const std::function<double(double)>& f, double a, double b, double xtol) {
    auto r = golden_minimize([&](double x) { return -f(x); }, a, b, xtol);
    return {r.x, -r.fx};
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw PreconditionError("least_squares: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double icpt = my - slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - icpt - slope * x[i];
        sse += r * r;
    }
    const double se = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
    return {slope, icpt, se};
}

void CompensatedSum::add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
    else comp_ += (v - t) + sum_;
    sum_ = t;
}

double log_sum_exp(std::span<const double> x, std::span<const double> weights) {
    double m = -INFINITY;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (weights[i] > 0.0) m = std::max(m, x[i]);
    if (!std::isfinite(m)) return m;
    CompensatedSum s;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (weights[i] > 0.0) s.add(weights[i] * std::exp(x[i] - m));
    return m + std::log(s.value());
}

MeanWithError batch_mean(std::span<const double> values, std::size_t nbatch) {
    const std::size_t n = values.size();
    if (n == 0) throw PreconditionError("batch_mean: empty input");
    CompensatedSum total;
    for (double v : values) total.add(v);
    const double mean = total.value() / static_cast<double>(n);
    nbatch = std::min(nbatch, n);
    if (nbatch < 2) return {mean, 0.0};
    const std::size_t len = n / nbatch;
    std::vector<double> means(nbatch);
    for (std::size_t b = 0; b < nbatch; ++b) {
        CompensatedSum s;
        for (std::size_t i = b * len; i < (b + 1) * len; ++i) s.add(values[i]);
        means[b] = s.value() / static_cast<double>(len);
    }
    double bm = 0.0;
    for (double m : means) bm += m;
    bm /= static_cast<double>(nbatch);
    double var = 0.0;
    for (double m : means) var += (m - bm) * (m - bm);
    var /= static_cast<double>(nbatch - 1);
    return {mean, std::sqrt(var / static_cast<double>(nbatch))};
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    if (n < 2) throw PreconditionError("linspace: need at least two points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = b;
    return g;
}

bool discretely_convex(std::span<const double> x, std::span<const double> y, double tol) {
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double s1 = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        const double s2 = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        if (s2 < s1 - tol) return false;
    }
    return true;
}

}  // namespace pam::num
