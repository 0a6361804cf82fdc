#include "prodisp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "prodisp/errors.hpp"

namespace prodisp {

namespace {

// QUADPACK qk15 nodes and weights (positive half; node 7 is the midpoint).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
};

void gk15(const std::function<double(double)>& f, double a, double b, Segment& out) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double result_gauss = kWg[3] * fc;
    double result_kronrod = kWgk[7] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        result_kronrod += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) result_gauss += kWg[j / 2] * (f1 + f2);
    }
    out.a = a;
    out.b = b;
    out.value = result_kronrod * half;
    out.error = std::abs((result_kronrod - result_gauss) * half);
}

} // namespace

double QuadResult::rel_error() const {
    const double denom = std::max(std::abs(value), 1e-300);
    return error / denom;
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts) {
    QuadResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    std::vector<Segment> segs(1);
    gk15(f, a, b, segs[0]);
    res.evaluations = 15;
    for (;;) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        res.value = total;
        res.error = err;
        const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
        if (err <= target || !std::isfinite(err)) {
            res.converged = err <= target;
            return res;
        }
        if (static_cast<int>(segs.size()) >= opts.max_intervals) {
            res.converged = false;
            return res;
        }
        const Segment s = segs[worst];
        const double mid = 0.5 * (s.a + s.b);
        if (mid == s.a || mid == s.b) { // interval at rounding limit
            res.converged = false;
            return res;
        }
        Segment left, right;
        gk15(f, s.a, mid, left);
        gk15(f, mid, s.b, right);
        res.evaluations += 30;
        segs[worst] = left;
        segs.push_back(right);
    }
}

QuadResult integrate_upper(const std::function<double(double)>& f, double lo,
                           double scale, const QuadOptions& opts) {
    auto g = [&f, lo, scale](double u) {
        const double om = 1.0 - u;
        const double c = lo + scale * u / om;
        if (!std::isfinite(c)) return 0.0;
        const double jac = scale / (om * om);
        const double v = f(c);
        return std::isfinite(v) ? v * jac : 0.0;
    };
    return integrate(g, 0.0, 1.0, opts);
}

namespace {

double check(const QuadResult& r, const char* what) {
    if (!r.converged)
        throw ConvergenceError(std::string(what) + ": quadrature did not converge (error estimate " +
                                   std::to_string(r.error) + " after " +
                                   std::to_string(r.evaluations) + " evaluations)",
                               r.error);
    return r.value;
}

} // namespace

double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadOptions& opts, const char* what) {
    return check(integrate(f, a, b, opts), what);
}

double integrate_upper_or_throw(const std::function<double(double)>& f, double lo,
                                double scale, const QuadOptions& opts, const char* what) {
    return check(integrate_upper(f, lo, scale, opts), what);
}

} // namespace prodisp
