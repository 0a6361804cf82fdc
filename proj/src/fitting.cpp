#include "prodisp/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include "prodisp/errors.hpp"
#include "prodisp/special.hpp"

namespace prodisp {

namespace {

void require_positive(const std::vector<double>& v, const char* who) {
    for (double x : v)
        if (!(x > 0.0) || !std::isfinite(x))
            throw ValidationError(std::string(who) + ": sample values must be positive and finite");
}

} // namespace

std::vector<RankPoint> rank_size(std::vector<double> samples) {
    if (samples.empty()) throw ValidationError("rank_size: nonempty sample required");
    require_positive(samples, "rank_size");
    std::stable_sort(samples.begin(), samples.end(), std::greater<>());
    const double n = static_cast<double>(samples.size());
    std::vector<RankPoint> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        out[i] = {samples[i], static_cast<double>(i + 1) / n};
    return out;
}

std::vector<RankPoint> rank_size_weighted(std::vector<double> values,
                                          std::vector<double> weights) {
    if (values.empty() || values.size() != weights.size())
        throw ValidationError("rank_size_weighted: matching nonempty vectors required");
    require_positive(values, "rank_size_weighted");
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&values](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ValidationError("rank_size_weighted: weights must be >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("rank_size_weighted: zero total weight");
    std::vector<RankPoint> out(values.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        acc += weights[idx[r]];
        out[r] = {values[idx[r]], acc / total};
    }
    return out;
}

ParetoFit hill_estimator(const std::vector<double>& samples, double tail_fraction, long n_floor) {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw ValidationError("hill: tail fraction must be in (0,1)");
    require_positive(samples, "hill");
    const long n = static_cast<long>(samples.size());
    const long k = static_cast<long>(std::ceil(tail_fraction * static_cast<double>(n)));
    if (k < n_floor || k + 1 > n)
        throw ValidationError("hill: insufficient tail (k = " + std::to_string(k) +
                              ", floor = " + std::to_string(n_floor) + ")");
    std::vector<double> s(samples);
    std::stable_sort(s.begin(), s.end(), std::greater<>());
    const double threshold = s[static_cast<std::size_t>(k)];
    double acc = 0.0;
    for (long i = 0; i < k; ++i) acc += std::log(s[static_cast<std::size_t>(i)] / threshold);
    if (!(acc > 0.0)) throw DomainError("hill: zero log spread in the tail (degenerate sample)");
    ParetoFit fit;
    fit.mu_hat = static_cast<double>(k) / acc;
    fit.c0_hat = threshold;
    fit.fit_lo = threshold;
    fit.fit_hi = s.front();
    fit.std_error = fit.mu_hat / std::sqrt(static_cast<double>(k));
    fit.n_tail = k;
    fit.method = "hill";
    return fit;
}

ParetoFit hill_weighted(const std::vector<double>& values, const std::vector<double>& weights,
                        double tail_fraction, long n_floor) {
    if (values.empty() || values.size() != weights.size())
        throw ValidationError("hill_weighted: matching nonempty vectors required");
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw ValidationError("hill_weighted: tail fraction must be in (0,1)");
    require_positive(values, "hill_weighted");
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&values](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    double total = 0.0;
    for (double w : weights) total += w;
    const double target = tail_fraction * total;

    double wtail = 0.0, wsq = 0.0;
    std::size_t m = 0;
    while (m < idx.size() && wtail < target) {
        wtail += weights[idx[m]];
        wsq += weights[idx[m]] * weights[idx[m]];
        ++m;
    }
    if (m + 1 > idx.size() || static_cast<long>(m) < n_floor)
        throw ValidationError("hill_weighted: insufficient tail (atoms = " + std::to_string(m) +
                              ", floor = " + std::to_string(n_floor) + ")");
    const double threshold = values[idx[m]];
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        acc += weights[idx[i]] * std::log(values[idx[i]] / threshold);
    if (!(acc > 0.0)) throw DomainError("hill_weighted: zero log spread in the tail");
    ParetoFit fit;
    fit.mu_hat = wtail / acc;
    fit.c0_hat = threshold;
    fit.fit_lo = threshold;
    fit.fit_hi = values[idx.front()];
    const double k_eff = wtail * wtail / wsq;
    fit.std_error = fit.mu_hat / std::sqrt(k_eff);
    fit.n_tail = static_cast<long>(m);
    fit.method = "hill";
    return fit;
}

double hill_window_weighted(const std::vector<double>& values,
                            const std::vector<double>& weights, double lo, double hi) {
    if (values.size() != weights.size())
        throw ValidationError("hill_window_weighted: size mismatch");
    if (!(lo > 0.0 && hi > lo)) throw ValidationError("hill_window_weighted: bad window");
    double w = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] <= lo || values[i] > hi) continue;
        w += weights[i];
        acc += weights[i] * std::log(values[i] / lo);
    }
    if (!(acc > 0.0)) throw DomainError("hill_window_weighted: empty or degenerate window");
    return w / acc;
}

ParetoFit hill_weighted_threshold(const std::vector<double>& values,
                                  const std::vector<double>& weights, double threshold,
                                  long n_floor) {
    if (values.empty() || values.size() != weights.size())
        throw ValidationError("hill_weighted_threshold: matching nonempty vectors required");
    if (!(threshold > 0.0)) throw ValidationError("hill_weighted_threshold: threshold must be > 0");
    double wt = 0.0, wsq = 0.0, acc = 0.0, hi = 0.0;
    long atoms = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0))
            throw ValidationError("hill_weighted_threshold: values must be positive");
        if (values[i] <= threshold) continue;
        wt += weights[i];
        wsq += weights[i] * weights[i];
        acc += weights[i] * std::log(values[i] / threshold);
        hi = std::max(hi, values[i]);
        ++atoms;
    }
    if (atoms < n_floor)
        throw ValidationError("hill_weighted_threshold: insufficient tail (atoms = " +
                              std::to_string(atoms) + ", floor = " + std::to_string(n_floor) +
                              ")");
    if (!(acc > 0.0)) throw DomainError("hill_weighted_threshold: zero log spread in the tail");
    ParetoFit fit;
    fit.mu_hat = wt / acc;
    fit.c0_hat = threshold;
    fit.fit_lo = threshold;
    fit.fit_hi = hi;
    fit.std_error = fit.mu_hat / std::sqrt(wt * wt / wsq);
    fit.n_tail = atoms;
    fit.method = "hill";
    return fit;
}

namespace {

// mean log-likelihood and gradient in theta = (ln a, ln b, ln p, ln q)
struct Gb2Objective {
    const std::vector<double>& x;
    std::vector<double> logx;

    explicit Gb2Objective(const std::vector<double>& samples) : x(samples) {
        logx.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) logx[i] = std::log(x[i]);
    }

    double eval(const std::array<double, 4>& th, std::array<double, 4>* grad) const {
        const double a = std::exp(th[0]);
        const double p = std::exp(th[2]), q = std::exp(th[3]);
        const double lb = th[1];
        const double dg_p = digamma(p), dg_q = digamma(q), dg_pq = digamma(p + q);
        const double lbeta = std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
        const double n = static_cast<double>(x.size());

        double ll = 0.0;
        double ga = 0.0, gb = 0.0, gp = 0.0, gq = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = logx[i] - lb; // ln(x/b)
            const double s = a * t;
            // one exp serves softplus and sigmoid
            const double e = std::exp(-std::abs(s));
            const double l1p = std::log1p(e);
            const double soft = s > 0.0 ? s + l1p : l1p;
            const double u = s > 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e); // z/(1+z)
            ll += (a * p - 1.0) * logx[i] - (p + q) * soft;
            if (grad) {
                const double pq_u = (p + q) * u;
                ga += 1.0 + a * t * (p - pq_u);
                gb += -a * (p - pq_u);
                gp += p * (a * t - dg_p + dg_pq - soft);
                gq += q * (-dg_q + dg_pq - soft);
            }
        }
        ll = ll / n + std::log(a) - a * p * lb - lbeta;
        if (grad) {
            // constant parts of the a and b components
            (*grad)[0] = ga / n; // includes +1 from d ln a/d ln a via the loop
            (*grad)[1] = gb / n;
            (*grad)[2] = gp / n;
            (*grad)[3] = gq / n;
        }
        return ll;
    }
};

struct BfgsOutcome {
    std::array<double, 4> theta{};
    double value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> ll_trace;
};

constexpr double kGradTol = 1e-8;

BfgsOutcome bfgs_maximize(const Gb2Objective& obj, std::array<double, 4> th, int max_iter = 400) {
    std::array<std::array<double, 4>, 4> h{}; // inverse Hessian approx (of -ll)
    for (int i = 0; i < 4; ++i) h[i][i] = 1.0;
    std::array<double, 4> g{};
    double f = obj.eval(th, &g);

    BfgsOutcome out;
    auto inf_norm = [](const std::array<double, 4>& v) {
        double m = 0.0;
        for (double c : v) m = std::max(m, std::abs(c));
        return m;
    };
    int stalled = 0;
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it;
        out.grad_norm = inf_norm(g);
        if (!std::isfinite(f) || !std::isfinite(out.grad_norm)) break;
        if (out.grad_norm <= kGradTol) {
            out.converged = true;
            break;
        }
        // ascent direction d = H g
        std::array<double, 4> d{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) d[i] += h[i][j] * g[j];
        double dg = 0.0;
        for (int i = 0; i < 4; ++i) dg += d[i] * g[i];
        if (!(dg > 0.0)) { // reset to steepest ascent
            for (int i = 0; i < 4; ++i) {
                d[i] = g[i];
                for (int j = 0; j < 4; ++j) h[i][j] = i == j ? 1.0 : 0.0;
            }
            dg = 0.0;
            for (int i = 0; i < 4; ++i) dg += g[i] * g[i];
        }
        // Armijo backtracking; accepted steps never decrease the likelihood
        double step = 1.0;
        std::array<double, 4> th_new{}, g_new{};
        double f_new = -1e308;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            for (int i = 0; i < 4; ++i) th_new[i] = th[i] + step * d[i];
            f_new = obj.eval(th_new, &g_new);
            if (std::isfinite(f_new) && f_new >= f + 1e-4 * step * dg) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        // progress at rounding level: the quadratic model has bottomed out
        if (f_new - f <= 1e-14 * (1.0 + std::abs(f))) {
            if (++stalled >= 3) {
                th = th_new;
                f = f_new;
                g = g_new;
                out.ll_trace.push_back(f);
                break;
            }
        } else {
            stalled = 0;
        }
        // BFGS update on minimization of -f: y = -(g_new - g), s = th_new - th
        std::array<double, 4> s{}, y{};
        for (int i = 0; i < 4; ++i) {
            s[i] = th_new[i] - th[i];
            y[i] = g[i] - g_new[i];
        }
        double sy = 0.0;
        for (int i = 0; i < 4; ++i) sy += s[i] * y[i];
        if (sy > 1e-14) {
            std::array<double, 4> hy{};
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) hy[i] += h[i][j] * y[j];
            double yhy = 0.0;
            for (int i = 0; i < 4; ++i) yhy += y[i] * hy[i];
            const double rho = 1.0 / sy;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    h[i][j] += ((1.0 + yhy * rho) * s[i] * s[j]) * rho -
                               (hy[i] * s[j] + s[i] * hy[j]) * rho;
        }
        th = th_new;
        f = f_new;
        g = g_new;
        out.ll_trace.push_back(f);
    }
    out.theta = th;
    out.value = f;
    out.grad_norm = inf_norm(g);
    if (out.grad_norm <= kGradTol && std::isfinite(f)) out.converged = true;
    return out;
}

// 4x4 symmetric solve for the observed-information covariance
bool invert4(std::array<std::array<double, 4>, 4> m, std::array<std::array<double, 4>, 4>& inv) {
    std::array<std::array<double, 8>, 4> aug{};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) aug[i][j] = m[i][j];
        aug[i][4 + i] = 1.0;
    }
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
        if (std::abs(aug[piv][col]) < 1e-300) return false;
        std::swap(aug[piv], aug[col]);
        const double d = aug[col][col];
        for (int j = 0; j < 8; ++j) aug[col][j] /= d;
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double factor = aug[r][col];
            for (int j = 0; j < 8; ++j) aug[r][j] -= factor * aug[col][j];
        }
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) inv[i][j] = aug[i][4 + j];
    return true;
}

std::vector<GB2Params> moment_matched_starts(const std::vector<double>& samples) {
    double m1 = 0.0;
    for (double x : samples) m1 += std::log(x);
    m1 /= static_cast<double>(samples.size());
    double v = 0.0;
    for (double x : samples) {
        const double d = std::log(x) - m1;
        v += d * d;
    }
    v /= static_cast<double>(samples.size());
    v = std::max(v, 1e-12);

    // ln X = ln b + (1/a) logit-beta(p,q): match mean and variance of ln X
    const double pq[8][2] = {{1.0, 1.0}, {0.5, 0.5}, {2.0, 2.0}, {1.0, 0.5},
                             {0.5, 1.0}, {2.0, 1.0}, {1.0, 2.0}, {1.5, 0.75}};
    std::vector<GB2Params> starts;
    starts.reserve(8);
    for (const auto& s : pq) {
        const double p = s[0], q = s[1];
        GB2Params g;
        g.p = p;
        g.q = q;
        g.a = std::sqrt((trigamma(p) + trigamma(q)) / v);
        g.b = std::exp(m1 - (digamma(p) - digamma(q)) / g.a);
        starts.push_back(g);
    }
    return starts;
}

} // namespace

Gb2Fit gb2_mle(const std::vector<double>& samples, const std::optional<GB2Params>& init) {
    if (samples.size() < 100)
        throw ValidationError("gb2_mle: at least 100 observations required, got " +
                              std::to_string(samples.size()));
    require_positive(samples, "gb2_mle");

    std::vector<GB2Params> starts = moment_matched_starts(samples);
    if (init) {
        init->validate();
        starts.insert(starts.begin(), *init);
    }

    const Gb2Objective obj(samples);
    std::vector<Gb2StartOutcome> outcomes(starts.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t nthreads = std::min<std::size_t>(starts.size(), hw);
    auto work = [&](std::size_t first) {
        for (std::size_t i = first; i < starts.size(); i += nthreads) {
            const GB2Params& s = starts[i];
            const std::array<double, 4> th0 = {std::log(s.a), std::log(s.b), std::log(s.p),
                                               std::log(s.q)};
            BfgsOutcome r = bfgs_maximize(obj, th0);
            Gb2StartOutcome& o = outcomes[i];
            o.start = s;
            o.found = {std::exp(r.theta[0]), std::exp(r.theta[1]), std::exp(r.theta[2]),
                       std::exp(r.theta[3])};
            o.log_likelihood = r.value;
            o.grad_norm = r.grad_norm;
            o.iterations = r.iterations;
            o.converged = r.converged;
            o.ll_trace = std::move(r.ll_trace);
        }
    };
    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(work, i);
        for (auto& th : pool) th.join();
    }

    // winner: highest likelihood among converged starts, lowest index on ties
    int best = -1;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].converged) continue;
        if (best < 0 || outcomes[i].log_likelihood > outcomes[static_cast<std::size_t>(best)]
                                                         .log_likelihood)
            best = static_cast<int>(i);
    }
    if (best < 0) {
        int least_bad = 0;
        for (std::size_t i = 1; i < outcomes.size(); ++i)
            if (outcomes[i].log_likelihood > outcomes[static_cast<std::size_t>(least_bad)]
                                                 .log_likelihood)
                least_bad = static_cast<int>(i);
        const Gb2StartOutcome& o = outcomes[static_cast<std::size_t>(least_bad)];
        std::ostringstream msg;
        msg << "gb2_mle: no start converged; best found a=" << o.found.a << " b=" << o.found.b
            << " p=" << o.found.p << " q=" << o.found.q << " ll=" << o.log_likelihood
            << " grad=" << o.grad_norm << " after " << o.iterations << " iterations";
        throw Gb2Error(msg.str(), o.grad_norm, o);
    }

    Gb2Fit fit;
    fit.starts = std::move(outcomes);
    fit.winning_start = best;
    const Gb2StartOutcome& win = fit.starts[static_cast<std::size_t>(best)];
    fit.params = win.found;
    fit.log_likelihood = win.log_likelihood;
    fit.grad_norm = win.grad_norm;
    fit.converged = true;
    fit.sample_max = *std::max_element(samples.begin(), samples.end());

    // observed information: central differences of the analytic gradient
    const std::array<double, 4> th = {std::log(fit.params.a), std::log(fit.params.b),
                                      std::log(fit.params.p), std::log(fit.params.q)};
    std::array<std::array<double, 4>, 4> hess{};
    const double h = 1e-5;
    for (int i = 0; i < 4; ++i) {
        std::array<double, 4> tp = th, tm = th, gp{}, gm{};
        tp[i] += h;
        tm[i] -= h;
        obj.eval(tp, &gp);
        obj.eval(tm, &gm);
        for (int j = 0; j < 4; ++j) hess[i][j] = (gp[j] - gm[j]) / (2.0 * h);
    }
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            hess[i][j] = hess[j][i] = 0.5 * (hess[i][j] + hess[j][i]);
    // covariance = (n * (-hess))^-1
    const double n = static_cast<double>(samples.size());
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) hess[i][j] *= -n;
    std::array<std::array<double, 4>, 4> cov{};
    if (invert4(hess, cov)) {
        for (int i = 0; i < 4; ++i)
            fit.log_param_std_error[static_cast<std::size_t>(i)] =
                cov[i][i] > 0.0 ? std::sqrt(cov[i][i]) : 0.0;
        const double var_lnaq = cov[0][0] + cov[3][3] + 2.0 * cov[0][3];
        if (var_lnaq > 0.0)
            fit.tail_index_std_error = fit.params.tail_index() * std::sqrt(var_lnaq);
    }
    return fit;
}

ParetoFit pareto_index_from_gb2(const GB2Params& params, double sample_max, double std_error) {
    params.validate();
    ParetoFit fit;
    fit.mu_hat = params.tail_index();
    fit.c0_hat = params.b;
    fit.fit_lo = params.b;
    fit.fit_hi = sample_max > 0.0 ? sample_max : params.b;
    fit.std_error = std_error;
    fit.n_tail = 0;
    fit.method = "gb2-tail";
    return fit;
}

ParetoFit pareto_index_from_gb2(const Gb2Fit& fit) {
    return pareto_index_from_gb2(fit.params, fit.sample_max, fit.tail_index_std_error);
}

FitRange select_fit_range(const std::vector<double>& samples, long n_floor) {
    if (samples.size() < 100)
        throw ValidationError("select_fit_range: at least 100 observations required, got " +
                              std::to_string(samples.size()));
    require_positive(samples, "select_fit_range");
    std::vector<double> s(samples);
    std::stable_sort(s.begin(), s.end(), std::greater<>());
    const long n = static_cast<long>(s.size());
    if (n_floor + 1 > n) throw ValidationError("select_fit_range: no window reaches the tail floor");

    // candidate tail sizes, log-spaced
    std::vector<long> ks;
    const double kmin = static_cast<double>(n_floor);
    const double kmax = static_cast<double>(n - 1);
    const int grid = 192;
    long prev = 0;
    for (int i = 0; i <= grid; ++i) {
        const long k = static_cast<long>(
            std::floor(kmin * std::pow(kmax / kmin, static_cast<double>(i) / grid)));
        if (k != prev && k >= n_floor && k <= n - 1) ks.push_back(k);
        prev = k;
    }

    FitRange best;
    best.ks_distance = 1e300;
    for (long k : ks) {
        const double threshold = s[static_cast<std::size_t>(k)];
        double acc = 0.0;
        for (long i = 0; i < k; ++i) acc += std::log(s[static_cast<std::size_t>(i)] / threshold);
        if (!(acc > 0.0)) continue;
        const double mu = static_cast<double>(k) / acc;
        double dist = 0.0;
        for (long i = 0; i < k; ++i) {
            const double model = std::pow(s[static_cast<std::size_t>(i)] / threshold, -mu);
            const double hi_emp = static_cast<double>(i + 1) / static_cast<double>(k);
            const double lo_emp = static_cast<double>(i) / static_cast<double>(k);
            dist = std::max(dist, std::max(std::abs(hi_emp - model), std::abs(model - lo_emp)));
        }
        if (dist < best.ks_distance) {
            best.ks_distance = dist;
            best.fit_lo = threshold;
            best.n_tail = k;
        }
    }
    if (best.n_tail == 0) throw ValidationError("select_fit_range: no usable window");
    best.fit_hi = s.front();
    return best;
}

} // namespace prodisp
