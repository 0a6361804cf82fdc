#include "prodisp/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "prodisp/errors.hpp"
#include "prodisp/quadrature.hpp"
#include "prodisp/rng.hpp"

namespace prodisp {

void MarkovConfig::validate() const {
    if (!(a_plus > 0.0 && a_minus > 0.0))
        throw ValidationError("markov: base rates must be positive");
    if (!(a_plus < a_minus))
        throw ValidationError(
            "markov: a_plus must be < a_minus for a normalizable stationary state "
            "(population would explode otherwise)");
    if (!(rate_exponent >= 1.0)) throw ValidationError("markov: rate exponent must be >= 1");
    if (!(entry_rate >= 0.0)) throw ValidationError("markov: entry rate must be >= 0");
    if (c_max < 1) throw ValidationError("markov: c_max must be >= 1");
    if (c_max > 1 && static_cast<double>(c_max) < 10.0 * c_star() * (1.0 - 1e-9))
        throw ValidationError("markov: c_max below 10 * c_star, truncation error not negligible");
    if (impose_city_constraint &&
        std::abs(cutoff_ratio() - entry_rate) > 1e-9 * std::max(1.0, entry_rate))
        throw ValidationError("markov: city-model constraint n(1)/C_alpha == entry_rate violated");
}

double MarkovConfig::w_up(long c) const {
    return a_plus * std::pow(static_cast<double>(c), rate_exponent);
}

double MarkovConfig::w_down(long c) const {
    return a_minus * std::pow(static_cast<double>(c), rate_exponent);
}

MarkovConfig MarkovConfig::from_cutoff_ratio(double rate_exponent, double ratio,
                                             double entry_rate, double a_minus, long c_max) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ValidationError("markov: cutoff ratio must be in (0,1)");
    MarkovConfig cfg;
    cfg.rate_exponent = rate_exponent;
    cfg.a_minus = a_minus;
    cfg.a_plus = a_minus * (1.0 - ratio);
    cfg.entry_rate = entry_rate;
    cfg.c_max = c_max > 0 ? c_max : static_cast<long>(std::ceil(10.0 / ratio));
    cfg.validate();
    return cfg;
}

StationaryState stationary_solution(const MarkovConfig& cfg) {
    cfg.validate();
    if (!(cfg.entry_rate > 0.0))
        throw ValidationError("stationary_solution: entry rate must be > 0");
    StationaryState st;
    st.counts.resize(static_cast<std::size_t>(cfg.c_max));
    // boundary condition w_down(1) n(1) = p
    double log_n = std::log(cfg.entry_rate) - std::log(cfg.w_down(1));
    st.counts[0] = std::exp(log_n);
    for (long c = 2; c <= cfg.c_max; ++c) {
        log_n += std::log(cfg.w_up(c - 1)) - std::log(cfg.w_down(c));
        st.counts[static_cast<std::size_t>(c - 1)] = std::exp(log_n);
    }
    for (long c = 1; c <= cfg.c_max; ++c) {
        const double n = st.n(c);
        st.total_firms += n;
        st.aggregate_index += static_cast<double>(c) * n;
        st.rate_weighted_sum += std::pow(static_cast<double>(c), cfg.rate_exponent) * n;
    }
    // geometric tail estimate beyond c_max
    const double r = cfg.w_up(cfg.c_max) / cfg.w_down(cfg.c_max + 1);
    if (r < 1.0) {
        const double tail = st.counts.back() * r / (1.0 - r);
        st.truncated_tail_fraction = tail / (st.total_firms + tail);
    } else {
        st.truncated_tail_fraction = std::numeric_limits<double>::quiet_NaN();
    }
    return st;
}

double PowerlawApprox::value(double c) const {
    return amplitude * std::pow(c, -exponent) * std::exp(-c / c_star);
}

PowerlawApprox stationary_powerlaw_approx(const MarkovConfig& cfg) {
    cfg.validate();
    const double target = cfg.cutoff_ratio(); // 1 - a_plus/a_minus
    if (!(target < 0.5))
        throw ValidationError("stationary_powerlaw_approx: requires n(1)/C_alpha << 1");
    const double cmax = static_cast<double>(cfg.c_max);
    // pure-power initial guess: no cutoff, C_alpha = n(1) * c_max
    double x = 1.0 / cmax;
    std::ostringstream trace;
    int it = 0;
    const int max_it = 500;
    for (; it < max_it; ++it) {
        const double g = target * (1.0 - std::pow(1.0 - x, cmax));
        const double next = 0.5 * x + 0.5 * g;
        trace << x << ' ';
        if (std::abs(next - x) <= 1e-8 * next) {
            x = next;
            break;
        }
        x = next;
    }
    if (it == max_it)
        throw ConvergenceError("stationary_powerlaw_approx: c* fixed point stalled; iterates: " +
                                   trace.str(),
                               x);
    PowerlawApprox ap;
    ap.cutoff_ratio = x;
    ap.c_star = 1.0 / x;
    ap.exponent = cfg.rate_exponent;
    const double n1 = cfg.entry_rate / cfg.w_down(1);
    ap.amplitude = n1 / (1.0 - x);
    ap.iterations = it + 1;

    const StationaryState exact = stationary_solution(cfg);
    const long lo = 10;
    const long hi = std::min<long>(cfg.c_max, static_cast<long>(ap.c_star / 10.0));
    for (long c = lo; c <= hi; ++c) {
        const double e = exact.n(c);
        if (e <= 0.0) continue;
        ap.max_rel_deviation =
            std::max(ap.max_rel_deviation, std::abs(ap.value(static_cast<double>(c)) - e) / e);
    }
    return ap;
}

namespace {

// Fenwick tree over event rates: slot 0 is the entry channel, slot c the
// combined move rate of state c.
class RateTree {
  public:
    explicit RateTree(std::size_t n) : rate_(n, 0.0), tree_(n + 1, 0.0) {}

    void set(std::size_t i, double value) {
        const double delta = value - rate_[i];
        rate_[i] = value;
        for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += delta;
    }

    double total() const {
        double s = 0.0;
        std::size_t j = tree_.size() - 1;
        while (j) {
            s += tree_[j];
            j &= j - 1;
        }
        return s;
    }

    // largest index with prefix sum <= target
    std::size_t find(double target) const {
        std::size_t pos = 0;
        std::size_t mask = 1;
        while ((mask << 1) < tree_.size()) mask <<= 1;
        for (; mask; mask >>= 1) {
            const std::size_t next = pos + mask;
            if (next < tree_.size() && tree_[next] < target) {
                target -= tree_[next];
                pos = next;
            }
        }
        return pos; // 0-based slot
    }

    void rebuild() {
        std::fill(tree_.begin(), tree_.end(), 0.0);
        for (std::size_t i = 0; i < rate_.size(); ++i) {
            const double v = rate_[i];
            if (v != 0.0)
                for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += v;
        }
    }

    double rate(std::size_t i) const { return rate_[i]; }

  private:
    std::vector<double> rate_;
    std::vector<double> tree_;
};

struct ReplicaOutput {
    std::vector<double> occupancy;
    unsigned long long events = 0;
};

ReplicaOutput run_replica(const MarkovConfig& cfg, double horizon, double t_measure,
                          long cap, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t ncap = static_cast<std::size_t>(cap);
    std::vector<double> pow_c(ncap + 2);
    for (std::size_t c = 1; c <= ncap + 1; ++c)
        pow_c[c] = std::pow(static_cast<double>(c), cfg.rate_exponent);

    std::vector<long> n(ncap + 1, 0); // n[c], c = 1..cap
    std::vector<double> occ(ncap + 1, 0.0);
    std::vector<double> last(ncap + 1, t_measure);
    RateTree rates(ncap + 1);
    rates.set(0, cfg.entry_rate);

    const double up_frac = cfg.a_plus / (cfg.a_plus + cfg.a_minus);
    auto combined_rate = [&](std::size_t c) {
        // reflecting cap: no up-moves out of the top state
        const double per = c == ncap ? cfg.a_minus : cfg.a_plus + cfg.a_minus;
        return static_cast<double>(n[c]) * per * pow_c[c];
    };
    auto credit = [&](std::size_t c, double now) {
        const double from = std::max(last[c], t_measure);
        if (now > from) occ[c] += static_cast<double>(n[c]) * (now - from);
        last[c] = now;
    };

    double t = 0.0;
    unsigned long long events = 0;
    unsigned long long since_rebuild = 0;
    for (;;) {
        const double total = rates.total();
        if (total <= 0.0) break; // empty economy with no entry
        const double dt = rng.exponential(total);
        if (t + dt >= horizon) break;
        t += dt;
        ++events;
        if (++since_rebuild == (1ULL << 24)) {
            rates.rebuild();
            since_rebuild = 0;
        }
        const std::size_t slot = rates.find(rng.uniform() * total);
        if (slot == 0) { // entry at c = 1
            credit(1, t);
            ++n[1];
            rates.set(1, combined_rate(1));
            continue;
        }
        if (n[slot] == 0) { // float drift selected an empty state
            rates.rebuild();
            continue;
        }
        const bool up = slot < ncap && rng.uniform() < up_frac;
        credit(slot, t);
        --n[slot];
        rates.set(slot, combined_rate(slot));
        if (up) {
            const std::size_t d = slot + 1;
            credit(d, t);
            ++n[d];
            rates.set(d, combined_rate(d));
        } else if (slot > 1) {
            const std::size_t d = slot - 1;
            credit(d, t);
            ++n[d];
            rates.set(d, combined_rate(d));
        } // slot == 1 down-move: exit
    }
    ReplicaOutput out;
    out.events = events;
    out.occupancy.resize(ncap);
    const double span = horizon - t_measure;
    for (std::size_t c = 1; c <= ncap; ++c) {
        credit(c, horizon);
        out.occupancy[c - 1] = occ[c] / span;
    }
    return out;
}

} // namespace

SimulationResult simulate(const MarkovConfig& cfg, double horizon, std::uint64_t seed,
                          const SimulateOptions& opts) {
    cfg.validate();
    if (!(horizon > 0.0)) throw ValidationError("simulate: horizon must be positive");
    if (!(opts.warmup_fraction >= 0.0 && opts.warmup_fraction < 1.0))
        throw ValidationError("simulate: warmup fraction must be in [0,1)");
    if (opts.replicas < 1) throw ValidationError("simulate: at least one replica");
    const long cap = opts.state_cap > 0 ? std::min(opts.state_cap, cfg.c_max) : cfg.c_max;

    SimulationResult res;
    res.horizon = horizon;
    res.state_cap = cap;
    res.measured_time = horizon * (1.0 - opts.warmup_fraction);
    const double t_measure = horizon * opts.warmup_fraction;

    res.replica_occupancy.resize(static_cast<std::size_t>(opts.replicas));
    std::vector<unsigned long long> events(static_cast<std::size_t>(opts.replicas), 0);
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int nthreads =
        std::max(1, std::min(opts.replicas, opts.threads > 0 ? opts.threads : (hw > 0 ? hw : 1)));

    auto work = [&](int first) {
        for (int r = first; r < opts.replicas; r += nthreads) {
            ReplicaOutput out = run_replica(cfg, horizon, t_measure, cap,
                                            child_seed(seed, static_cast<std::uint64_t>(r)));
            res.replica_occupancy[static_cast<std::size_t>(r)] = std::move(out.occupancy);
            events[static_cast<std::size_t>(r)] = out.events;
        }
    };
    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(work, i);
        for (auto& th : pool) th.join();
    }

    res.mean_occupancy.assign(static_cast<std::size_t>(cap), 0.0);
    for (int r = 0; r < opts.replicas; ++r) {
        res.events += events[static_cast<std::size_t>(r)];
        const auto& occ = res.replica_occupancy[static_cast<std::size_t>(r)];
        for (std::size_t i = 0; i < occ.size(); ++i) res.mean_occupancy[i] += occ[i];
    }
    for (double& v : res.mean_occupancy) v /= opts.replicas;
    return res;
}

std::vector<double> master_residual(const MarkovConfig& cfg, const std::vector<double>& counts) {
    if (counts.empty()) throw ValidationError("master_residual: empty state");
    const long len = static_cast<long>(counts.size());
    std::vector<double> res(static_cast<std::size_t>(len - 1), 0.0);
    auto n = [&counts, len](long c) {
        return c >= 1 && c <= len ? counts[static_cast<std::size_t>(c - 1)] : 0.0;
    };
    for (long c = 1; c < len; ++c) {
        double r = cfg.w_up(c - 1) * n(c - 1) + cfg.w_down(c + 1) * n(c + 1) -
                   cfg.w_up(c) * n(c) - cfg.w_down(c) * n(c);
        if (c == 1) r += cfg.entry_rate; // w_up(0) n(0) = 0, entry source instead
        res[static_cast<std::size_t>(c - 1)] = r;
    }
    return res;
}

AggregateIndices aggregate_integrals(double alpha, double cutoff_ratio) {
    if (!(alpha > 1.0)) throw ValidationError("aggregate_integrals: alpha must be > 1");
    if (!(cutoff_ratio >= 0.0 && cutoff_ratio < 1.0))
        throw ValidationError("aggregate_integrals: cutoff ratio must be in [0,1)");
    const double x = cutoff_ratio;

    // integrand t^eta / (e^t - 1 + x) with the x = 0 pole softened by t = s^kappa
    auto piece = [x](double eta) {
        auto f = [x, eta](double t) {
            const double denom = std::expm1(t) + x;
            if (!std::isfinite(denom)) return 0.0;
            return std::pow(t, eta) / denom;
        };
        const double eta0 = x == 0.0 ? eta - 1.0 : eta; // effective power at t -> 0
        QuadOptions opts;
        opts.rel_tol = 1e-10;
        double head;
        if (eta0 >= 1.0) {
            head = integrate_or_throw(f, 0.0, 1.0, opts, "aggregate integral");
        } else {
            const double kappa = 2.0 / (eta0 + 1.0);
            auto g = [&f, kappa](double s) {
                const double t = std::pow(s, kappa);
                return f(t) * kappa * std::pow(s, kappa - 1.0);
            };
            head = integrate_or_throw(g, 0.0, 1.0, opts, "aggregate integral");
        }
        const double tail = integrate_upper_or_throw(f, 1.0, 3.0, opts, "aggregate integral");
        return head + tail;
    };

    AggregateIndices out;
    out.firm_count = piece(alpha - 1.0) / std::tgamma(alpha);
    out.c_finite = !(alpha <= 2.0 && x == 0.0);
    if (out.c_finite)
        out.productivity_index = piece(alpha - 2.0) / std::tgamma(alpha - 1.0);
    else
        out.productivity_index = std::numeric_limits<double>::infinity();
    return out;
}

} // namespace prodisp
