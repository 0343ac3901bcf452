#include "tailrisk/rootfind.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tailrisk/errors.hpp"

namespace tailrisk {

// ---- IntervalSet ------------------------------------------------------------

IntervalSet IntervalSet::single(Interval iv) {
    IntervalSet s;
    s.push(iv);
    return s;
}

IntervalSet IntervalSet::pair(Interval first, Interval second) {
    if (second.lo < first.lo) std::swap(first, second);
    IntervalSet s;
    if (!first.empty() && !second.empty() && second.lo <= first.hi) {
        s.push({first.lo, std::max(first.hi, second.hi)});
        return s;
    }
    s.push(first);
    s.push(second);
    return s;
}

void IntervalSet::push(Interval iv) {
    if (iv.empty()) return;
    items_[count_++] = iv;
}

bool IntervalSet::contains(double x) const noexcept {
    for (const auto& iv : intervals()) {
        if (iv.contains(x)) return true;
    }
    return false;
}

IntervalSet IntervalSet::intersect(Interval iv) const {
    IntervalSet out;
    for (const auto& own : intervals()) {
        out.push({std::max(own.lo, iv.lo), std::min(own.hi, iv.hi)});
    }
    return out;
}

bool IntervalSet::subset_of(const IntervalSet& other) const noexcept {
    for (const auto& iv : intervals()) {
        bool covered = false;
        for (const auto& big : other.intervals()) {
            if (big.lo <= iv.lo && iv.hi <= big.hi) covered = true;
        }
        if (!covered) return false;
    }
    return true;
}

// ---- ExpSum -----------------------------------------------------------------

double ExpSumView::log_value(double x) const noexcept {
    double m = -kInf;
    for (std::size_t i = 0; i < slopes.size(); ++i) m = std::max(m, log_coeffs[i] + slopes[i] * x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (std::size_t i = 0; i < slopes.size(); ++i) s += std::exp(log_coeffs[i] + slopes[i] * x - m);
    return m + std::log(s);
}

double ExpSumView::value(double x) const noexcept {
    return std::exp(log_value(x));
}

ExpSum::ExpSum(std::vector<double> coeffs, std::vector<double> slopes) : slopes_(std::move(slopes)) {
    if (coeffs.size() != slopes_.size()) throw ValidationError("ExpSum needs as many coefficients as slopes");
    log_coeffs_.reserve(coeffs.size());
    for (double c : coeffs) {
        if (!(c > 0.0)) throw ValidationError("ExpSum coefficients must be positive");
        log_coeffs_.push_back(std::log(c));
    }
}

ExpSum ExpSum::from_log_coeffs(std::vector<double> log_coeffs, std::vector<double> slopes) {
    if (log_coeffs.size() != slopes.size()) throw ValidationError("ExpSum needs as many coefficients as slopes");
    ExpSum h;
    h.log_coeffs_ = std::move(log_coeffs);
    h.slopes_ = std::move(slopes);
    return h;
}

// ---- exceedance sets --------------------------------------------------------

namespace {

// log h and its first two derivatives over the non-constant terms, with
// slopes multiplied by `sign` (sign = -1 mirrors x -> -x).
struct LogSumEval {
    double g;
    double dg;
    double d2g;
};

class ActiveSum {
public:
    ActiveSum(ExpSumView h, double sign) : h_(h), sign_(sign) {}

    LogSumEval eval(double x) const noexcept {
        double m = -kInf;
        for (std::size_t i = 0; i < h_.slopes.size(); ++i) {
            if (h_.slopes[i] == 0.0) continue;
            m = std::max(m, h_.log_coeffs[i] + sign_ * h_.slopes[i] * x);
        }
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < h_.slopes.size(); ++i) {
            if (h_.slopes[i] == 0.0) continue;
            const double d = sign_ * h_.slopes[i];
            const double w = std::exp(h_.log_coeffs[i] + d * x - m);
            s0 += w;
            s1 += w * d;
            s2 += w * d * d;
        }
        const double dg = s1 / s0;
        return {m + std::log(s0), dg, std::max(0.0, s2 / s0 - dg * dg)};
    }

    double g(double x) const noexcept { return eval(x).g; }

    double max_slope() const noexcept {
        double m = -kInf;
        for (double d : h_.slopes) {
            if (d != 0.0) m = std::max(m, sign_ * d);
        }
        return m;
    }

    double log_total() const noexcept {
        double m = -kInf;
        for (std::size_t i = 0; i < h_.slopes.size(); ++i) {
            if (h_.slopes[i] != 0.0) m = std::max(m, h_.log_coeffs[i]);
        }
        double s = 0.0;
        for (std::size_t i = 0; i < h_.slopes.size(); ++i) {
            if (h_.slopes[i] != 0.0) s += std::exp(h_.log_coeffs[i] - m);
        }
        return m + std::log(s);
    }

private:
    ExpSumView h_;
    double sign_;
};

[[noreturn]] void fail(const char* what, double a, double b) {
    std::ostringstream os;
    os.precision(17);
    os << "exceedance_set: " << what << " (" << a << ", " << b << ")";
    throw NumericalError(os.str());
}

bool converged(double step, double x) noexcept {
    return std::abs(step) <= kRootRelTolerance * std::max(1.0, std::abs(x));
}

// Root of g(x) = target on a branch where g is increasing and convex.
// `known_lo`, when finite, satisfies g(known_lo) < target.
double increasing_root(const ActiveSum& f, double target, double known_lo) {
    double start = (target - f.log_total()) / f.max_slope();
    if (std::isfinite(known_lo)) start = std::max(start, known_lo + 1.0);

    double hi = start;
    double step = std::max(1.0, std::abs(start));
    int guard = 0;
    while (!(f.g(hi) > target)) {
        hi += step;
        step *= 2.0;
        if (++guard > 2000 || !std::isfinite(hi)) fail("cannot bracket upper root", start, target);
    }
    double lo = known_lo;
    if (!std::isfinite(lo)) {
        lo = hi - 1.0;
        step = std::max(1.0, std::abs(hi));
        guard = 0;
        while (!(f.g(lo) < target)) {
            lo -= step;
            step *= 2.0;
            if (++guard > 2000 || !std::isfinite(lo)) fail("cannot bracket lower side of root", hi, target);
        }
    }

    // Newton from the right stays to the right of the root by convexity; the
    // bracket catches anything that flat derivatives might throw off.
    double x = hi;
    for (int it = 0; it < kRootMaxIterations; ++it) {
        const LogSumEval e = f.eval(x);
        const double r = e.g - target;
        if (r == 0.0) return x;
        if (r > 0.0) hi = x; else lo = x;
        double next = (e.dg > 0.0) ? x - r / e.dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step_taken = next - x;
        x = next;
        if (converged(step_taken, x) || converged(hi - lo, x)) return x;
    }
    fail("root did not converge", lo, hi);
}

// Minimiser of the convex g for mixed-sign slopes: solves g'(x) = 0.
double minimiser(const ActiveSum& f) {
    double lo = 0.0, hi = 0.0;
    const double d0 = f.eval(0.0).dg;
    if (d0 == 0.0) return 0.0;
    double step = 1.0;
    int guard = 0;
    if (d0 > 0.0) {
        lo = -step;
        while (!(f.eval(lo).dg < 0.0)) {
            hi = lo;
            step *= 2.0;
            lo -= step;
            if (++guard > 2000) fail("cannot bracket minimiser", lo, hi);
        }
    } else {
        hi = step;
        while (!(f.eval(hi).dg > 0.0)) {
            lo = hi;
            step *= 2.0;
            hi += step;
            if (++guard > 2000) fail("cannot bracket minimiser", lo, hi);
        }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < kRootMaxIterations; ++it) {
        const LogSumEval e = f.eval(x);
        if (e.dg == 0.0) return x;
        if (e.dg > 0.0) hi = x; else lo = x;
        double next = (e.d2g > 0.0) ? x - e.dg / e.d2g : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step_taken = next - x;
        x = next;
        if (converged(step_taken, x) || converged(hi - lo, x)) return x;
    }
    fail("minimiser did not converge", lo, hi);
}

Interval domain_interval(Domain domain) {
    return domain == Domain::NonNegative ? Interval{0.0, kInf} : Interval{-kInf, kInf};
}

}  // namespace

IntervalSet exceedance_set_log(ExpSumView h, double log_level, Domain domain) {
    const Interval whole = domain_interval(domain);
    if (std::isnan(log_level)) throw NumericalError("exceedance_set: level is NaN");
    if (log_level == -kInf) return IntervalSet::single(whole);

    // Fold constant terms into the level.
    double log_const = -kInf;
    bool any_pos = false, any_neg = false;
    for (std::size_t i = 0; i < h.slopes.size(); ++i) {
        const double d = h.slopes[i];
        if (d > 0.0) {
            any_pos = true;
        } else if (d < 0.0) {
            any_neg = true;
        } else {
            const double c = h.log_coeffs[i];
            log_const = (log_const == -kInf) ? c
                      : std::max(log_const, c) + std::log1p(std::exp(-std::abs(log_const - c)));
        }
    }
    double target = log_level;
    if (log_const > -kInf) {
        if (log_const >= log_level) return IntervalSet::single(whole);
        target = log_level + std::log1p(-std::exp(log_const - log_level));
    }
    if (!any_pos && !any_neg) return IntervalSet::none();
    if (!std::isfinite(target)) throw NumericalError("exceedance_set: non-finite level after folding constants");

    const bool nonneg = domain == Domain::NonNegative;
    if (any_pos && !any_neg) {
        const ActiveSum f(h, 1.0);
        if (nonneg && f.g(0.0) > target) return IntervalSet::single(whole);
        const double root = increasing_root(f, target, -kInf);
        return IntervalSet::single({root, kInf}).intersect(whole);
    }
    if (any_neg && !any_pos) {
        const ActiveSum mirrored(h, -1.0);
        if (nonneg && !(mirrored.g(0.0) > target)) return IntervalSet::none();
        const double root = -increasing_root(mirrored, target, -kInf);
        return IntervalSet::single({-kInf, root}).intersect(whole);
    }

    const ActiveSum f(h, 1.0);
    const double xm = minimiser(f);
    if (f.g(xm) >= target) return IntervalSet::single(whole);
    const double upper = increasing_root(f, target, xm);
    if (nonneg && xm <= 0.0) return IntervalSet::single({upper, kInf}).intersect(whole);
    const ActiveSum mirrored(h, -1.0);
    const double lower = -increasing_root(mirrored, target, -xm);
    return IntervalSet::pair({-kInf, lower}, {upper, kInf}).intersect(whole);
}

IntervalSet exceedance_set(ExpSumView h, double level, Domain domain) {
    if (!(level > 0.0)) return IntervalSet::single(domain_interval(domain));
    return exceedance_set_log(h, std::log(level), domain);
}

PsiBounds psi_bounds(ExpSumView h, double level) {
    const IntervalSet set = exceedance_set(h, level, Domain::RealLine);
    PsiBounds out;
    for (const auto& iv : set.intervals()) {
        if (iv.lo == -kInf && iv.hi == kInf) {
            out.everywhere = true;
        } else if (iv.lo == -kInf) {
            out.lower = iv.hi;
        } else if (iv.hi == kInf) {
            out.upper = iv.lo;
        }
    }
    return out;
}

}  // namespace tailrisk
