#pragma once

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace tailrisk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
    double lo = -kInf;
    double hi = kInf;

    bool empty() const noexcept { return !(hi > lo); }
    bool contains(double x) const noexcept { return x >= lo && x < hi; }
};

// Union of at most two disjoint, sorted, non-empty intervals. The exceedance
// set of a convex function is the complement of a single interval, so two is
// always enough.
class IntervalSet {
public:
    IntervalSet() = default;

    static IntervalSet none() { return {}; }
    static IntervalSet single(Interval iv);
    static IntervalSet pair(Interval first, Interval second);

    std::span<const Interval> intervals() const noexcept { return {items_.data(), count_}; }
    std::size_t size() const noexcept { return count_; }
    bool empty() const noexcept { return count_ == 0; }
    bool contains(double x) const noexcept;

    IntervalSet intersect(Interval iv) const;
    // Set inclusion; both sides in canonical form.
    bool subset_of(const IntervalSet& other) const noexcept;

private:
    void push(Interval iv);

    std::array<Interval, 2> items_{};
    std::size_t count_ = 0;
};

// Non-owning h(x) = sum_i exp(log_coeffs[i] + slopes[i] * x).
struct ExpSumView {
    std::span<const double> log_coeffs;
    std::span<const double> slopes;

    double log_value(double x) const noexcept;
    double value(double x) const noexcept;
};

// Convex sum of exponentials h(x) = sum_i c_i e^{d_i x}, c_i > 0.
class ExpSum {
public:
    ExpSum() = default;
    ExpSum(std::vector<double> coeffs, std::vector<double> slopes);
    static ExpSum from_log_coeffs(std::vector<double> log_coeffs, std::vector<double> slopes);

    ExpSumView view() const noexcept { return {log_coeffs_, slopes_}; }
    double operator()(double x) const noexcept { return view().value(x); }
    double log_value(double x) const noexcept { return view().log_value(x); }
    std::size_t terms() const noexcept { return slopes_.size(); }

private:
    std::vector<double> log_coeffs_;
    std::vector<double> slopes_;
};

enum class Domain { RealLine, NonNegative };

inline constexpr double kRootRelTolerance = 1e-12;
inline constexpr int kRootMaxIterations = 200;

// {x in domain : h(x) > level}. Works on log h throughout, so the level and
// the coefficients may be far outside the double exponent range. Terms with
// zero slope are folded into the level. A non-positive level gives the whole
// domain. Throws NumericalError if a root cannot be bracketed or converged.
IntervalSet exceedance_set(ExpSumView h, double level, Domain domain = Domain::RealLine);
IntervalSet exceedance_set_log(ExpSumView h, double log_level, Domain domain = Domain::RealLine);
inline IntervalSet exceedance_set(const ExpSum& h, double level, Domain domain = Domain::RealLine) {
    return exceedance_set(h.view(), level, domain);
}

// Roots of h = level on the real line. `upper` is the left end of the
// right-unbounded exceedance interval, `lower` the right end of the
// left-unbounded one; `everywhere` marks h > level on all of R.
struct PsiBounds {
    std::optional<double> lower;
    std::optional<double> upper;
    bool everywhere = false;
};

PsiBounds psi_bounds(ExpSumView h, double level);
inline PsiBounds psi_bounds(const ExpSum& h, double level) { return psi_bounds(h.view(), level); }

}  // namespace tailrisk
