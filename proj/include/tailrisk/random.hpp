#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace tailrisk {

// xoshiro256** seeded through splitmix64 from (seed, stream). One stream per
// replication; a given (seed, stream) pair always reproduces the same draws.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_(*this); }
    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(*this); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
    std::normal_distribution<double> normal_{};
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Deterministic seed derivation, e.g. one seed per (table cell, estimator).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

void normal_vector(RngStream& rng, std::span<double> out);
Eigen::VectorXd normal_vector(RngStream& rng, int d);

// Normalised Gaussian; an all-zero draw is redrawn.
void sphere_uniform(RngStream& rng, std::span<double> out);
Eigen::VectorXd sphere_uniform(RngStream& rng, int d);

// Categorical index (0-based) with probabilities weights / sum(weights).
// Throws NumericalError when every weight is zero.
int stratification_index(RngStream& rng, std::span<const double> weights);

// Same draw with a precomputed cumulative table for the replication loop.
class CategoricalSampler {
public:
    CategoricalSampler() = default;
    explicit CategoricalSampler(std::span<const double> weights);

    int operator()(RngStream& rng) const noexcept;
    double total() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

private:
    std::vector<double> cumulative_;
};

// A sphere coordinate theta in (-1, 1) carried with 1 - theta and 1 + theta,
// which are kept exact near the poles.
struct SphereComponent {
    double value = 0.0;
    double one_minus = 1.0;
    double one_plus = 1.0;
    bool clamped = false;
};

inline constexpr double kPoleClamp = 1e-15;

// theta = 2B - 1 with B ~ Beta(a, b) from a two-Gamma ratio. Its density is
// 2^{-(a+b-1)} Gamma(a+b)/(Gamma(a)Gamma(b)) (1+x)^{a-1} (1-x)^{b-1}.
SphereComponent sphere_component_is(RngStream& rng, double a, double b);

// Fills `out` with a unit vector whose slot `slot` equals theta and whose
// other slots are sqrt(1 - theta^2) * V for V uniform on the unit sphere of
// dimension out.size() - 1.
void conditional_sphere_rest(RngStream& rng, const SphereComponent& theta, int slot, std::span<double> out);
Eigen::VectorXd conditional_sphere_rest(RngStream& rng, int d, double theta, int slot = 0);

}  // namespace tailrisk
