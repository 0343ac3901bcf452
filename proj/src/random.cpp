#include "tailrisk/random.hpp"

#include <algorithm>
#include <cmath>

#include "tailrisk/errors.hpp"

namespace tailrisk {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    std::uint64_t s = seed;
    const std::uint64_t a = splitmix64(s);
    std::uint64_t t = salt ^ 0xd1b54a32d192ed03ULL;
    const std::uint64_t b = splitmix64(t);
    std::uint64_t mixed = a ^ (b + 0x632be59bd9b4e019ULL);
    return splitmix64(mixed);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t state = derive_seed(seed, stream);
    for (auto& word : s_) word = splitmix64(state);
}

void normal_vector(RngStream& rng, std::span<double> out) {
    for (double& x : out) x = rng.normal();
}

Eigen::VectorXd normal_vector(RngStream& rng, int d) {
    Eigen::VectorXd v(d);
    normal_vector(rng, std::span<double>(v.data(), static_cast<std::size_t>(d)));
    return v;
}

void sphere_uniform(RngStream& rng, std::span<double> out) {
    for (;;) {
        double norm2 = 0.0;
        for (double& x : out) {
            x = rng.normal();
            norm2 += x * x;
        }
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& x : out) x *= inv;
            return;
        }
    }
}

Eigen::VectorXd sphere_uniform(RngStream& rng, int d) {
    Eigen::VectorXd v(d);
    sphere_uniform(rng, std::span<double>(v.data(), static_cast<std::size_t>(d)));
    return v;
}

CategoricalSampler::CategoricalSampler(std::span<const double> weights) {
    cumulative_.reserve(weights.size());
    double acc = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ValidationError("stratification weights must be nonnegative");
        acc += w;
        cumulative_.push_back(acc);
    }
    if (!(acc > 0.0))
        throw NumericalError("all stratification weights are zero: threshold too extreme for the marginal tails");
}

int CategoricalSampler::operator()(RngStream& rng) const noexcept {
    const double x = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    auto idx = static_cast<int>(it - cumulative_.begin());
    if (idx >= static_cast<int>(cumulative_.size())) idx = static_cast<int>(cumulative_.size()) - 1;
    // Never land on a zero-weight slot at the top end.
    while (idx > 0 && cumulative_[idx] == cumulative_[idx - 1]) --idx;
    return idx;
}

int stratification_index(RngStream& rng, std::span<const double> weights) {
    return CategoricalSampler(weights)(rng);
}

SphereComponent sphere_component_is(RngStream& rng, double a, double b) {
    const double ga = rng.gamma(a);
    const double gb = rng.gamma(b);
    const double total = ga + gb;
    SphereComponent c;
    c.one_plus = 2.0 * ga / total;
    c.one_minus = 2.0 * gb / total;
    if (c.one_minus < kPoleClamp) {
        c.one_minus = kPoleClamp;
        c.one_plus = 2.0 - kPoleClamp;
        c.clamped = true;
    } else if (c.one_plus < kPoleClamp) {
        c.one_plus = kPoleClamp;
        c.one_minus = 2.0 - kPoleClamp;
        c.clamped = true;
    }
    c.value = c.one_minus < 1.0 ? 1.0 - c.one_minus : c.one_plus - 1.0;
    return c;
}

void conditional_sphere_rest(RngStream& rng, const SphereComponent& theta, int slot, std::span<double> out) {
    const auto d = out.size();
    const double radius = std::sqrt(theta.one_minus * theta.one_plus);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            if (static_cast<int>(k) == slot) continue;
            out[k] = rng.normal();
            norm2 += out[k] * out[k];
        }
    } while (!(norm2 > 0.0) && d > 1);
    const double scale = d > 1 ? radius / std::sqrt(norm2) : 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        if (static_cast<int>(k) != slot) out[k] *= scale;
    }
    out[static_cast<std::size_t>(slot)] = theta.value;
}

Eigen::VectorXd conditional_sphere_rest(RngStream& rng, int d, double theta, int slot) {
    if (!(std::abs(theta) < 1.0)) throw DomainError("conditional_sphere_rest needs |theta| < 1");
    if (d < 2) throw DomainError("conditional_sphere_rest needs d >= 2");
    Eigen::VectorXd v(d);
    conditional_sphere_rest(rng, SphereComponent{theta, 1.0 - theta, 1.0 + theta, false}, slot,
                            std::span<double>(v.data(), static_cast<std::size_t>(d)));
    return v;
}

}  // namespace tailrisk
