#pragma once

// Brute-force reference implementations for small spin systems. Everything in
// here enumerates all 2^N configurations, so it is exact up to floating point
// and usable as ground truth when validating the annealer and the free-energy
// estimator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "free_energy.hpp"
#include "hamiltonian.hpp"
#include "sampler.hpp"

namespace qbmrl::oracle {

inline constexpr std::size_t kMaxSpins = 24;

namespace detail {

inline void spins_from_mask(std::uint64_t mask, std::size_t n, std::vector<Spin>& out) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (mask >> i) & 1 ? Spin(1) : Spin(-1);
}

inline void check_size(const EffectiveHamiltonian& h) {
    if (h.n_spins() > kMaxSpins)
        throw std::invalid_argument("oracle: system too large for exact enumeration");
    if (h.n_spins() == 0) throw std::invalid_argument("oracle: empty system");
}

}  // namespace detail

// Exact Boltzmann distribution at inverse temperature beta. Configuration c is
// the bit mask with bit i set iff spin i is +1; probabilities[c] is its weight.
struct ExactDistribution {
    std::size_t n_spins = 0;
    double beta = 0.0;
    double log_z = 0.0;  // includes the Hamiltonian's constant offset
    std::vector<double> probabilities;
};

inline ExactDistribution exact_distribution(const EffectiveHamiltonian& h, double beta) {
    detail::check_size(h);
    if (!(beta > 0.0)) throw std::invalid_argument("oracle: beta must be > 0");
    const std::size_t n = h.n_spins();
    const std::uint64_t count = 1ull << n;

    ExactDistribution dist;
    dist.n_spins = n;
    dist.beta = beta;
    dist.probabilities.resize(count);

    std::vector<double> neg_beta_e(count);
    double max_exp = -std::numeric_limits<double>::infinity();
    std::vector<Spin> spins;
    for (std::uint64_t c = 0; c < count; ++c) {
        detail::spins_from_mask(c, n, spins);
        neg_beta_e[c] = -beta * h.energy(spins);
        max_exp = std::max(max_exp, neg_beta_e[c]);
    }
    double z_scaled = 0.0;
    for (std::uint64_t c = 0; c < count; ++c) z_scaled += std::exp(neg_beta_e[c] - max_exp);
    dist.log_z = max_exp + std::log(z_scaled);
    for (std::uint64_t c = 0; c < count; ++c)
        dist.probabilities[c] = std::exp(neg_beta_e[c] - dist.log_z);
    return dist;
}

inline double exact_log_z(const EffectiveHamiltonian& h, double beta) {
    return exact_distribution(h, beta).log_z;
}

inline double exact_free_energy(const EffectiveHamiltonian& h, double beta) {
    return -exact_log_z(h, beta) / beta;
}

struct ExactExpectations {
    std::vector<double> spin_mean;      // <sigma_i> per spin
    std::vector<double> coupling_mean;  // <sigma_a sigma_b> per entry of couplings()
};

inline ExactExpectations exact_expectations(const EffectiveHamiltonian& h, double beta) {
    const ExactDistribution dist = exact_distribution(h, beta);
    const std::size_t n = h.n_spins();
    ExactExpectations ex;
    ex.spin_mean.assign(n, 0.0);
    ex.coupling_mean.assign(h.couplings().size(), 0.0);
    std::vector<Spin> spins;
    for (std::uint64_t c = 0; c < dist.probabilities.size(); ++c) {
        const double p = dist.probabilities[c];
        detail::spins_from_mask(c, n, spins);
        for (std::size_t i = 0; i < n; ++i) ex.spin_mean[i] += p * spins[i];
        for (std::size_t k = 0; k < h.couplings().size(); ++k) {
            const SpinCoupling& cp = h.couplings()[k];
            ex.coupling_mean[k] += p * spins[cp.a] * spins[cp.b];
        }
    }
    return ex;
}

// Full Boltzmann ensemble expressed as a weighted ReadSet: one read per
// configuration, weighted by its exact probability. Feeding this to
// estimate_free_energy must reproduce the exact free energy and expectations,
// which is the main consistency check between estimator and oracle.
inline ReadSet exhaustive_readset(const EffectiveHamiltonian& h, double beta) {
    const ExactDistribution dist = exact_distribution(h, beta);
    const std::size_t n = h.n_spins();
    ReadSet reads;
    reads.n_spins = n;
    reads.n_hidden = h.n_hidden();
    reads.n_replicas = h.n_replicas();
    reads.spins.resize(dist.probabilities.size() * n);
    reads.energies.resize(dist.probabilities.size());
    reads.weights = dist.probabilities;
    std::vector<Spin> spins;
    for (std::uint64_t c = 0; c < dist.probabilities.size(); ++c) {
        detail::spins_from_mask(c, n, spins);
        std::copy(spins.begin(), spins.end(), reads.spins.begin() + c * n);
        reads.energies[c] = h.energy(spins);
    }
    return reads;
}

// Exact counterpart of estimate_free_energy, computed by direct enumeration
// rather than through the estimator, so the two can be checked against each
// other.
inline FreeEnergyEstimate exact_estimate(const EffectiveHamiltonian& h, double beta) {
    const ExactDistribution dist = exact_distribution(h, beta);
    const std::size_t n = h.n_spins();
    const std::size_t H = h.n_hidden();
    const std::size_t r = h.n_replicas();

    FreeEnergyEstimate est;
    est.mean_spin.assign(H, 0.0);
    est.mean_pair.assign(h.hidden_pairs().size(), 0.0);
    double plogp = 0.0;
    std::vector<Spin> spins;
    for (std::uint64_t c = 0; c < dist.probabilities.size(); ++c) {
        const double p = dist.probabilities[c];
        detail::spins_from_mask(c, n, spins);
        est.mean_energy += p * h.energy(spins);
        if (p > 0.0) plogp += p * std::log(p);
        for (std::size_t h_node = 0; h_node < H; ++h_node)
            for (std::size_t k = 0; k < r; ++k)
                est.mean_spin[h_node] += p * spins[k * H + h_node];
        for (std::size_t pr = 0; pr < h.hidden_pairs().size(); ++pr) {
            const auto [g1, g2] = h.hidden_pairs()[pr];
            for (std::size_t k = 0; k < r; ++k)
                est.mean_pair[pr] += p * spins[k * H + g1] * spins[k * H + g2];
        }
    }
    const double inv_r = 1.0 / static_cast<double>(r);
    for (double& v : est.mean_spin) v *= inv_r;
    for (double& v : est.mean_pair) v *= inv_r;
    est.entropy_term = plogp / beta;
    est.free_energy = est.mean_energy + est.entropy_term;
    return est;
}

// Total variation distance between the exact distribution and the empirical
// configuration frequencies of a read set.
inline double total_variation(const ExactDistribution& dist, const ReadSet& reads) {
    if (reads.n_spins != dist.n_spins)
        throw std::invalid_argument("total_variation: spin count mismatch");
    std::vector<double> emp(dist.probabilities.size(), 0.0);
    const double total_w = reads.total_weight();
    for (std::size_t rd = 0; rd < reads.n_reads(); ++rd) {
        const auto s = reads.read(rd);
        std::uint64_t key = 0;
        for (std::size_t i = 0; i < reads.n_spins; ++i)
            if (s[i] > 0) key |= (1ull << i);
        emp[key] += reads.weight(rd) / total_w;
    }
    double tv = 0.0;
    for (std::size_t c = 0; c < emp.size(); ++c)
        tv += std::abs(emp[c] - dist.probabilities[c]);
    return 0.5 * tv;
}

}  // namespace qbmrl::oracle
