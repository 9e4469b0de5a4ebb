#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sampler.hpp"

namespace qbmrl {

// Free energy estimate together with the per-node statistics needed by the
// learning rule. mean_spin is indexed by hidden node (averaged over replicas
// and reads); mean_pair follows the order of the Hamiltonian's hidden_pairs().
struct FreeEnergyEstimate {
    double free_energy = 0.0;
    double mean_energy = 0.0;
    double entropy_term = 0.0;  // (1/beta) * sum_c p_c ln p_c, always <= 0
    std::vector<double> mean_spin;
    std::vector<double> mean_pair;
};

// F = <E> + (1/beta) sum_c p(c) ln p(c), where p is the empirical frequency of
// each distinct spin configuration in the read set (weighted if the reads
// carry weights). The second term is a negative-entropy contribution, so F
// never exceeds <E>.
inline FreeEnergyEstimate estimate_free_energy(const EffectiveHamiltonian& h,
                                               const ReadSet& reads, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("estimate_free_energy: beta must be > 0");
    if (reads.n_reads() == 0)
        throw std::invalid_argument("estimate_free_energy: empty read set");
    if (reads.n_spins != h.n_spins())
        throw std::invalid_argument("estimate_free_energy: read set does not match hamiltonian");

    const std::size_t n = reads.n_spins;
    const std::size_t H = h.n_hidden();
    const std::size_t r = h.n_replicas();
    const double total_w = reads.total_weight();
    if (!(total_w > 0.0))
        throw std::invalid_argument("estimate_free_energy: non-positive total weight");

    FreeEnergyEstimate est;
    est.mean_spin.assign(H, 0.0);
    est.mean_pair.assign(h.hidden_pairs().size(), 0.0);

    // Configurations keyed by packed spin bits (bit i set <=> spin i is +1).
    // Systems wider than 64 spins fall back to a string key.
    std::unordered_map<std::uint64_t, double> freq64;
    std::unordered_map<std::string, double> freq_str;
    const bool packable = n <= 64;

    double energy_acc = 0.0;
    for (std::size_t rd = 0; rd < reads.n_reads(); ++rd) {
        const double w = reads.weight(rd);
        const auto s = reads.read(rd);
        energy_acc += w * reads.energies[rd];
        if (packable) {
            std::uint64_t key = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (s[i] > 0) key |= (1ull << i);
            freq64[key] += w;
        } else {
            freq_str[std::string(reinterpret_cast<const char*>(s.data()), n)] += w;
        }
        for (std::size_t h_node = 0; h_node < H; ++h_node) {
            int sum = 0;
            for (std::size_t k = 0; k < r; ++k) sum += s[k * H + h_node];
            est.mean_spin[h_node] += w * static_cast<double>(sum);
        }
        for (std::size_t p = 0; p < h.hidden_pairs().size(); ++p) {
            const auto [g1, g2] = h.hidden_pairs()[p];
            int sum = 0;
            for (std::size_t k = 0; k < r; ++k)
                sum += s[k * H + g1] * s[k * H + g2];
            est.mean_pair[p] += w * static_cast<double>(sum);
        }
    }

    const double norm = 1.0 / (total_w * static_cast<double>(r));
    for (double& v : est.mean_spin) v *= norm;
    for (double& v : est.mean_pair) v *= norm;
    est.mean_energy = energy_acc / total_w;

    double plogp = 0.0;
    auto add_plogp = [&](double w) {
        const double p = w / total_w;
        if (p > 0.0) plogp += p * std::log(p);
    };
    if (packable)
        for (const auto& [key, w] : freq64) add_plogp(w);
    else
        for (const auto& [key, w] : freq_str) add_plogp(w);

    est.entropy_term = plogp / beta;
    est.free_energy = est.mean_energy + est.entropy_term;
    return est;
}

// Sampler configuration shared by every free-energy evaluation an agent makes.
struct SamplerParams {
    AnnealSchedule schedule;
    std::size_t n_replicas = 1;
    std::size_t n_reads = 10;
    double beta = 1.0;
    CouplingMode coupling_mode = CouplingMode::literal;
    bool random_sweep_order = false;
};

struct QEvaluation {
    double q = 0.0;
    FreeEnergyEstimate estimate;
};

// Q(s, a) = -F(s, a): clamp the pair, anneal, estimate the free energy. The
// Hamiltonian is built at the schedule's final transverse field, so the stored
// read energies refer to the same system the anneal converges to.
inline QEvaluation evaluate_q(const Network& net, std::span<const std::uint8_t> state,
                              std::span<const std::uint8_t> action, const SamplerParams& params,
                              std::uint64_t seed) {
    const EffectiveHamiltonian h =
        build_effective_hamiltonian(net, state, action, params.n_replicas,
                                    params.schedule.gamma_final, params.beta,
                                    params.coupling_mode);
    SamplerOptions opt;
    opt.random_sweep_order = params.random_sweep_order;
    const ReadSet reads = sample(h, params.schedule, params.n_reads, seed, opt);
    QEvaluation out;
    out.estimate = estimate_free_energy(h, reads, params.beta);
    out.q = -out.estimate.free_energy;
    return out;
}

inline double q_value(const Network& net, std::span<const std::uint8_t> state,
                      std::span<const std::uint8_t> action, const SamplerParams& params,
                      std::uint64_t seed) {
    return evaluate_q(net, state, action, params, seed).q;
}

}  // namespace qbmrl
