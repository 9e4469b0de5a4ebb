#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "hamiltonian.hpp"
#include "rng.hpp"

namespace qbmrl {

// Linear transverse-field anneal executed once per read.
struct AnnealSchedule {
    std::size_t num_sweeps = 1000;
    double gamma_initial = 20.0;
    double gamma_final = 0.01;
    double temperature = 1.0;

    void validate() const {
        if (num_sweeps == 0) throw std::invalid_argument("schedule: num_sweeps must be >= 1");
        if (!(temperature > 0.0))
            throw std::invalid_argument("schedule: temperature must be > 0");
        if (gamma_final < 0.0) throw std::invalid_argument("schedule: gamma_final must be >= 0");
        if (gamma_initial < gamma_final)
            throw std::invalid_argument("schedule: gamma must not increase during the anneal");
    }
};

// Transverse field used during sweep s; interpolates linearly from
// gamma_initial (first sweep) to gamma_final (last sweep).
inline double gamma_at(const AnnealSchedule& sched, std::size_t sweep) {
    if (sched.num_sweeps <= 1) return sched.gamma_final;
    const double t = static_cast<double>(sweep) / static_cast<double>(sched.num_sweeps - 1);
    // Two-term form so the first and last sweeps hit the endpoints exactly.
    return sched.gamma_initial * (1.0 - t) + sched.gamma_final * t;
}

// Heat-bath probability of setting a spin to +1 given the energy drop
// delta_e = E(spin = -1) - E(spin = +1).
inline double flip_probability(double delta_e, double temperature) {
    if (!(temperature > 0.0))
        throw std::invalid_argument("flip_probability: temperature must be > 0");
    return 1.0 / (1.0 + std::exp(-delta_e / temperature));
}

// Collection of spin configurations produced by repeated anneals of one
// Hamiltonian. Reads may carry explicit weights (used by the exact oracle to
// represent a full Boltzmann ensemble); an empty weight vector means uniform.
struct ReadSet {
    std::size_t n_spins = 0;
    std::size_t n_hidden = 0;
    std::size_t n_replicas = 1;
    std::vector<Spin> spins;       // read-major, n_reads * n_spins
    std::vector<double> energies;  // per read
    std::vector<double> weights;   // optional, same length as energies

    std::size_t n_reads() const { return energies.size(); }

    std::span<const Spin> read(std::size_t r) const {
        return {spins.data() + r * n_spins, n_spins};
    }

    double weight(std::size_t r) const { return weights.empty() ? 1.0 : weights[r]; }

    double total_weight() const {
        if (weights.empty()) return static_cast<double>(n_reads());
        return std::accumulate(weights.begin(), weights.end(), 0.0);
    }
};

struct SamplerOptions {
    bool random_sweep_order = false;  // shuffle spin update order each sweep
};

// Simulated annealing in the transverse field: each read starts from uniform
// random spins and performs num_sweeps full heat-bath sweeps while gamma moves
// down the schedule. Reads are independent; read i derives its own rng stream
// from (seed, i), so results do not depend on evaluation order.
inline ReadSet sample(const EffectiveHamiltonian& h, const AnnealSchedule& sched,
                      std::size_t n_reads, std::uint64_t seed,
                      const SamplerOptions& options = {}) {
    sched.validate();
    if (n_reads == 0) throw std::invalid_argument("sample: n_reads must be >= 1");
    if (h.mode() == CouplingMode::suzuki_trotter && h.has_replica_ring() &&
        !(sched.gamma_final > 0.0))
        throw std::invalid_argument("sample: suzuki_trotter requires gamma_final > 0");

    const std::size_t n = h.n_spins();
    const std::size_t n_hidden = h.n_hidden();
    const std::size_t r = h.n_replicas();
    const double inv_t = 1.0 / sched.temperature;

    // CSR adjacency over the intra-replica couplings.
    std::vector<std::uint32_t> offsets(n + 1, 0);
    for (const SpinCoupling& c : h.couplings()) {
        ++offsets[c.a + 1];
        ++offsets[c.b + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    std::vector<std::uint32_t> adj_spin(offsets[n]);
    std::vector<double> adj_w(offsets[n]);
    {
        std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
        for (const SpinCoupling& c : h.couplings()) {
            adj_spin[cursor[c.a]] = c.b;
            adj_w[cursor[c.a]++] = c.strength;
            adj_spin[cursor[c.b]] = c.a;
            adj_w[cursor[c.b]++] = c.strength;
        }
    }
    const auto fields = h.fields();

    ReadSet out;
    out.n_spins = n;
    out.n_hidden = n_hidden;
    out.n_replicas = r;
    out.spins.resize(n_reads * n);
    out.energies.resize(n_reads);

    std::vector<Spin> spins(n);
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t read = 0; read < n_reads; ++read) {
        Rng rng = make_rng(mix_seed(seed, read));
        for (std::size_t i = 0; i < n; ++i) spins[i] = (rng() & 1) ? Spin(1) : Spin(-1);

        for (std::size_t sweep = 0; sweep < sched.num_sweeps; ++sweep) {
            const double gamma_s = gamma_at(sched, sweep);
            const double jp = (r >= 2) ? h.j_perp(gamma_s) : 0.0;
            if (options.random_sweep_order) {
                for (std::size_t i = n; i > 1; --i)
                    std::swap(order[i - 1], order[rand_index(rng, i)]);
            }
            for (std::size_t oi = 0; oi < n; ++oi) {
                const std::uint32_t i = order[oi];
                double local = fields[i];
                for (std::uint32_t k = offsets[i]; k < offsets[i + 1]; ++k)
                    local += adj_w[k] * spins[adj_spin[k]];
                if (r >= 2) {
                    const std::size_t hnode = i % n_hidden;
                    const std::size_t rep = i / n_hidden;
                    const std::size_t prev = ((rep + r - 1) % r) * n_hidden + hnode;
                    const std::size_t next = ((rep + 1) % r) * n_hidden + hnode;
                    local += jp * (spins[prev] + spins[next]);
                }
                // delta_e = E(-1) - E(+1) = 2 * local
                const double p_up = 1.0 / (1.0 + std::exp(-2.0 * local * inv_t));
                spins[i] = (canonical(rng) < p_up) ? Spin(1) : Spin(-1);
            }
        }
        std::copy(spins.begin(), spins.end(), out.spins.begin() + read * n);
        out.energies[read] = h.energy(spins);
    }
    return out;
}

}  // namespace qbmrl
