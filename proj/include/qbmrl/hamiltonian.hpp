#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "network.hpp"

namespace qbmrl {

// How the transverse field strength maps onto the coupling between adjacent
// replicas:
//   literal        - the coupling equals the current transverse field Gamma
//   suzuki_trotter - J = (1/(2 beta)) * ln(coth(Gamma beta / r)), the
//                    path-integral discretization constant
enum class CouplingMode { literal, suzuki_trotter };

struct SpinCoupling {
    std::uint32_t a, b;
    double strength;
};

// Classical Ising system over n_hidden * n_replicas spins obtained by clamping
// a network's state/action units and stacking r replicas of the hidden spins.
// Energy of a configuration sigma:
//   E(sigma) = offset - sum_i field_i sigma_i - sum_c strength_c sigma_a sigma_b
//              - J(gamma) * sum_h sum_k sigma_{h,k} sigma_{h,k+1}
// with the last (cyclic) sum present only for r >= 2. Spin (h, k) lives at
// index k * n_hidden + h. For r == 1 the replica ring degenerates to a
// constant, which is folded into the offset at construction time.
class EffectiveHamiltonian {
public:
    // Ad-hoc single-replica system; used by tests and the exact oracle.
    EffectiveHamiltonian(std::size_t n_spins, std::vector<double> fields,
                         std::vector<SpinCoupling> couplings, double offset = 0.0,
                         double beta = 1.0)
        : n_hidden_(n_spins),
          n_replicas_(1),
          gamma_(0.0),
          beta_(beta),
          mode_(CouplingMode::literal),
          offset_(offset),
          fields_(std::move(fields)),
          couplings_(std::move(couplings)) {
        check_consistent();
    }

    EffectiveHamiltonian(std::size_t n_hidden, std::size_t n_replicas, double gamma, double beta,
                         CouplingMode mode, double offset, std::vector<double> fields,
                         std::vector<SpinCoupling> couplings,
                         std::vector<std::pair<std::uint32_t, std::uint32_t>> hidden_pairs)
        : n_hidden_(n_hidden),
          n_replicas_(n_replicas),
          gamma_(gamma),
          beta_(beta),
          mode_(mode),
          offset_(offset),
          fields_(std::move(fields)),
          couplings_(std::move(couplings)),
          hidden_pairs_(std::move(hidden_pairs)) {
        check_consistent();
    }

    std::size_t n_spins() const { return fields_.size(); }
    std::size_t n_hidden() const { return n_hidden_; }
    std::size_t n_replicas() const { return n_replicas_; }
    double gamma() const { return gamma_; }
    double beta() const { return beta_; }
    CouplingMode mode() const { return mode_; }
    double offset() const { return offset_; }
    std::span<const double> fields() const { return fields_; }
    const std::vector<SpinCoupling>& couplings() const { return couplings_; }

    // Hidden node pairs backing each network hidden-hidden edge, in the same
    // order as Network::hidden_edges(). Empty for ad-hoc systems.
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& hidden_pairs() const {
        return hidden_pairs_;
    }

    std::size_t spin_index(std::size_t hidden_node, std::size_t replica) const {
        return replica * n_hidden_ + hidden_node;
    }

    bool has_replica_ring() const { return n_replicas_ >= 2; }

    // Coupling strength between the same hidden node in adjacent replicas, for
    // a given transverse field.
    double j_perp(double gamma) const {
        if (mode_ == CouplingMode::literal) return gamma;
        const double x = gamma * beta_ / static_cast<double>(n_replicas_);
        if (!(x > 0.0))
            throw std::invalid_argument(
                "j_perp: suzuki_trotter coupling requires gamma > 0");
        return 0.5 / beta_ * std::log(1.0 / std::tanh(x));
    }

    double energy(std::span<const Spin> spins) const {
        if (spins.size() != n_spins())
            throw std::invalid_argument("energy: spin count mismatch");
        double e = offset_;
        for (std::size_t i = 0; i < fields_.size(); ++i)
            e -= fields_[i] * spins[i];
        for (const SpinCoupling& c : couplings_)
            e -= c.strength * spins[c.a] * spins[c.b];
        if (has_replica_ring()) {
            const double jp = j_perp(gamma_);
            for (std::size_t h = 0; h < n_hidden_; ++h)
                for (std::size_t k = 0; k < n_replicas_; ++k) {
                    const std::size_t next = (k + 1) % n_replicas_;
                    e -= jp * spins[spin_index(h, k)] * spins[spin_index(h, next)];
                }
        }
        return e;
    }

private:
    void check_consistent() const {
        if (n_replicas_ < 1) throw std::invalid_argument("hamiltonian: n_replicas must be >= 1");
        if (!(beta_ > 0.0)) throw std::invalid_argument("hamiltonian: beta must be > 0");
        if (fields_.size() != n_hidden_ * n_replicas_)
            throw std::invalid_argument("hamiltonian: field count mismatch");
        for (const SpinCoupling& c : couplings_)
            if (c.a >= n_spins() || c.b >= n_spins() || c.a == c.b)
                throw std::invalid_argument("hamiltonian: coupling index out of range");
    }

    std::size_t n_hidden_;
    std::size_t n_replicas_;
    double gamma_;
    double beta_;
    CouplingMode mode_;
    double offset_;
    std::vector<double> fields_;
    std::vector<SpinCoupling> couplings_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> hidden_pairs_;
};

// Clamps state/action units of `net` and stacks `n_replicas` copies of the
// hidden spins. Network weights and biases are divided evenly across replicas,
// so summing any intra-replica coupling over all replicas recovers the
// original weight. The clamped visible biases contribute a configuration-
// independent offset.
inline EffectiveHamiltonian build_effective_hamiltonian(
    const Network& net, std::span<const std::uint8_t> state,
    std::span<const std::uint8_t> action, std::size_t n_replicas, double gamma, double beta,
    CouplingMode mode = CouplingMode::literal) {
    const Layout& lay = net.layout();
    if (state.size() != lay.state_size || action.size() != lay.action_size)
        throw std::invalid_argument("build_effective_hamiltonian: clamp dimension mismatch");
    if (n_replicas < 1)
        throw std::invalid_argument("build_effective_hamiltonian: n_replicas must be >= 1");
    if (gamma < 0.0)
        throw std::invalid_argument("build_effective_hamiltonian: gamma must be >= 0");

    const std::size_t H = lay.n_hidden();
    const std::size_t last = lay.n_layers() - 1;
    const double inv_r = 1.0 / static_cast<double>(n_replicas);

    // Per hidden node: bias plus contributions from clamped visible units.
    std::vector<double> node_field(H, 0.0);
    for (std::size_t l = 1; l < last; ++l)
        for (std::size_t j = 0; j < lay.layer_size(l); ++j)
            node_field[net.hidden_index(l, j)] = net.bias(l, j);
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (!state[i]) continue;
        for (std::size_t j = 0; j < lay.layer_size(1); ++j)
            node_field[net.hidden_index(1, j)] += net.weight(0, i, j);
    }
    const std::size_t ab = lay.n_blocks() - 1;
    for (std::size_t j = 0; j < action.size(); ++j) {
        if (!action[j]) continue;
        for (std::size_t i = 0; i < lay.layer_size(ab); ++i)
            node_field[net.hidden_index(ab, i)] += net.weight(ab, i, j);
    }

    std::vector<double> fields(H * n_replicas);
    for (std::size_t k = 0; k < n_replicas; ++k)
        for (std::size_t h = 0; h < H; ++h) fields[k * H + h] = node_field[h] * inv_r;

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    pairs.reserve(net.hidden_edges().size());
    std::vector<SpinCoupling> couplings;
    couplings.reserve(net.hidden_edges().size() * n_replicas);
    for (const HiddenEdge& e : net.hidden_edges()) {
        pairs.emplace_back(e.g1, e.g2);
        const double w = net.weight(e.block, e.i, e.j) * inv_r;
        for (std::size_t k = 0; k < n_replicas; ++k)
            couplings.push_back({static_cast<std::uint32_t>(k * H + e.g1),
                                 static_cast<std::uint32_t>(k * H + e.g2), w});
    }

    double offset = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i)
        if (state[i]) offset -= net.bias(0, i);
    for (std::size_t j = 0; j < action.size(); ++j)
        if (action[j]) offset -= net.bias(last, j);

    EffectiveHamiltonian h(H, n_replicas, gamma, beta, mode, offset, std::move(fields),
                           std::move(couplings), std::move(pairs));
    if (n_replicas == 1) {
        // The replica ring collapses to n_hidden self-links of strength J.
        const double extra = -h.j_perp(gamma) * static_cast<double>(H);
        return EffectiveHamiltonian(H, 1, gamma, beta, mode, offset + extra,
                                    std::vector<double>(h.fields().begin(), h.fields().end()),
                                    std::vector<SpinCoupling>(h.couplings()),
                                    std::vector<std::pair<std::uint32_t, std::uint32_t>>(
                                        h.hidden_pairs()));
    }
    return h;
}

}  // namespace qbmrl
