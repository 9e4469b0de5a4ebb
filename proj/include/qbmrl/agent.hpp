#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "free_energy.hpp"
#include "network.hpp"
#include "replay.hpp"

namespace qbmrl {

// Rule for the bootstrap value of the next state, always read off the target
// network: `max_q` takes the best action; `sarsa` draws an epsilon-greedy
// action first and uses its value.
enum class TargetRule { max_q, sarsa };

// `batch` accumulates all weight deltas of a minibatch and applies them once;
// `per_sample` applies each transition's delta immediately.
enum class UpdateStyle { batch, per_sample };

struct Hyperparameters {
    double learning_rate = 0.005;
    double discount = 0.8;
    double epsilon_initial = 1.0;
    double epsilon_min = 0.01;
    double epsilon_decay = 0.0008;  // subtracted per weight update
    std::size_t minibatch_size = 8;
    std::size_t warm_up = 250;             // env steps before learning starts
    std::size_t target_update_period = 250;  // env steps between target syncs
    std::size_t buffer_capacity = 20000;
    std::size_t n_replicas = 1;
    std::size_t n_reads = 10;
    std::size_t num_sweeps = 1000;
    double beta = 1.0;         // inverse temperature of the free-energy estimate
    double temperature = 1.0;  // heat-bath temperature during sweeps
    double gamma_initial = 20.0;
    double gamma_final = 0.01;
    CouplingMode coupling_mode = CouplingMode::literal;
    TargetRule target_rule = TargetRule::max_q;
    UpdateStyle update_style = UpdateStyle::batch;
    bool random_sweep_order = false;

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("hyper: learning_rate must be > 0");
        if (discount < 0.0 || discount >= 1.0)
            throw std::invalid_argument("hyper: discount must be in [0, 1)");
        if (epsilon_initial < 0.0 || epsilon_initial > 1.0 || epsilon_min < 0.0 ||
            epsilon_min > 1.0 || epsilon_decay < 0.0)
            throw std::invalid_argument("hyper: bad epsilon settings");
        if (minibatch_size == 0) throw std::invalid_argument("hyper: minibatch_size must be >= 1");
        if (n_replicas == 0) throw std::invalid_argument("hyper: replicas must be >= 1");
        if (n_reads == 0) throw std::invalid_argument("hyper: n_reads must be >= 1");
        if (num_sweeps == 0) throw std::invalid_argument("hyper: num_sweeps must be >= 1");
        if (!(beta > 0.0)) throw std::invalid_argument("hyper: beta must be > 0");
        AnnealSchedule s{num_sweeps, gamma_initial, gamma_final, temperature};
        s.validate();
    }

    SamplerParams sampler_params() const {
        SamplerParams p;
        p.schedule = {num_sweeps, gamma_initial, gamma_final, temperature};
        p.n_replicas = n_replicas;
        p.n_reads = n_reads;
        p.beta = beta;
        p.coupling_mode = coupling_mode;
        p.random_sweep_order = random_sweep_order;
        return p;
    }
};

// One learner: a policy network, its target copy, and the exploration state.
struct Agent {
    Agent(const Layout& layout, const Hyperparameters& hp, std::uint64_t seed)
        : hyper(hp),
          policy_net(layout, seed),
          target_net(Network::zeros(layout)),
          epsilon(hp.epsilon_initial) {
        hyper.validate();
        copy_weights(policy_net, target_net);
    }

    Hyperparameters hyper;
    Network policy_net;
    Network target_net;
    double epsilon;
};

// Epsilon-greedy over an arbitrary action-value callback. The random branch
// short-circuits without evaluating any Q value.
inline std::size_t select_action(double epsilon, std::size_t n_actions, Rng& rng,
                                 const std::function<double(std::size_t)>& q_of) {
    if (n_actions == 0) throw std::invalid_argument("select_action: no actions");
    if (epsilon > 0.0 && canonical(rng) < epsilon) return rand_index(rng, n_actions);
    std::size_t best = 0;
    double best_q = q_of(0);
    for (std::size_t a = 1; a < n_actions; ++a) {
        const double q = q_of(a);
        if (q > best_q) {
            best_q = q;
            best = a;
        }
    }
    return best;
}

inline std::size_t select_action(Agent& agent, const BitVec& state, Rng& rng) {
    const std::size_t n_actions = agent.policy_net.layout().action_size;
    const SamplerParams params = agent.hyper.sampler_params();
    return select_action(agent.epsilon, n_actions, rng, [&](std::size_t a) {
        return q_value(agent.policy_net, state, one_hot(a, n_actions), params, rng());
    });
}

inline void decay_epsilon(Agent& agent) {
    agent.epsilon = std::max(agent.hyper.epsilon_min, agent.epsilon - agent.hyper.epsilon_decay);
}

// Copies policy weights into the target every `target_update_period` steps.
inline bool maybe_sync_target(Agent& agent, std::size_t global_step) {
    const std::size_t period = agent.hyper.target_update_period;
    if (period == 0 || global_step % period != 0) return false;
    copy_weights(agent.policy_net, agent.target_net);
    return true;
}

struct TdUpdateResult {
    std::vector<double> td_errors;  // one per transition, in batch order
};

namespace detail {

// Flat accumulator with the same shape as a network's parameters.
struct DeltaAccumulator {
    explicit DeltaAccumulator(const Layout& lay)
        : blocks(lay.n_blocks()), biases(lay.n_layers()) {
        for (std::size_t b = 0; b < blocks.size(); ++b)
            blocks[b].assign(lay.layer_size(b) * lay.layer_size(b + 1), 0.0);
        for (std::size_t l = 0; l < biases.size(); ++l)
            biases[l].assign(lay.layer_size(l), 0.0);
    }

    void apply_to(Network& net) const {
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            auto dst = net.block(b);
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += blocks[b][k];
        }
        for (std::size_t l = 0; l < biases.size(); ++l) {
            auto dst = net.layer_biases(l);
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += biases[l][k];
        }
        for (std::size_t b = 0; b < blocks.size(); ++b)
            for (double w : net.block(b))
                if (!std::isfinite(w))
                    throw std::runtime_error("td_update: non-finite weight after update");
        for (std::size_t l = 0; l < biases.size(); ++l)
            for (double w : net.layer_biases(l))
                if (!std::isfinite(w))
                    throw std::runtime_error("td_update: non-finite bias after update");
    }

    std::vector<std::vector<double>> blocks;
    std::vector<std::vector<double>> biases;
};

// scale * dQ/dw for every parameter, accumulated. Gradients of Q = -F with
// respect to a weight are the corresponding unit/spin expectation products:
//   visible-hidden edge (v, h): v * <sigma_h>
//   hidden-hidden edge (h, h'): <sigma_h sigma_h'> (within replica, averaged)
//   hidden bias h:              <sigma_h>
//   visible bias v:             v
inline void accumulate_gradient(DeltaAccumulator& acc, const Layout& lay, const Network& net,
                                const BitVec& state, std::size_t action,
                                const FreeEnergyEstimate& est, double scale) {
    const std::size_t last = lay.n_layers() - 1;
    for (std::size_t i = 0; i < lay.state_size; ++i) {
        if (!state[i]) continue;
        acc.biases[0][i] += scale;
        for (std::size_t j = 0; j < lay.layer_size(1); ++j)
            acc.blocks[0][i * lay.layer_size(1) + j] += scale * est.mean_spin[net.hidden_index(1, j)];
    }
    acc.biases[last][action] += scale;
    const std::size_t ab = lay.n_blocks() - 1;
    for (std::size_t i = 0; i < lay.layer_size(ab); ++i)
        acc.blocks[ab][i * lay.action_size + action] +=
            scale * est.mean_spin[net.hidden_index(ab, i)];
    for (std::size_t l = 1; l < last; ++l)
        for (std::size_t j = 0; j < lay.layer_size(l); ++j)
            acc.biases[l][j] += scale * est.mean_spin[net.hidden_index(l, j)];
    const auto& edges = net.hidden_edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const HiddenEdge& edge = edges[e];
        acc.blocks[edge.block][edge.i * lay.layer_size(edge.block + 1) + edge.j] +=
            scale * est.mean_pair[e];
    }
}

}  // namespace detail

// Temporal-difference update over a batch of transitions:
//   td = r + discount * Q_target(s', a*) - Q_policy(s, a)
//   w += learning_rate * td * dQ/dw
// a* follows the agent's target rule; terminal transitions bootstrap with 0.
// Only the policy network changes. All sampler invocations derive their seeds
// from `seed`, the transition index, and the evaluation slot, so a given
// (batch, seed) pair always produces the same update.
inline TdUpdateResult td_update(Agent& agent, std::span<const Transition> batch,
                                std::uint64_t seed) {
    if (batch.empty()) throw std::invalid_argument("td_update: empty batch");
    const Layout& lay = agent.policy_net.layout();
    const std::size_t n_actions = lay.action_size;
    const SamplerParams params = agent.hyper.sampler_params();

    TdUpdateResult result;
    result.td_errors.reserve(batch.size());
    detail::DeltaAccumulator acc(lay);

    for (std::size_t t = 0; t < batch.size(); ++t) {
        const Transition& tr = batch[t];
        if (tr.state.size() != lay.state_size || tr.next_state.size() != lay.state_size)
            throw std::invalid_argument("td_update: transition does not match network layout");
        if (tr.action >= n_actions)
            throw std::invalid_argument("td_update: action index out of range");

        const QEvaluation policy_eval =
            evaluate_q(agent.policy_net, tr.state, one_hot(tr.action, n_actions), params,
                       mix_seed(seed, t, 0));

        double bootstrap = 0.0;
        if (!tr.done) {
            std::vector<double> target_q(n_actions);
            for (std::size_t a = 0; a < n_actions; ++a)
                target_q[a] = q_value(agent.target_net, tr.next_state, one_hot(a, n_actions),
                                      params, mix_seed(seed, t, 1 + a));
            if (agent.hyper.target_rule == TargetRule::max_q) {
                bootstrap = *std::max_element(target_q.begin(), target_q.end());
            } else {
                Rng pick = make_rng(mix_seed(seed, t, 1 + n_actions));
                const std::size_t a = select_action(agent.epsilon, n_actions, pick,
                                                    [&](std::size_t i) { return target_q[i]; });
                bootstrap = target_q[a];
            }
        }

        const double td = tr.reward + agent.hyper.discount * bootstrap - policy_eval.q;
        result.td_errors.push_back(td);
        const double scale = agent.hyper.learning_rate * td;

        if (agent.hyper.update_style == UpdateStyle::per_sample) {
            detail::DeltaAccumulator one(lay);
            detail::accumulate_gradient(one, lay, agent.policy_net, tr.state, tr.action,
                                        policy_eval.estimate, scale);
            one.apply_to(agent.policy_net);
        } else {
            detail::accumulate_gradient(acc, lay, agent.policy_net, tr.state, tr.action,
                                        policy_eval.estimate, scale);
        }
    }
    if (agent.hyper.update_style == UpdateStyle::batch) acc.apply_to(agent.policy_net);
    return result;
}

// Multi-agent wiring: `independent` trains one network and buffer per agent;
// `shared` trains a single network fed by one common buffer.
enum class AgentMode { independent, shared };

struct AgentPool {
    AgentMode mode = AgentMode::independent;
    std::size_t n_agents = 1;
    std::vector<Agent> agents;
    std::vector<ReplayBuffer> buffers;

    std::size_t n_entities() const { return agents.size(); }
    Agent& agent_for(std::size_t agent_id) {
        return agents[mode == AgentMode::shared ? 0 : agent_id];
    }
    const Agent& agent_for(std::size_t agent_id) const {
        return agents[mode == AgentMode::shared ? 0 : agent_id];
    }
    ReplayBuffer& buffer_for(std::size_t agent_id) {
        return buffers[mode == AgentMode::shared ? 0 : agent_id];
    }
};

inline AgentPool make_agent_pool(std::size_t n_agents, AgentMode mode, const Layout& layout,
                                 const Hyperparameters& hp, std::uint64_t seed) {
    if (n_agents == 0) throw std::invalid_argument("make_agent_pool: n_agents must be >= 1");
    AgentPool pool;
    pool.mode = mode;
    pool.n_agents = n_agents;
    const std::size_t entities = (mode == AgentMode::shared) ? 1 : n_agents;
    pool.agents.reserve(entities);
    for (std::size_t e = 0; e < entities; ++e) {
        pool.agents.emplace_back(layout, hp, mix_seed(seed, 0xA6E27, e));
        pool.buffers.emplace_back(hp.buffer_capacity);
    }
    return pool;
}

}  // namespace qbmrl
