#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "agent.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "gridworld.hpp"
#include "stats.hpp"

namespace qbmrl {

struct EpisodeRecord {
    std::size_t run = 0;
    std::size_t episode = 0;
    std::size_t agent = 0;
    double reward = 0.0;
    std::size_t steps = 0;
    double epsilon = 0.0;
};

struct TrainRunOutput {
    std::vector<EpisodeRecord> records;
    AgentPool pool;
};

// One training run: fresh networks, nb_episodes episodes, one row per agent
// per episode. Everything stochastic derives from `seed`, so a (config, seed)
// pair reproduces the run exactly.
//
// Loop shape per environment step: live agents pick epsilon-greedy actions,
// the world advances, each live agent's transition is recorded, and once the
// warm-up is over every trainable entity performs one weight update, decays
// its epsilon, and possibly syncs its target. Variants without the replay
// buffer train on the current step's transitions; variants without the
// separate target sync every step, so the target is the previous policy.
inline TrainRunOutput train_single_run(const ExperimentConfig& cfg,
                                       const grid::GridConfig& world, std::size_t run_index,
                                       std::uint64_t seed, std::ostream* progress = nullptr) {
    cfg.hyper.validate();
    const std::size_t n_agents = world.n_agents();

    Layout layout;
    layout.state_size = world.obs_size();
    layout.action_size = grid::kActionCount;
    layout.hidden = cfg.hidden_layout;

    TrainRunOutput out{{}, make_agent_pool(n_agents, cfg.agent_mode, layout, cfg.hyper,
                                           mix_seed(seed, 0x1A17))};
    AgentPool& pool = out.pool;
    const bool replay = uses_replay(cfg.variant);
    const bool separate_target = uses_separate_target(cfg.variant);
    const std::size_t sync_period = separate_target ? cfg.hyper.target_update_period : 1;
    for (Agent& a : pool.agents) a.hyper.target_update_period = sync_period;

    Rng env_rng = make_rng(mix_seed(seed, 0xE27));
    std::vector<Rng> policy_rng;
    for (std::size_t a = 0; a < n_agents; ++a)
        policy_rng.push_back(make_rng(mix_seed(seed, 0xB0A7, a)));
    std::vector<Rng> batch_rng;
    for (std::size_t e = 0; e < pool.n_entities(); ++e)
        batch_rng.push_back(make_rng(mix_seed(seed, 0xBA7C4, e)));

    std::size_t global_step = 0;
    for (std::size_t episode = 0; episode < cfg.nb_episodes; ++episode) {
        grid::ResetOutcome start = grid::reset(world, env_rng);
        grid::GridState state = start.state;
        std::vector<BitVec> obs = start.observations;
        std::vector<double> episode_reward = start.rewards;
        // Audits the logged reward: sums every reward the environment emits,
        // independent of the live-agent bookkeeping above.
        std::vector<double> reward_audit = start.rewards;
        std::size_t steps = 0;

        while (!state.episode_done) {
            std::vector<int> joint(n_agents, grid::kStay);
            std::vector<bool> live(n_agents);
            for (std::size_t a = 0; a < n_agents; ++a) {
                live[a] = !state.done[a];
                if (live[a])
                    joint[a] = static_cast<int>(
                        select_action(pool.agent_for(a), obs[a], policy_rng[a]));
            }

            grid::StepOutcome next = grid::step(state, world, joint);
            ++global_step;
            ++steps;
            for (std::size_t a = 0; a < n_agents; ++a) reward_audit[a] += next.rewards[a];

            std::vector<Transition> current;
            std::vector<int> current_of(n_agents, -1);
            for (std::size_t a = 0; a < n_agents; ++a) {
                if (!live[a]) continue;
                episode_reward[a] += next.rewards[a];
                Transition tr{obs[a], static_cast<std::size_t>(joint[a]), next.rewards[a],
                              next.observations[a], next.done_flags[a]};
                if (replay) pool.buffer_for(a).push(tr);
                current_of[a] = static_cast<int>(current.size());
                current.push_back(std::move(tr));
            }

            if (global_step >= cfg.hyper.warm_up) {
                for (std::size_t e = 0; e < pool.n_entities(); ++e) {
                    Agent& agent = pool.agents[e];
                    std::vector<Transition> batch;
                    if (replay) {
                        ReplayBuffer& buf = pool.buffers[e];
                        if (buf.size() < agent.hyper.minibatch_size) continue;
                        batch = sample_minibatch(buf, agent.hyper.minibatch_size, batch_rng[e]);
                    } else {
                        if (pool.mode == AgentMode::shared) {
                            batch = current;
                        } else if (current_of[e] >= 0) {
                            batch.push_back(current[current_of[e]]);
                        }
                    }
                    if (batch.empty()) continue;
                    td_update(agent, batch, mix_seed(seed, global_step, 0x7D, e));
                    decay_epsilon(agent);
                }
                for (Agent& a : pool.agents) maybe_sync_target(a, global_step);
            }

            obs = std::move(next.observations);
        }

        for (std::size_t a = 0; a < n_agents; ++a) {
            if (episode_reward[a] != reward_audit[a])
                throw std::logic_error("train: logged episode reward diverged from the audit sum");
            out.records.push_back({run_index, episode, a, episode_reward[a], steps,
                                   pool.agent_for(a).epsilon});
        }
        if (progress && ((episode + 1) % 50 == 0 || episode + 1 == cfg.nb_episodes)) {
            double team = 0.0;
            for (std::size_t a = 0; a < n_agents; ++a) team += episode_reward[a];
            (*progress) << "[run " << run_index << "] episode " << (episode + 1) << "/"
                        << cfg.nb_episodes << "  steps=" << steps << "  team_reward=" << team
                        << "  eps=" << pool.agents[0].epsilon << '\n';
            progress->flush();
        }
    }
    return out;
}

inline void write_episode_csv(std::ostream& out, std::span<const EpisodeRecord> records) {
    out << "run,episode,agent,reward,steps,epsilon\n";
    for (const EpisodeRecord& r : records)
        out << r.run << ',' << r.episode << ',' << r.agent << ',' << csv::format_number(r.reward)
            << ',' << r.steps << ',' << csv::format_number(r.epsilon) << '\n';
}

// Runs every seed of the experiment and lays the artifacts out as
//   <out>/config.txt
//   <out>/run<k>/episodes.csv
//   <out>/run<k>/agent<i>.net   (shared mode: shared.net)
inline void run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                           std::ostream* progress = nullptr) {
    cfg.validate();
    const grid::GridConfig world = resolve_domain(cfg.domain, cfg.nb_steps);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream cf(out_dir / "config.txt");
        if (!cf) throw std::runtime_error("run_experiment: cannot write config.txt");
        cfg.save(cf);
    }
    const auto seeds = cfg.run_seeds();
    for (std::size_t run = 0; run < seeds.size(); ++run) {
        if (progress) {
            (*progress) << "=== run " << run << " (seed " << seeds[run] << ") ===\n";
            progress->flush();
        }
        TrainRunOutput result = train_single_run(cfg, world, run, seeds[run], progress);
        const auto run_dir = out_dir / ("run" + std::to_string(run));
        std::filesystem::create_directories(run_dir);
        {
            std::ofstream ep(run_dir / "episodes.csv");
            if (!ep) throw std::runtime_error("run_experiment: cannot write episodes.csv");
            write_episode_csv(ep, result.records);
        }
        for (std::size_t e = 0; e < result.pool.n_entities(); ++e) {
            const std::string name = (cfg.agent_mode == AgentMode::shared)
                                         ? "shared.net"
                                         : ("agent" + std::to_string(e) + ".net");
            std::ofstream nf(run_dir / name);
            if (!nf) throw std::runtime_error("run_experiment: cannot write " + name);
            result.pool.agents[e].policy_net.save(nf);
        }
    }
}

// A policy maps (agent, observation) -> action; `seed_stream` feeds any
// stochastic evaluation the policy needs.
using PolicyFn = std::function<int(std::size_t agent, const BitVec& obs, Rng& rng)>;

struct EvalStats {
    std::vector<double> episode_rewards;  // team reward per episode
    stats::BoxStats box;
};

// Greedy rollout statistics over fresh episodes (no learning, no exploration).
inline EvalStats evaluate_policy(const PolicyFn& policy, const grid::GridConfig& world,
                                 std::size_t episodes, std::uint64_t seed) {
    if (episodes == 0) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
    Rng env_rng = make_rng(mix_seed(seed, 0xE7A1));
    Rng policy_rng = make_rng(mix_seed(seed, 0x90C1));
    const std::size_t n_agents = world.n_agents();

    EvalStats out;
    out.episode_rewards.reserve(episodes);
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        grid::ResetOutcome start = grid::reset(world, env_rng);
        grid::GridState state = start.state;
        std::vector<BitVec> obs = start.observations;
        double team = 0.0;
        for (double r : start.rewards) team += r;
        while (!state.episode_done) {
            std::vector<int> joint(n_agents, grid::kStay);
            for (std::size_t a = 0; a < n_agents; ++a)
                if (!state.done[a]) joint[a] = policy(a, obs[a], policy_rng);
            grid::StepOutcome next = grid::step(state, world, joint);
            for (double r : next.rewards) team += r;
            obs = std::move(next.observations);
        }
        out.episode_rewards.push_back(team);
    }
    out.box = stats::box_stats(out.episode_rewards);
    return out;
}

// Greedy policy backed by trained networks (one per agent, or a single shared
// one).
inline PolicyFn greedy_policy(const std::vector<Network>& nets, const Hyperparameters& hyper) {
    if (nets.empty()) throw std::invalid_argument("greedy_policy: no networks");
    const SamplerParams params = hyper.sampler_params();
    return [nets, params](std::size_t agent, const BitVec& obs, Rng& rng) -> int {
        const Network& net = nets[agent < nets.size() ? agent : 0];
        const std::size_t n_actions = net.layout().action_size;
        return static_cast<int>(select_action(0.0, n_actions, rng, [&](std::size_t a) {
            return q_value(net, obs, one_hot(a, n_actions), params, rng());
        }));
    };
}

}  // namespace qbmrl
