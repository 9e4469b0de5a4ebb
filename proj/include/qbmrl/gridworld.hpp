#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "network.hpp"
#include "rng.hpp"

namespace qbmrl::grid {

// Actions, in index order.
enum Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };
inline constexpr std::size_t kActionCount = 5;

struct Cell {
    int x = 0;
    int y = 0;
    auto operator<=>(const Cell&) const = default;
};

// Static description of a rectangular world. Each agent owns a set of goal
// cells; penalty cells and other agents' goals cost on entry but do not end
// the episode.
struct GridConfig {
    int width = 0;
    int height = 0;
    std::vector<std::vector<Cell>> goals;  // per agent
    std::vector<Cell> penalties;
    std::vector<Cell> walls;
    std::size_t max_steps = 2000;

    std::size_t n_agents() const { return goals.size(); }
    std::size_t n_cells() const { return static_cast<std::size_t>(width) * height; }

    // Two one-hot position/goal layers for multi-agent worlds, one otherwise.
    std::size_t obs_size() const { return n_cells() * (n_agents() > 1 ? 2 : 1); }

    std::size_t cell_index(Cell c) const { return static_cast<std::size_t>(c.y) * width + c.x; }

    bool in_bounds(Cell c) const {
        return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
    }

    bool is_wall(Cell c) const {
        for (Cell w : walls)
            if (w == c) return true;
        return false;
    }

    bool is_penalty(Cell c) const {
        for (Cell p : penalties)
            if (p == c) return true;
        return false;
    }

    bool is_goal_of(Cell c, std::size_t agent) const {
        for (Cell g : goals[agent])
            if (g == c) return true;
        return false;
    }

    void validate() const {
        if (width < 1 || height < 1) throw std::invalid_argument("grid: empty world");
        if (goals.empty()) throw std::invalid_argument("grid: at least one agent required");
        std::set<Cell> special;
        auto claim = [&](Cell c, const char* what) {
            if (!in_bounds(c))
                throw std::invalid_argument(std::string("grid: ") + what + " out of bounds");
            if (!special.insert(c).second)
                throw std::invalid_argument(std::string("grid: ") + what +
                                            " overlaps another special cell");
        };
        for (const auto& agent_goals : goals) {
            if (agent_goals.empty())
                throw std::invalid_argument("grid: every agent needs at least one goal");
            for (Cell g : agent_goals) claim(g, "goal");
        }
        for (Cell p : penalties) claim(p, "penalty");
        for (Cell w : walls) claim(w, "wall");
        if (max_steps == 0) throw std::invalid_argument("grid: max_steps must be >= 1");
    }
};

struct GridState {
    std::vector<Cell> positions;
    std::vector<std::vector<bool>> collected;  // per agent, per goal
    std::vector<bool> done;
    std::size_t step_count = 0;
    bool episode_done = false;
};

// Observation for one agent: its own position plus its uncollected goals in
// layer one; everyone else's positions and uncollected goals in layer two
// (multi-agent worlds only).
inline BitVec encode_observation(const GridState& st, const GridConfig& cfg, std::size_t agent) {
    BitVec obs(cfg.obs_size(), 0);
    const std::size_t cells = cfg.n_cells();
    obs[cfg.cell_index(st.positions[agent])] = 1;
    for (std::size_t g = 0; g < cfg.goals[agent].size(); ++g)
        if (!st.collected[agent][g]) obs[cfg.cell_index(cfg.goals[agent][g])] = 1;
    if (cfg.n_agents() > 1) {
        for (std::size_t other = 0; other < cfg.n_agents(); ++other) {
            if (other == agent) continue;
            obs[cells + cfg.cell_index(st.positions[other])] = 1;
            for (std::size_t g = 0; g < cfg.goals[other].size(); ++g)
                if (!st.collected[other][g])
                    obs[cells + cfg.cell_index(cfg.goals[other][g])] = 1;
        }
    }
    return obs;
}

struct ResetOutcome {
    GridState state;
    std::vector<BitVec> observations;
    std::vector<double> rewards;  // spawn bonuses (+220 per goal spawned on)
};

// Spawns every agent on a uniformly random admissible cell: never a wall, a
// penalty, another agent's goal, or a cell already taken this reset. An
// agent's own goal is admissible; spawning there collects it immediately.
inline ResetOutcome reset(const GridConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t n = cfg.n_agents();
    ResetOutcome out;
    out.state.positions.resize(n);
    out.state.collected.resize(n);
    out.state.done.assign(n, false);
    out.rewards.assign(n, 0.0);

    std::set<Cell> taken;
    for (std::size_t a = 0; a < n; ++a) {
        std::vector<Cell> admissible;
        for (int y = 0; y < cfg.height; ++y)
            for (int x = 0; x < cfg.width; ++x) {
                const Cell c{x, y};
                if (cfg.is_wall(c) || cfg.is_penalty(c) || taken.count(c)) continue;
                bool other_goal = false;
                for (std::size_t o = 0; o < n && !other_goal; ++o)
                    if (o != a && cfg.is_goal_of(c, o)) other_goal = true;
                if (other_goal) continue;
                admissible.push_back(c);
            }
        if (admissible.empty())
            throw std::runtime_error("grid reset: no admissible spawn cell left");
        const Cell spawn = admissible[rand_index(rng, admissible.size())];
        taken.insert(spawn);
        out.state.positions[a] = spawn;

        out.state.collected[a].assign(cfg.goals[a].size(), false);
        for (std::size_t g = 0; g < cfg.goals[a].size(); ++g)
            if (cfg.goals[a][g] == spawn) {
                out.state.collected[a][g] = true;
                out.rewards[a] += 220.0;
            }
        bool all = true;
        for (bool c : out.state.collected[a]) all = all && c;
        out.state.done[a] = all;
    }
    bool all_done = true;
    for (bool d : out.state.done) all_done = all_done && d;
    out.state.episode_done = all_done;

    out.observations.reserve(n);
    for (std::size_t a = 0; a < n; ++a)
        out.observations.push_back(encode_observation(out.state, cfg, a));
    return out;
}

struct StepOutcome {
    std::vector<double> rewards;
    std::vector<BitVec> observations;
    std::vector<bool> done_flags;
    bool episode_done = false;
};

inline Cell moved(Cell c, int action) {
    switch (action) {
        case kUp: return {c.x, c.y - 1};
        case kDown: return {c.x, c.y + 1};
        case kLeft: return {c.x - 1, c.y};
        case kRight: return {c.x + 1, c.y};
        case kStay: return c;
        default: throw std::invalid_argument("grid step: unknown action");
    }
}

// Advances all agents simultaneously. Moves into walls or off the grid leave
// the position unchanged. Each live agent pays -10 per step, gains +220 when
// landing on one of its own uncollected goals, and pays -220 when ending the
// step on a penalty cell or another agent's uncollected goal. Finished agents
// do not move and receive 0. Agents never block each other.
inline StepOutcome step(GridState& st, const GridConfig& cfg,
                        std::span<const int> joint_action) {
    if (st.episode_done) throw std::logic_error("grid step: episode already finished");
    const std::size_t n = cfg.n_agents();
    if (joint_action.size() != n)
        throw std::invalid_argument("grid step: one action per agent required");

    StepOutcome out;
    out.rewards.assign(n, 0.0);
    out.done_flags.assign(n, false);

    for (std::size_t a = 0; a < n; ++a) {
        if (st.done[a]) {
            out.done_flags[a] = true;
            continue;
        }
        Cell target = moved(st.positions[a], joint_action[a]);
        if (!cfg.in_bounds(target) || cfg.is_wall(target)) target = st.positions[a];
        st.positions[a] = target;

        double reward = -10.0;
        bool scored = false;
        for (std::size_t g = 0; g < cfg.goals[a].size(); ++g)
            if (!st.collected[a][g] && cfg.goals[a][g] == target) {
                st.collected[a][g] = true;
                reward += 220.0;
                scored = true;
            }
        if (!scored) {
            bool bad = cfg.is_penalty(target);
            for (std::size_t o = 0; o < n && !bad; ++o) {
                if (o == a) continue;
                for (std::size_t g = 0; g < cfg.goals[o].size() && !bad; ++g)
                    if (!st.collected[o][g] && cfg.goals[o][g] == target) bad = true;
            }
            if (bad) reward -= 220.0;
        }
        out.rewards[a] = reward;

        bool all = true;
        for (bool c : st.collected[a]) all = all && c;
        st.done[a] = all;
        out.done_flags[a] = all;
    }

    ++st.step_count;
    bool all_done = true;
    for (bool d : st.done) all_done = all_done && d;
    st.episode_done = all_done || st.step_count >= cfg.max_steps;
    out.episode_done = st.episode_done;

    out.observations.reserve(n);
    for (std::size_t a = 0; a < n; ++a)
        out.observations.push_back(encode_observation(st, cfg, a));
    return out;
}

// Text layout format: one row per line; '.' free cell, '#' wall, 'X' penalty,
// digit d a goal of agent d. Agents must be numbered contiguously from 0.
inline GridConfig parse_layout(const std::string& text, std::size_t max_steps = 2000) {
    std::vector<std::string> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && rows.empty()) continue;  // leading blank lines
        if (line.empty()) break;                     // blank line terminates the map
        rows.push_back(line);
    }
    if (rows.empty()) throw std::invalid_argument("grid layout: no rows");
    const std::size_t width = rows[0].size();
    for (const std::string& r : rows)
        if (r.size() != width)
            throw std::invalid_argument("grid layout: rows must have equal length");

    GridConfig cfg;
    cfg.width = static_cast<int>(width);
    cfg.height = static_cast<int>(rows.size());
    cfg.max_steps = max_steps;
    int max_digit = -1;
    for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x) {
            const char ch = rows[y][x];
            if (ch == '.') continue;
            if (ch == '#') {
                cfg.walls.push_back({x, y});
            } else if (ch == 'X') {
                cfg.penalties.push_back({x, y});
            } else if (ch >= '0' && ch <= '9') {
                const int d = ch - '0';
                max_digit = std::max(max_digit, d);
                if (cfg.goals.size() <= static_cast<std::size_t>(d))
                    cfg.goals.resize(d + 1);
                cfg.goals[d].push_back({x, y});
            } else {
                throw std::invalid_argument(std::string("grid layout: unknown cell '") + ch +
                                            "'");
            }
        }
    if (max_digit < 0) throw std::invalid_argument("grid layout: no goals");
    for (int d = 0; d <= max_digit; ++d)
        if (cfg.goals[d].empty())
            throw std::invalid_argument("grid layout: agent " + std::to_string(d) +
                                        " has no goal (agents must be contiguous)");
    cfg.validate();
    return cfg;
}

inline GridConfig load_layout(const std::string& path, std::size_t max_steps = 2000) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("grid layout: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_layout(buf.str(), max_steps);
}

// Steps of the shortest route from `from` to `to` that never crosses a wall,
// a penalty cell, or (when avoid_goals_of_others is set) another agent's goal.
// Returns -1 if unreachable.
inline int shortest_path_steps(const GridConfig& cfg, Cell from, Cell to, std::size_t agent = 0,
                               bool avoid_goals_of_others = true) {
    auto blocked = [&](Cell c) {
        if (cfg.is_wall(c) || cfg.is_penalty(c)) return true;
        if (avoid_goals_of_others)
            for (std::size_t o = 0; o < cfg.n_agents(); ++o)
                if (o != agent && cfg.is_goal_of(c, o)) return true;
        return false;
    };
    if (from == to) return 0;
    if (blocked(to)) return -1;
    std::vector<int> dist(cfg.n_cells(), -1);
    std::deque<Cell> queue;
    dist[cfg.cell_index(from)] = 0;
    queue.push_back(from);
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (int action : {kUp, kDown, kLeft, kRight}) {
            const Cell nxt = moved(c, action);
            if (!cfg.in_bounds(nxt) || blocked(nxt)) continue;
            if (dist[cfg.cell_index(nxt)] != -1) continue;
            dist[cfg.cell_index(nxt)] = dist[cfg.cell_index(c)] + 1;
            if (nxt == to) return dist[cfg.cell_index(nxt)];
            queue.push_back(nxt);
        }
    }
    return -1;
}

}  // namespace qbmrl::grid
