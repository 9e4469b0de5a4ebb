#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agent.hpp"
#include "csv.hpp"
#include "gridworld.hpp"

namespace qbmrl {

// Which stabilizers the training loop uses. `plain` updates on the current
// transition with the policy network as its own target; the other variants
// switch on the replay buffer, the separated target network, or both.
enum class Variant { plain, erb_only, target_only, erb_and_target };

inline bool uses_replay(Variant v) {
    return v == Variant::erb_only || v == Variant::erb_and_target;
}
inline bool uses_separate_target(Variant v) {
    return v == Variant::target_only || v == Variant::erb_and_target;
}

namespace detail {

template <typename T>
struct EnumNames {
    std::vector<std::pair<std::string, T>> entries;

    std::string to_string(T v) const {
        for (const auto& [name, val] : entries)
            if (val == v) return name;
        throw std::logic_error("unknown enum value");
    }
    T parse(const std::string& name, const std::string& key) const {
        for (const auto& [n, val] : entries)
            if (n == name) return val;
        std::string allowed;
        for (const auto& [n, val] : entries) allowed += (allowed.empty() ? "" : ", ") + n;
        throw std::runtime_error("config: bad value '" + name + "' for " + key +
                                 " (allowed: " + allowed + ")");
    }
};

inline const EnumNames<Variant>& variant_names() {
    static const EnumNames<Variant> n{{{"plain", Variant::plain},
                                       {"erb_only", Variant::erb_only},
                                       {"target_only", Variant::target_only},
                                       {"erb_and_target", Variant::erb_and_target}}};
    return n;
}
inline const EnumNames<AgentMode>& agent_mode_names() {
    static const EnumNames<AgentMode> n{
        {{"independent", AgentMode::independent}, {"shared", AgentMode::shared}}};
    return n;
}
inline const EnumNames<CouplingMode>& coupling_mode_names() {
    static const EnumNames<CouplingMode> n{{{"literal", CouplingMode::literal},
                                            {"suzuki_trotter", CouplingMode::suzuki_trotter}}};
    return n;
}
inline const EnumNames<TargetRule>& target_rule_names() {
    static const EnumNames<TargetRule> n{
        {{"max", TargetRule::max_q}, {"sarsa", TargetRule::sarsa}}};
    return n;
}
inline const EnumNames<UpdateStyle>& update_style_names() {
    static const EnumNames<UpdateStyle> n{
        {{"batch", UpdateStyle::batch}, {"per_sample", UpdateStyle::per_sample}}};
    return n;
}

}  // namespace detail

// Builtin world layouts, addressable by name wherever a domain path is
// accepted.
inline const std::map<std::string, std::string>& builtin_domains() {
    static const std::map<std::string, std::string> domains = {
        {"grid3x3",
         ".0.\n"
         "...\n"
         "...\n"},
        {"grid5x3",
         "...X.\n"
         "0....\n"
         ".....\n"},
        {"grid3x3_2agent",
         ".0.\n"
         "...\n"
         ".1.\n"},
        {"grid5x3_2agent",
         "...X.\n"
         "0...1\n"
         ".....\n"},
    };
    return domains;
}

inline grid::GridConfig resolve_domain(const std::string& name_or_path,
                                       std::size_t max_steps = 2000) {
    const auto& builtins = builtin_domains();
    if (auto it = builtins.find(name_or_path); it != builtins.end())
        return grid::parse_layout(it->second, max_steps);
    return grid::load_layout(name_or_path, max_steps);
}

// Full description of a training experiment: the world, the variant and agent
// wiring, run counts, and every hyperparameter. Serializes to a flat
// key = value file; parsing rejects unknown keys.
struct ExperimentConfig {
    std::string domain = "grid3x3";
    AgentMode agent_mode = AgentMode::independent;
    Variant variant = Variant::erb_and_target;
    std::vector<std::size_t> hidden_layout = {4, 4, 4};
    std::size_t nb_episodes = 500;
    std::size_t nb_steps = 2000;
    std::size_t nb_runs = 10;
    std::vector<std::uint64_t> seeds;  // empty -> 1..nb_runs
    Hyperparameters hyper;

    std::vector<std::uint64_t> run_seeds() const {
        if (!seeds.empty()) return seeds;
        std::vector<std::uint64_t> s(nb_runs);
        for (std::size_t i = 0; i < nb_runs; ++i) s[i] = i + 1;
        return s;
    }

    void validate() const {
        if (nb_episodes == 0) throw std::invalid_argument("config: nb_episodes must be >= 1");
        if (nb_steps == 0) throw std::invalid_argument("config: nb_steps must be >= 1");
        if (nb_runs == 0) throw std::invalid_argument("config: nb_runs must be >= 1");
        if (!seeds.empty() && seeds.size() != nb_runs)
            throw std::invalid_argument("config: seeds must match nb_runs");
        if (hidden_layout.empty())
            throw std::invalid_argument("config: hidden_layout must be non-empty");
        hyper.validate();
        resolve_domain(domain, nb_steps);  // must exist and parse
    }

    static ExperimentConfig parse(std::istream& in, const std::string& source);
    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        return parse(in, path);
    }
    void save(std::ostream& out) const;
};

inline ExperimentConfig ExperimentConfig::parse(std::istream& in, const std::string& source) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    };
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + msg);
    };
    auto parse_u64 = [&](const std::string& v) -> std::uint64_t {
        try {
            std::size_t pos = 0;
            const unsigned long long r = std::stoull(v, &pos);
            if (pos != v.size()) fail("bad integer '" + v + "'");
            return r;
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception&) {
            fail("bad integer '" + v + "'");
        }
        return 0;
    };
    auto parse_f64 = [&](const std::string& v) -> double {
        try {
            std::size_t pos = 0;
            const double r = std::stod(v, &pos);
            if (pos != v.size()) fail("bad number '" + v + "'");
            return r;
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception&) {
            fail("bad number '" + v + "'");
        }
        return 0;
    };
    auto parse_bool = [&](const std::string& v) -> bool {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        fail("bad boolean '" + v + "'");
        return false;
    };
    auto split_list = [&](const std::string& v) {
        std::vector<std::string> items;
        std::string item;
        std::istringstream ss(v);
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) fail("empty list element");
            items.push_back(item);
        }
        return items;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (value.empty()) fail("empty value for " + key);

        if (key == "domain") cfg.domain = value;
        else if (key == "agent_mode") cfg.agent_mode = detail::agent_mode_names().parse(value, key);
        else if (key == "variant") cfg.variant = detail::variant_names().parse(value, key);
        else if (key == "hidden_layout") {
            cfg.hidden_layout.clear();
            for (const auto& item : split_list(value))
                cfg.hidden_layout.push_back(parse_u64(item));
        } else if (key == "nb_episodes") cfg.nb_episodes = parse_u64(value);
        else if (key == "nb_steps") cfg.nb_steps = parse_u64(value);
        else if (key == "nb_runs") cfg.nb_runs = parse_u64(value);
        else if (key == "seeds") {
            cfg.seeds.clear();
            for (const auto& item : split_list(value)) cfg.seeds.push_back(parse_u64(item));
        } else if (key == "learning_rate") cfg.hyper.learning_rate = parse_f64(value);
        else if (key == "discount") cfg.hyper.discount = parse_f64(value);
        else if (key == "epsilon_initial") cfg.hyper.epsilon_initial = parse_f64(value);
        else if (key == "epsilon_min") cfg.hyper.epsilon_min = parse_f64(value);
        else if (key == "epsilon_decay") cfg.hyper.epsilon_decay = parse_f64(value);
        else if (key == "minibatch_size") cfg.hyper.minibatch_size = parse_u64(value);
        else if (key == "warm_up") cfg.hyper.warm_up = parse_u64(value);
        else if (key == "target_update_period") cfg.hyper.target_update_period = parse_u64(value);
        else if (key == "buffer_capacity") cfg.hyper.buffer_capacity = parse_u64(value);
        else if (key == "replicas") cfg.hyper.n_replicas = parse_u64(value);
        else if (key == "n_reads") cfg.hyper.n_reads = parse_u64(value);
        else if (key == "num_sweeps") cfg.hyper.num_sweeps = parse_u64(value);
        else if (key == "beta") cfg.hyper.beta = parse_f64(value);
        else if (key == "temperature") cfg.hyper.temperature = parse_f64(value);
        else if (key == "gamma_initial") cfg.hyper.gamma_initial = parse_f64(value);
        else if (key == "gamma_final") cfg.hyper.gamma_final = parse_f64(value);
        else if (key == "coupling_mode")
            cfg.hyper.coupling_mode = detail::coupling_mode_names().parse(value, key);
        else if (key == "target_rule")
            cfg.hyper.target_rule = detail::target_rule_names().parse(value, key);
        else if (key == "update_style")
            cfg.hyper.update_style = detail::update_style_names().parse(value, key);
        else if (key == "random_sweep_order") cfg.hyper.random_sweep_order = parse_bool(value);
        else fail("unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

inline void ExperimentConfig::save(std::ostream& out) const {
    auto num = [](double v) { return csv::format_number(v); };
    out << "domain = " << domain << '\n';
    out << "agent_mode = " << detail::agent_mode_names().to_string(agent_mode) << '\n';
    out << "variant = " << detail::variant_names().to_string(variant) << '\n';
    out << "hidden_layout = ";
    for (std::size_t i = 0; i < hidden_layout.size(); ++i)
        out << (i ? "," : "") << hidden_layout[i];
    out << '\n';
    out << "nb_episodes = " << nb_episodes << '\n';
    out << "nb_steps = " << nb_steps << '\n';
    out << "nb_runs = " << nb_runs << '\n';
    const auto rs = run_seeds();
    out << "seeds = ";
    for (std::size_t i = 0; i < rs.size(); ++i) out << (i ? "," : "") << rs[i];
    out << '\n';
    out << "learning_rate = " << num(hyper.learning_rate) << '\n';
    out << "discount = " << num(hyper.discount) << '\n';
    out << "epsilon_initial = " << num(hyper.epsilon_initial) << '\n';
    out << "epsilon_min = " << num(hyper.epsilon_min) << '\n';
    out << "epsilon_decay = " << num(hyper.epsilon_decay) << '\n';
    out << "minibatch_size = " << hyper.minibatch_size << '\n';
    out << "warm_up = " << hyper.warm_up << '\n';
    out << "target_update_period = " << hyper.target_update_period << '\n';
    out << "buffer_capacity = " << hyper.buffer_capacity << '\n';
    out << "replicas = " << hyper.n_replicas << '\n';
    out << "n_reads = " << hyper.n_reads << '\n';
    out << "num_sweeps = " << hyper.num_sweeps << '\n';
    out << "beta = " << num(hyper.beta) << '\n';
    out << "temperature = " << num(hyper.temperature) << '\n';
    out << "gamma_initial = " << num(hyper.gamma_initial) << '\n';
    out << "gamma_final = " << num(hyper.gamma_final) << '\n';
    out << "coupling_mode = " << detail::coupling_mode_names().to_string(hyper.coupling_mode)
        << '\n';
    out << "target_rule = " << detail::target_rule_names().to_string(hyper.target_rule) << '\n';
    out << "update_style = " << detail::update_style_names().to_string(hyper.update_style)
        << '\n';
    out << "random_sweep_order = " << (hyper.random_sweep_order ? "true" : "false") << '\n';
}

}  // namespace qbmrl
