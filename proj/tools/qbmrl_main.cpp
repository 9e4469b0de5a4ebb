// Command line front end: train experiments, evaluate checkpoints, summarize
// result directories.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "qbmrl/qbmrl.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_train(const std::string& config_path, const std::string& out_dir, bool quiet) {
    const qbmrl::ExperimentConfig cfg = qbmrl::ExperimentConfig::from_file(config_path);
    qbmrl::run_experiment(cfg, out_dir, quiet ? nullptr : &std::cerr);
    std::cout << "wrote " << cfg.run_seeds().size() << " runs to " << out_dir << '\n';
    return 0;
}

int cmd_eval(const std::vector<std::string>& checkpoints, const std::string& domain,
             std::size_t episodes, const std::string& config_path, std::uint64_t seed,
             const std::string& out_file) {
    qbmrl::Hyperparameters hyper;
    std::size_t max_steps = 2000;
    if (!config_path.empty()) {
        const qbmrl::ExperimentConfig cfg = qbmrl::ExperimentConfig::from_file(config_path);
        hyper = cfg.hyper;
        max_steps = cfg.nb_steps;
    }
    const qbmrl::grid::GridConfig world = qbmrl::resolve_domain(domain, max_steps);

    std::vector<qbmrl::Network> nets;
    for (const std::string& path : checkpoints) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("eval: cannot open checkpoint " + path);
        nets.push_back(qbmrl::Network::load(in));
    }
    if (nets.size() != 1 && nets.size() != world.n_agents())
        throw std::runtime_error("eval: need one checkpoint total or one per agent");
    for (const qbmrl::Network& net : nets) {
        if (net.layout().state_size != world.obs_size())
            throw std::runtime_error("eval: checkpoint does not match the domain observation");
        if (net.layout().action_size != qbmrl::grid::kActionCount)
            throw std::runtime_error("eval: checkpoint has the wrong action count");
    }

    const qbmrl::EvalStats stats =
        qbmrl::evaluate_policy(qbmrl::greedy_policy(nets, hyper), world, episodes, seed);
    const auto& b = stats.box;
    std::cout << "episodes=" << b.count << " median=" << qbmrl::csv::format_number(b.median)
              << " q1=" << qbmrl::csv::format_number(b.q1)
              << " q3=" << qbmrl::csv::format_number(b.q3)
              << " min=" << qbmrl::csv::format_number(b.min)
              << " max=" << qbmrl::csv::format_number(b.max) << '\n';
    if (!out_file.empty()) {
        std::ofstream out(out_file);
        if (!out) throw std::runtime_error("eval: cannot write " + out_file);
        out << "episode,reward\n";
        for (std::size_t ep = 0; ep < stats.episode_rewards.size(); ++ep)
            out << ep << ',' << qbmrl::csv::format_number(stats.episode_rewards[ep]) << '\n';
    }
    return 0;
}

int cmd_summarize(const std::string& in_dir, const std::string& out_dir) {
    qbmrl::write_summary(in_dir, out_dir);
    std::cout << "summary written to " << out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"free-energy reinforcement learning on gridworlds"};
    app.require_subcommand(1);

    auto* train = app.add_subcommand("train", "run a training experiment");
    std::string train_config, train_out;
    bool train_quiet = false;
    train->add_option("--config", train_config, "experiment config file")->required();
    train->add_option("--out", train_out, "output directory")->required();
    train->add_flag("--quiet", train_quiet, "suppress progress output");

    auto* eval = app.add_subcommand("eval", "evaluate trained checkpoints greedily");
    std::vector<std::string> eval_checkpoints;
    std::string eval_domain, eval_config, eval_out;
    std::size_t eval_episodes = 100;
    std::uint64_t eval_seed = 1;
    eval->add_option("--checkpoint", eval_checkpoints,
                     "checkpoint file (repeat for one per agent)")
        ->required();
    eval->add_option("--domain", eval_domain, "builtin domain name or layout file")->required();
    eval->add_option("--episodes", eval_episodes, "number of evaluation episodes");
    eval->add_option("--config", eval_config, "config file providing sampler settings");
    eval->add_option("--seed", eval_seed, "evaluation seed");
    eval->add_option("--out", eval_out, "write per-episode rewards to this csv");

    auto* summarize = app.add_subcommand("summarize", "aggregate experiment outputs");
    std::string sum_in, sum_out;
    summarize->add_option("--in", sum_in, "directory containing experiment outputs")->required();
    summarize->add_option("--out", sum_out, "directory for summary tables")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(train_config, train_out, train_quiet);
        if (eval->parsed())
            return cmd_eval(eval_checkpoints, eval_domain, eval_episodes, eval_config, eval_seed,
                            eval_out);
        if (summarize->parsed()) return cmd_summarize(sum_in, sum_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
