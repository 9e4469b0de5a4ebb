#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"
#include "stats.hpp"

namespace qbmrl {

// Data of one experiment directory: per run, the team reward of every episode.
struct ExperimentData {
    std::string name;
    std::string variant;
    std::vector<std::vector<double>> run_rewards;  // [run][episode]
};

// Reads <dir>/run*/episodes.csv, summing agent rewards into team rewards.
inline ExperimentData load_experiment(const std::filesystem::path& dir,
                                      const std::string& name) {
    ExperimentData data;
    data.name = name;
    {
        std::ifstream cf(dir / "config.txt");
        if (!cf) throw std::runtime_error("summarize: missing config.txt in " + dir.string());
        const ExperimentConfig cfg = ExperimentConfig::parse(cf, (dir / "config.txt").string());
        data.variant = detail::variant_names().to_string(cfg.variant);
    }
    std::vector<std::filesystem::path> run_files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_directory()) continue;
        const auto csv_path = entry.path() / "episodes.csv";
        if (std::filesystem::exists(csv_path)) run_files.push_back(csv_path);
    }
    std::sort(run_files.begin(), run_files.end());
    if (run_files.empty())
        throw std::runtime_error("summarize: no run*/episodes.csv under " + dir.string());

    for (const auto& path : run_files) {
        const csv::Table t = csv::read_file(path.string());
        const std::size_t ep_col = t.column("episode");
        const std::size_t reward_col = t.column("reward");
        std::map<std::size_t, double> team;  // episode -> summed reward
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto episode =
                static_cast<std::size_t>(csv::to_number(t, r, ep_col, path.string()));
            team[episode] += csv::to_number(t, r, reward_col, path.string());
        }
        std::vector<double> rewards;
        rewards.reserve(team.size());
        for (std::size_t ep = 0; ep < team.size(); ++ep) {
            const auto it = team.find(ep);
            if (it == team.end())
                throw std::runtime_error("summarize: " + path.string() +
                                         ": episodes are not contiguous");
            rewards.push_back(it->second);
        }
        data.run_rewards.push_back(std::move(rewards));
    }
    const std::size_t episodes = data.run_rewards.front().size();
    for (const auto& run : data.run_rewards)
        if (run.size() != episodes)
            throw std::runtime_error("summarize: runs of " + name +
                                     " disagree on episode count");
    return data;
}

// Mean team reward per episode across runs.
inline std::vector<double> mean_curve(const ExperimentData& data) {
    if (data.run_rewards.empty()) throw std::invalid_argument("mean_curve: no runs");
    const std::size_t episodes = data.run_rewards.front().size();
    std::vector<double> curve(episodes, 0.0);
    for (const auto& run : data.run_rewards)
        for (std::size_t ep = 0; ep < episodes; ++ep) curve[ep] += run[ep];
    for (double& v : curve) v /= static_cast<double>(data.run_rewards.size());
    return curve;
}

// Standard deviation of the last `window` episode rewards, averaged over runs.
// Runs shorter than the window use everything they have.
inline double avg_tail_std(const ExperimentData& data, std::size_t window = 100) {
    if (data.run_rewards.empty()) throw std::invalid_argument("avg_tail_std: no runs");
    double acc = 0.0;
    for (const auto& run : data.run_rewards) {
        const std::size_t n = std::min(window, run.size());
        acc += stats::stddev(std::span<const double>(run.data() + run.size() - n, n));
    }
    return acc / static_cast<double>(data.run_rewards.size());
}

// Scans `in_dir` recursively for experiment directories (those containing a
// config.txt) and writes three machine-readable tables into `out_dir`:
//   learning_curves.csv  experiment,variant,episode,mean_reward
//   comparison.csv       experiment,variant,runs,episodes,mean_tail100,std_tail100
//   eval_box.csv         experiment,file,count,median,q1,q3,min,max
// eval_box.csv covers any eval*.csv files (episode,reward) found next to a
// config.txt; the file is written only when at least one exists.
inline void write_summary(const std::filesystem::path& in_dir,
                          const std::filesystem::path& out_dir) {
    if (!std::filesystem::is_directory(in_dir))
        throw std::runtime_error("summarize: not a directory: " + in_dir.string());

    std::vector<std::filesystem::path> roots;
    if (std::filesystem::exists(in_dir / "config.txt")) roots.push_back(in_dir);
    for (const auto& entry : std::filesystem::recursive_directory_iterator(in_dir)) {
        if (entry.is_regular_file() && entry.path().filename() == "config.txt" &&
            entry.path().parent_path() != in_dir)
            roots.push_back(entry.path().parent_path());
    }
    std::sort(roots.begin(), roots.end());
    if (roots.empty())
        throw std::runtime_error("summarize: no experiment (config.txt) under " +
                                 in_dir.string());

    std::filesystem::create_directories(out_dir);
    std::ofstream curves(out_dir / "learning_curves.csv");
    std::ofstream comparison(out_dir / "comparison.csv");
    if (!curves || !comparison)
        throw std::runtime_error("summarize: cannot write output files");
    curves << "experiment,variant,episode,mean_reward\n";
    comparison << "experiment,variant,runs,episodes,mean_tail100,std_tail100\n";

    std::vector<std::string> eval_rows;
    for (const auto& root : roots) {
        const std::string name =
            (root == in_dir) ? root.filename().string()
                             : std::filesystem::relative(root, in_dir).generic_string();
        const ExperimentData data = load_experiment(root, name);
        const std::vector<double> curve = mean_curve(data);
        for (std::size_t ep = 0; ep < curve.size(); ++ep)
            curves << name << ',' << data.variant << ',' << ep << ','
                   << csv::format_number(curve[ep]) << '\n';

        const std::size_t episodes = data.run_rewards.front().size();
        const std::size_t window = std::min<std::size_t>(100, episodes);
        std::vector<double> tail_means;
        for (const auto& run : data.run_rewards)
            tail_means.push_back(stats::mean(
                std::span<const double>(run.data() + run.size() - window, window)));
        comparison << name << ',' << data.variant << ',' << data.run_rewards.size() << ','
                   << episodes << ',' << csv::format_number(stats::mean(tail_means)) << ','
                   << csv::format_number(avg_tail_std(data, window)) << '\n';

        for (const auto& entry : std::filesystem::directory_iterator(root)) {
            if (!entry.is_regular_file()) continue;
            const std::string fname = entry.path().filename().string();
            if (fname.rfind("eval", 0) != 0 || entry.path().extension() != ".csv") continue;
            const csv::Table t = csv::read_file(entry.path().string());
            const std::size_t reward_col = t.column("reward");
            std::vector<double> rewards;
            for (std::size_t r = 0; r < t.rows.size(); ++r)
                rewards.push_back(csv::to_number(t, r, reward_col, entry.path().string()));
            if (rewards.empty()) continue;
            const stats::BoxStats b = stats::box_stats(rewards);
            eval_rows.push_back(name + ',' + fname + ',' + std::to_string(b.count) + ',' +
                                csv::format_number(b.median) + ',' + csv::format_number(b.q1) +
                                ',' + csv::format_number(b.q3) + ',' +
                                csv::format_number(b.min) + ',' + csv::format_number(b.max));
        }
    }
    if (!eval_rows.empty()) {
        std::sort(eval_rows.begin(), eval_rows.end());
        std::ofstream eval_out(out_dir / "eval_box.csv");
        if (!eval_out) throw std::runtime_error("summarize: cannot write eval_box.csv");
        eval_out << "experiment,file,count,median,q1,q3,min,max\n";
        for (const auto& row : eval_rows) eval_out << row << '\n';
    }
}

}  // namespace qbmrl
