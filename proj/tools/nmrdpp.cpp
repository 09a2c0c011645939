// nmrdpp — command-line front end: scripted sessions and one-shot solves.

#include <CLI11.hpp>

#include <nmrdpp/session.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

std::atomic<bool> g_interrupt{false};

void on_signal(int) { g_interrupt.store(true); }

int run_command(const std::string& script, uint64_t seed, size_t max_estates,
                const std::string& out_dir) {
    namespace fs = std::filesystem;
    nmrdpp::Session session(std::cout);
    session.max_estates = max_estates;
    session.interrupt = &g_interrupt;
    session.search_dirs = {".", "worlds"};
    (void)seed;

    int code;
    if (script == "-") {
        code = session.run_script(std::cin, /*interactive=*/true);
    } else {
        std::ifstream in(script);
        if (!in) {
            std::cerr << "error: cannot open script " << script << "\n";
            return 1;
        }
        session.search_dirs.push_back(fs::path(script).parent_path().string());
        code = session.run_script(in);
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream csv(fs::path(out_dir) / "stats.csv");
        csv << nmrdpp::export_stats_csv(session.stats());
    }
    return code;
}

int solve_command(const std::string& world_path, const std::string& method,
                  const std::string& solver, double beta, double eps, size_t max_estates,
                  const std::string& heuristic, const std::string& out_dir) {
    using namespace nmrdpp;
    std::ostringstream script;
    script << "loadWorld('" << world_path << "')\n";
    std::string m = method == "sim"   ? "sPltl"
                    : method == "min" ? "mPltl"
                    : method == "str" ? "strPltl"
                                      : "fltl";
    script << "preprocess('" << m << "')\n";
    if (solver == "vi" || solver == "pi") {
        script << "expand\n";
        script << "domainStateSize\n";
        script << (solver == "vi" ? "valIt(" : "polIt(") << beta << ", " << eps << ")\n";
    } else if (solver == "lao") {
        script << "lao(" << beta << ", " << eps << ", '" << heuristic << "')\n";
        script << "expandedStateCount\n";
    } else {
        script << "spudd(" << beta << ", " << eps << ")\n";
    }
    script << "iterationCount\n";

    Session session(std::cout);
    session.max_estates = max_estates;
    session.interrupt = &g_interrupt;
    session.search_dirs = {".", "worlds"};
    std::istringstream in(script.str());
    int code = session.run_script(in);
    if (code == 0 && !session.stats().empty()) {
        const StatsRow& r = session.stats().back();
        std::cout << "valueAtStart " << r.value_at_start << "\n";
    }
    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        std::ofstream csv(fs::path(out_dir) / "stats.csv");
        csv << export_stats_csv(session.stats());
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);

    CLI::App app{"decision-theoretic planning with temporally extended rewards"};
    app.require_subcommand(1);

    std::string script, out_dir;
    uint64_t seed = 0;
    size_t max_estates = 1'000'000;

    CLI::App* run = app.add_subcommand("run", "run a command script ('-' for interactive)");
    run->add_option("script", script, "script file")->required();
    run->add_option("--seed", seed, "random seed");
    run->add_option("--max-estates", max_estates, "expansion cap");
    run->add_option("--out", out_dir, "directory for stats.csv");

    std::string world_path, method = "fltl", solver = "vi", heuristic = "sumRewards";
    double beta = 0.99, eps = 1e-4;
    CLI::App* solve = app.add_subcommand("solve", "solve one world end to end");
    solve->add_option("world", world_path, "world file")->required();
    solve->add_option("--method", method, "sim|min|str|fltl")
        ->check(CLI::IsMember({"sim", "min", "str", "fltl"}));
    solve->add_option("--solver", solver, "vi|pi|lao|spudd")
        ->check(CLI::IsMember({"vi", "pi", "lao", "spudd"}));
    solve->add_option("--beta", beta, "discount factor");
    solve->add_option("--eps", eps, "convergence parameter");
    solve->add_option("--max-estates", max_estates, "expansion cap");
    solve->add_option("--heuristic", heuristic, "sumRewards|unserved50|<number>");
    solve->add_option("--out", out_dir, "directory for stats.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(script, seed, max_estates, out_dir);
        return solve_command(world_path, method, solver, beta, eps, max_estates, heuristic,
                             out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
