// Command-line front end: graph preparation, kernelization, exact solving,
// network training, defender search, simulation and result tables.

#include <adgame/adgame.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;
using namespace adgame;

namespace {

struct Common {
    std::string config_file;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out;

    void attach(CLI::App* app) {
        app->add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
        app->add_option("--set", overrides, "override one configuration key (key=value)");
        app->add_option("--seed", seed, "trial seed");
        app->add_option("--out", out, "output directory");
    }

    ExperimentConfig config() const {
        ExperimentConfig cfg;
        if (!config_file.empty()) cfg.load_file(config_file);
        for (const auto& kv : overrides) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!out.empty()) cfg.out = out;
        return cfg;
    }

    std::uint64_t seed_or_first(const ExperimentConfig& cfg) const { return seed ? *seed : cfg.seeds.front(); }
};

fs::path ensure_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
    return p;
}

template <typename Fn>
void write_text(const fs::path& path, Fn&& body) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    body(os);
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

void print_line(const nlohmann::ordered_json& j) { std::cout << j.dump() << '\n'; }

std::optional<BlockingPlan> parse_plan(const std::string& bits) {
    if (bits.empty()) return std::nullopt;
    if (bits == "-") return BlockingPlan();
    return BlockingPlan::from_string(bits);
}

BlockingPlan plan_or_empty(const std::string& bits, const CondensedGraph& cg) {
    auto p = parse_plan(bits);
    BlockingPlan plan = p ? *p : BlockingPlan::from_indices(cg.bw_edges.size(), {});
    if (plan.size() != cg.bw_edges.size())
        throw ConfigError("plan has " + std::to_string(plan.size()) + " bits but the kernel has " +
                          std::to_string(cg.bw_edges.size()) + " block-worthy edges");
    return plan;
}

// --------------------------------------------------------------------------

int cmd_generate(const Common& c, bool raw) {
    ExperimentConfig cfg = c.config();
    const std::uint64_t seed = c.seed_or_first(cfg);
    AttackGraph g = raw ? generate_synthetic(cfg.n_computers, seed, cfg.synthetic) : prepare_graph(cfg, seed);
    const fs::path dir = ensure_dir(cfg.out);
    save_graph(g, (dir / "graph.txt").string());
    print_line({{"command", "generate"},
                {"seed", seed},
                {"nodes", g.node_count()},
                {"edges", g.edge_count()},
                {"entries", g.entry_nodes().size()},
                {"graph", (dir / "graph.txt").string()}});
    return 0;
}

int cmd_kernelize(const Common& c, const std::string& graph_file) {
    ExperimentConfig cfg = c.config();
    AttackGraph g = load_graph(graph_file);
    CondensedGraph cg = kernelize(g);
    const fs::path dir = ensure_dir(cfg.out);
    write_text(dir / "kernel.txt", [&](std::ostream& os) { write_kernel_report(os, cg, g); });
    print_line({{"command", "kernelize"},
                {"nsps", cg.nsp_count()},
                {"bw", cg.bw_edges.size()},
                {"entries", cg.entry_nodes.size()},
                {"splits", cg.split_nodes.size()},
                {"kernel", (dir / "kernel.txt").string()}});
    return 0;
}

int cmd_solve_exact(const Common& c, const std::string& graph_file, const std::string& plan_bits) {
    ExperimentConfig cfg = c.config();
    AttackGraph g = load_graph(graph_file);
    CondensedGraph cg = kernelize(g);
    BlockingPlan plan = plan_or_empty(plan_bits, cg);
    ExactSolver solver(cg, cfg.dp_state_budget);
    const AttackerState s0 = initial_state(cg, plan);
    const DpResult r = solver.solve(s0);
    const fs::path dir = ensure_dir(cfg.out);
    write_text(dir / "solve_exact.txt", [&](std::ostream& os) {
        os << "plan " << (plan.size() ? plan.to_string() : "-") << '\n';
        os << "value " << format_double(r.value) << '\n';
        os << "best_action " << (r.best_action ? std::to_string(*r.best_action) : "-") << '\n';
        os << "states " << solver.memo_size() << '\n';
    });
    nlohmann::ordered_json j{{"command", "solve-exact"}, {"plan", plan.to_string()}, {"value", r.value}};
    j["best_action"] = r.best_action ? nlohmann::ordered_json(*r.best_action) : nlohmann::ordered_json(nullptr);
    j["states"] = solver.memo_size();
    print_line(j);
    return 0;
}

int cmd_train(const Common& c, const std::string& graph_file, const std::string& population_file,
              const std::string& checkpoint_in) {
    ExperimentConfig cfg = c.config();
    const std::uint64_t seed = c.seed_or_first(cfg);
    AttackGraph g = load_graph(graph_file);
    CondensedGraph cg = kernelize(g);
    Rng rng = make_rng(seed, 0x747261696eULL);

    std::vector<BlockingPlan> plans;
    if (!population_file.empty()) {
        std::ifstream is(population_file);
        if (!is) throw IoError("cannot open '" + population_file + "'");
        plans = read_population(is).plans();
        for (const auto& p : plans)
            if (p.size() != cg.bw_edges.size()) throw ConfigError("population plans do not match the kernel");
    } else {
        if (cg.bw_edges.size() < cfg.budget) throw ConfigError("budget exceeds |BW|");
        for (std::size_t i = 0; i < cfg.mu; ++i) plans.push_back(random_plan(cg.bw_edges.size(), cfg.budget, rng));
    }
    if (plans.empty()) throw ConfigError("no plans to train on");

    std::optional<ValueApproximator> approx;
    CheckpointMeta meta{seed, 0};
    if (!checkpoint_in.empty()) {
        approx.emplace(cg, load_checkpoint(checkpoint_in, &meta), cfg.training.learning_rate);
    } else {
        approx.emplace(cg, cfg.training.hidden_width, cfg.training.hidden_depth, seed, cfg.training.learning_rate);
    }
    const fs::path dir = ensure_dir(cfg.out);
    bool diverged = false;
    double tail = 0.0;
    write_text(dir / "loss.csv", [&](std::ostream& os) {
        os << "round,epoch,loss\n";
        for (std::size_t r = 0; r < cfg.rounds; ++r) {
            TrainStats st = train_round(*approx, plans, cfg.training, rng);
            for (std::size_t e = 0; e < st.epoch_loss.size(); ++e)
                os << meta.round + r << ',' << e << ',' << format_double(st.epoch_loss[e]) << '\n';
            diverged = diverged || st.diverged;
            tail = st.tail_mean(50);
        }
    });
    meta.round += cfg.rounds;
    save_checkpoint((dir / "checkpoint.bin").string(), approx->net(), meta);
    print_line({{"command", "train"},
                {"rounds", cfg.rounds},
                {"final_loss", tail},
                {"unconverged", diverged || !(tail <= cfg.unconverged_loss)},
                {"checkpoint", (dir / "checkpoint.bin").string()}});
    return 0;
}

void persist_trial(const fs::path& dir, const RunRecord& rec, const RunArtifacts& art) {
    ensure_dir(dir.string());
    save_graph(art.graph, (dir / "graph.txt").string());
    write_text(dir / "kernel.txt", [&](std::ostream& os) { write_kernel_report(os, art.kernel, art.graph); });
    if (art.population)
        write_text(dir / "population.txt", [&](std::ostream& os) { write_population(os, *art.population); });
    if (art.network)
        save_checkpoint((dir / "checkpoint.bin").string(), *art.network, CheckpointMeta{rec.seed, rec.loss_curves.size()});
    write_text(dir / "simulation.csv", [&](std::ostream& os) {
        write_report_csv_header(os);
        write_report_csv(os, rec.best_plan, rec.simulation_policy, rec.simulation);
    });
    save_record(rec, (dir / "record.json").string());
}

int cmd_defend(const Common& c, const std::string& strategy_name, const std::string& seed_list, std::size_t jobs) {
    ExperimentConfig cfg = c.config();
    auto strategy = parse_strategy(strategy_name);
    if (!strategy) throw ConfigError("unknown strategy '" + strategy_name + "'");
    std::vector<std::uint64_t> seeds = c.seed ? std::vector<std::uint64_t>{*c.seed}
                                       : seed_list.empty() ? cfg.seeds
                                                           : ExperimentConfig::parse_seed_list(seed_list);
    const fs::path root = ensure_dir(cfg.out);
    const bool single = seeds.size() == 1 && c.seed.has_value();

    std::vector<std::optional<RunRecord>> records(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::mutex next_mutex;
    std::size_t next = 0;
    auto worker = [&] {
        while (true) {
            std::size_t i;
            {
                std::lock_guard lock(next_mutex);
                if (next == seeds.size()) return;
                i = next++;
            }
            try {
                RunArtifacts art;
                RunRecord rec = run_baseline(cfg, *strategy, seeds[i], &art);
                persist_trial(single ? root : root / ("seed_" + std::to_string(seeds[i])), rec, art);
                records[i] = std::move(rec);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    jobs = std::max<std::size_t>(1, std::min(jobs, seeds.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<RunRecord> done;
    for (auto& r : records) done.push_back(std::move(*r));
    const auto rows = report(done);
    write_text(root / "report.csv", [&](std::ostream& os) { write_report_table(os, rows); });
    write_report_table(std::cout, rows);
    return 0;
}

int cmd_simulate(const Common& c, const std::string& graph_file, const std::string& plan_bits,
                 const std::string& policy_name, const std::string& checkpoint, bool on_original) {
    ExperimentConfig cfg = c.config();
    const std::uint64_t seed = c.seed_or_first(cfg);
    AttackGraph g = load_graph(graph_file);
    CondensedGraph cg = kernelize(g);
    BlockingPlan plan = plan_or_empty(plan_bits, cg);

    std::optional<ValueApproximator> approx;
    PolicyHandle policy;
    if (policy_name == "exact") {
        policy = make_exact_policy(std::make_shared<ExactSolver>(cg, cfg.dp_state_budget));
    } else if (policy_name == "approximator") {
        if (checkpoint.empty()) throw ConfigError("the approximator policy needs --checkpoint");
        approx.emplace(cg, load_checkpoint(checkpoint));
        policy = make_approximator_policy(*approx);
    } else {
        throw ConfigError("policy must be exact or approximator");
    }
    SimulationReport r = on_original ? simulate_on_original(g, cg, plan, policy, cfg.mc_runs, seed, cfg.workers)
                                     : simulate(cg, plan, policy, cfg.mc_runs, seed, cfg.workers);
    if (!cfg.record_timing) r.wall_time = 0.0;
    const fs::path dir = ensure_dir(cfg.out);
    write_text(dir / "simulation.csv", [&](std::ostream& os) {
        write_report_csv_header(os);
        write_report_csv(os, plan.size() ? plan.to_string() : "-", to_string(policy.kind), r);
    });
    print_line({{"command", "simulate"},
                {"runs", r.runs},
                {"successes", r.successes},
                {"success_rate", r.success_rate},
                {"std_error", r.std_error}});
    return 0;
}

int cmd_report(const Common& c, const std::vector<std::string>& inputs) {
    std::vector<RunRecord> records;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::recursive_directory_iterator(in))
                if (entry.is_regular_file() && entry.path().filename() == "record.json") found.push_back(entry.path());
            std::sort(found.begin(), found.end());
            for (const auto& p : found) records.push_back(load_record(p.string()));
        } else {
            records.push_back(load_record(in));
        }
    }
    const auto rows = report(records);
    if (!c.out.empty()) {
        const fs::path dir = ensure_dir(c.out);
        write_text(dir / "report.csv", [&](std::ostream& os) { write_report_table(os, rows); });
    }
    write_report_table(std::cout, rows);
    return 0;
}

void print_error(const std::string& kind, const std::string& message) {
    nlohmann::ordered_json j{{"error", kind}, {"message", message}};
    std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attacker-defender games on Active Directory attack graphs"};
    app.require_subcommand(1);

    Common common;

    auto* gen = app.add_subcommand("generate", "generate and prepare a synthetic attack graph");
    common.attach(gen);
    bool raw = false;
    gen->add_flag("--raw", raw, "write the generator output without pruning or sampling");

    std::string graph_file, plan_bits, population_file, checkpoint, policy_name = "exact", seed_list;
    std::size_t jobs = 1;
    bool on_original = false;

    auto* ker = app.add_subcommand("kernelize", "extract NSPs and block-worthy edges");
    common.attach(ker);
    ker->add_option("--graph", graph_file, "prepared graph file")->required()->check(CLI::ExistingFile);

    auto* solve = app.add_subcommand("solve-exact", "exact attacker value of a blocking plan");
    common.attach(solve);
    solve->add_option("--graph", graph_file, "prepared graph file")->required()->check(CLI::ExistingFile);
    solve->add_option("--plan", plan_bits, "blocking plan as a bit string (default: nothing blocked)");

    auto* train = app.add_subcommand("train", "train the value network on a population of plans");
    common.attach(train);
    train->add_option("--graph", graph_file, "prepared graph file")->required()->check(CLI::ExistingFile);
    train->add_option("--population", population_file, "population snapshot (default: random plans)")
        ->check(CLI::ExistingFile);
    train->add_option("--checkpoint", checkpoint, "resume from this checkpoint")->check(CLI::ExistingFile);

    auto* defend = app.add_subcommand("defend", "run a defender strategy over one or more seeds");
    common.attach(defend);
    std::string strategy_name;
    defend->add_option("strategy", strategy_name, "edo | vec | greedy | exhaustive")
        ->required()
        ->check(CLI::IsMember({"edo", "vec", "greedy", "exhaustive"}));
    defend->add_option("--seeds", seed_list, "seed list such as 0..9 or 1,4,7");
    defend->add_option("--jobs", jobs, "seeds run concurrently")->check(CLI::PositiveNumber);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo success rate of the attacker");
    common.attach(sim);
    sim->add_option("--graph", graph_file, "prepared graph file")->required()->check(CLI::ExistingFile);
    sim->add_option("--plan", plan_bits, "blocking plan as a bit string (default: nothing blocked)");
    sim->add_option("--policy", policy_name, "exact | approximator");
    sim->add_option("--checkpoint", checkpoint, "network checkpoint for the approximator policy")
        ->check(CLI::ExistingFile);
    sim->add_flag("--original", on_original, "walk the original graph edge by edge");

    auto* rep = app.add_subcommand("report", "comparison table from run records");
    std::vector<std::string> inputs;
    rep->add_option("records", inputs, "record.json files or directories holding them")->required();
    rep->add_option("--out", common.out, "directory for report.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage_error", e.what());
        return 2;
    }

    try {
        if (*gen) return cmd_generate(common, raw);
        if (*ker) return cmd_kernelize(common, graph_file);
        if (*solve) return cmd_solve_exact(common, graph_file, plan_bits);
        if (*train) return cmd_train(common, graph_file, population_file, checkpoint);
        if (*defend) return cmd_defend(common, strategy_name, seed_list, jobs);
        if (*sim) return cmd_simulate(common, graph_file, plan_bits, policy_name, checkpoint, on_original);
        if (*rep) return cmd_report(common, inputs);
    } catch (const Error& e) {
        print_error(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal_error", e.what());
        return 1;
    }
    return 1;
}
