#pragma once

#include <adgame/defender.hpp>
#include <adgame/exact_solver.hpp>
#include <adgame/generator.hpp>
#include <adgame/graph_io.hpp>
#include <adgame/kernel.hpp>
#include <adgame/simulator.hpp>
#include <adgame/value_net.hpp>

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace adgame {

enum class Strategy { Edo, Vec, Greedy, Exhaustive };

inline std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Edo: return "edo";
        case Strategy::Vec: return "vec";
        case Strategy::Greedy: return "greedy";
        case Strategy::Exhaustive: return "exhaustive";
    }
    return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
    if (s == "edo") return Strategy::Edo;
    if (s == "vec") return Strategy::Vec;
    if (s == "greedy") return Strategy::Greedy;
    if (s == "exhaustive") return Strategy::Exhaustive;
    return std::nullopt;
}

/// Every experiment knob, with defaults matching the published setup.
struct ExperimentConfig {
    std::string graph_file;  ///< prepared or raw graph; empty = synthetic
    std::size_t n_computers = 500;
    SyntheticParams synthetic;
    ProbabilityDistribution distribution = ProbabilityDistribution::independent();
    std::size_t entry_pool = 40;
    std::size_t entry_count = 20;

    std::size_t budget = 5;
    std::size_t mu = 100;
    std::size_t iterations = 10000;
    std::size_t rounds = 100;
    TrainingConfig training;
    std::string evaluator = "approximator";  ///< approximator | exact
    double unconverged_loss = 0.01;

    std::size_t mc_runs = 100000;
    std::size_t workers = 1;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::string out = "out";
    std::size_t dp_state_budget = ExactSolver::kDefaultStateBudget;
    double enumeration_budget = kDefaultEnumerationBudget;
    bool record_timing = true;

    /// Applies one `key = value` setting. Throws ConfigError on unknown keys.
    void set(const std::string& key, const std::string& value) {
        auto as_size = [&]() -> std::size_t {
            std::size_t v = 0;
            auto r = std::from_chars(value.data(), value.data() + value.size(), v);
            if (r.ec != std::errc{} || r.ptr != value.data() + value.size()) throw ConfigError("key '" + key + "' expects a count, got '" + value + "'");
            return v;
        };
        auto as_double = [&]() -> double {
            double v = 0;
            auto r = std::from_chars(value.data(), value.data() + value.size(), v);
            if (r.ec != std::errc{} || r.ptr != value.data() + value.size()) throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
            return v;
        };
        auto as_bool = [&]() {
            if (value == "true" || value == "1") return true;
            if (value == "false" || value == "0") return false;
            throw ConfigError("key '" + key + "' expects true/false");
        };
        if (key == "graph_file") graph_file = value;
        else if (key == "n_computers") n_computers = as_size();
        else if (key == "gen.users_per_computer") synthetic.users_per_computer = as_double();
        else if (key == "gen.groups_per_computer") synthetic.groups_per_computer = as_double();
        else if (key == "gen.da_candidates") synthetic.da_candidates = as_size();
        else if (key == "gen.group_levels") synthetic.group_levels = as_size();
        else if (key == "gen.memberships_per_user") synthetic.memberships_per_user = as_double();
        else if (key == "gen.nesting_prob") synthetic.nesting_prob = as_double();
        else if (key == "gen.sessions_per_computer") synthetic.sessions_per_computer = as_double();
        else if (key == "gen.admin_rights_per_computer") synthetic.admin_rights_per_computer = as_double();
        else if (key == "gen.user_admin_share") synthetic.user_admin_share = as_double();
        else if (key == "gen.da_sessions") synthetic.da_sessions = as_size();
        else if (key == "gen.da_members") synthetic.da_members = as_size();
        else if (key == "gen.privileged_members") synthetic.privileged_members = as_size();
        else if (key == "distribution") {
            auto d = parse_distribution(value);
            if (!d) throw ConfigError("distribution must be independent, positive or negative");
            distribution = *d;
        }
        else if (key == "entry_pool") entry_pool = as_size();
        else if (key == "entry_count") entry_count = as_size();
        else if (key == "budget") budget = as_size();
        else if (key == "mu") mu = as_size();
        else if (key == "iterations") iterations = as_size();
        else if (key == "rounds") rounds = as_size();
        else if (key == "batch_size") training.batch_size = as_size();
        else if (key == "learning_rate") training.learning_rate = as_double();
        else if (key == "epochs_per_round") training.epochs_per_round = as_size();
        else if (key == "explore_prob") training.explore_prob = as_double();
        else if (key == "hidden_width") training.hidden_width = as_size();
        else if (key == "hidden_depth") training.hidden_depth = as_size();
        else if (key == "evaluator") {
            if (value != "approximator" && value != "exact") throw ConfigError("evaluator must be approximator or exact");
            evaluator = value;
        }
        else if (key == "unconverged_loss") unconverged_loss = as_double();
        else if (key == "mc_runs") mc_runs = as_size();
        else if (key == "workers") workers = as_size();
        else if (key == "seeds") seeds = parse_seed_list(value);
        else if (key == "out") out = value;
        else if (key == "dp_state_budget") dp_state_budget = as_size();
        else if (key == "enumeration_budget") enumeration_budget = as_double();
        else if (key == "record_timing") record_timing = as_bool();
        else throw ConfigError("unknown configuration key '" + key + "'");
    }

    /// "0..9", "0,3,7" or a mix such as "0..2,5".
    static std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
        std::vector<std::uint64_t> out;
        std::stringstream ss(s);
        for (std::string part; std::getline(ss, part, ',');) {
            auto dots = part.find("..");
            auto num = [&](const std::string& t) {
                std::uint64_t v = 0;
                auto r = std::from_chars(t.data(), t.data() + t.size(), v);
                if (r.ec != std::errc{} || r.ptr != t.data() + t.size()) throw ConfigError("bad seed list '" + s + "'");
                return v;
            };
            if (dots == std::string::npos) {
                out.push_back(num(part));
            } else {
                auto lo = num(part.substr(0, dots)), hi = num(part.substr(dots + 2));
                if (hi < lo) throw ConfigError("bad seed range '" + part + "'");
                for (auto v = lo; v <= hi; ++v) out.push_back(v);
            }
        }
        if (out.empty()) throw ConfigError("empty seed list");
        return out;
    }

    /// Reads `key = value` lines; `#` starts a comment.
    void load(std::istream& is) {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string t) {
                auto b = t.find_first_not_of(" \t\r"), e = t.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string{} : t.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    void load_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw IoError("cannot open config '" + path + "'");
        load(is);
    }

    /// Identifies the graph family independent of the seed; records are only
    /// comparable when this matches.
    std::string graph_source() const {
        if (!graph_file.empty()) return "file:" + graph_file;
        std::ostringstream os;
        const auto& p = synthetic;
        os << "synthetic:n=" << n_computers << ",u=" << format_double(p.users_per_computer)
           << ",g=" << format_double(p.groups_per_computer) << ",da=" << p.da_candidates << ",lv=" << p.group_levels
           << ",m=" << format_double(p.memberships_per_user) << ",nest=" << format_double(p.nesting_prob)
           << ",s=" << format_double(p.sessions_per_computer) << ",a=" << format_double(p.admin_rights_per_computer)
           << ",ua=" << format_double(p.user_admin_share) << ",das=" << p.da_sessions << ",dam=" << p.da_members << ",pm=" << p.privileged_members
           << ",pool=" << entry_pool << ",entries=" << entry_count;
        return os.str();
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["graph_source"] = graph_source();
        j["distribution"] = std::string(to_string(distribution.kind));
        j["budget"] = budget;
        j["mu"] = mu;
        j["iterations"] = iterations;
        j["rounds"] = rounds;
        j["batch_size"] = training.batch_size;
        j["learning_rate"] = training.learning_rate;
        j["epochs_per_round"] = training.epochs_per_round;
        j["explore_prob"] = training.explore_prob;
        j["hidden_width"] = training.hidden_width;
        j["hidden_depth"] = training.hidden_depth;
        j["evaluator"] = evaluator;
        j["unconverged_loss"] = unconverged_loss;
        j["mc_runs"] = mc_runs;
        j["dp_state_budget"] = dp_state_budget;
        j["enumeration_budget"] = enumeration_budget;
        return j;
    }
};

/// Generated (or loaded) graph, pruned, with entries, blockable flags and
/// edge probabilities assigned for `seed`.
inline AttackGraph prepare_graph(const ExperimentConfig& cfg, std::uint64_t seed) {
    AttackGraph raw;
    if (!cfg.graph_file.empty()) {
        raw = load_graph(cfg.graph_file);
        if (!raw.entry_nodes().empty() && raw.da()) return prune(raw);
    } else {
        raw = generate_synthetic(cfg.n_computers, seed, cfg.synthetic);
    }
    AttackGraph g = prune(raw);
    auto sel = select_entry_nodes(g, cfg.entry_pool, cfg.entry_count, seed);
    g = prune(with_entry_nodes(std::move(g), sel.nodes));
    g = assign_blockable(std::move(g), seed);
    return sample_edge_probabilities(std::move(g), cfg.distribution, seed);
}

inline std::string graph_digest(const AttackGraph& g) {
    std::ostringstream os;
    write_graph(os, g);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : os.str()) h = (h ^ c) * 1099511628211ULL;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Everything needed to re-check one trial.
struct RunRecord {
    std::string strategy;
    std::uint64_t seed = 0;
    std::string distribution;
    std::string graph_source;
    std::string graph_digest;
    nlohmann::ordered_json config;
    std::size_t nsp_count = 0;
    std::size_t bw_count = 0;
    std::vector<double> round_best;                ///< best population fitness per EDO/VEC round
    std::vector<std::vector<double>> loss_curves;  ///< per training round, per epoch
    bool unconverged = false;
    std::string best_plan;
    double predicted_fitness = 0.0;  ///< under the evaluator that picked the plan
    std::optional<double> exact_fitness;
    std::size_t evaluations = 0;
    SimulationReport simulation;
    std::string simulation_policy;
    double wall_clock = 0.0;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["strategy"] = strategy;
        j["seed"] = seed;
        j["distribution"] = distribution;
        j["graph_source"] = graph_source;
        j["graph_digest"] = graph_digest;
        j["config"] = config;
        j["nsp_count"] = nsp_count;
        j["bw_count"] = bw_count;
        j["round_best"] = round_best;
        j["loss_curves"] = loss_curves;
        j["unconverged"] = unconverged;
        j["best_plan"] = best_plan;
        j["predicted_fitness"] = predicted_fitness;
        j["exact_fitness"] = exact_fitness ? nlohmann::ordered_json(*exact_fitness) : nlohmann::ordered_json(nullptr);
        j["evaluations"] = evaluations;
        j["simulation"] = {{"policy", simulation_policy},
                           {"runs", simulation.runs},
                           {"successes", simulation.successes},
                           {"success_rate", simulation.success_rate},
                           {"std_error", simulation.std_error},
                           {"seconds", simulation.wall_time}};
        j["wall_clock"] = wall_clock;
        return j;
    }

    static RunRecord from_json(const nlohmann::ordered_json& j) {
        try {
            RunRecord r;
            r.strategy = j.at("strategy").get<std::string>();
            r.seed = j.at("seed").get<std::uint64_t>();
            r.distribution = j.at("distribution").get<std::string>();
            r.graph_source = j.at("graph_source").get<std::string>();
            r.graph_digest = j.at("graph_digest").get<std::string>();
            r.config = j.at("config");
            r.nsp_count = j.at("nsp_count").get<std::size_t>();
            r.bw_count = j.at("bw_count").get<std::size_t>();
            r.round_best = j.at("round_best").get<std::vector<double>>();
            r.loss_curves = j.at("loss_curves").get<std::vector<std::vector<double>>>();
            r.unconverged = j.at("unconverged").get<bool>();
            r.best_plan = j.at("best_plan").get<std::string>();
            r.predicted_fitness = j.at("predicted_fitness").get<double>();
            if (!j.at("exact_fitness").is_null()) r.exact_fitness = j.at("exact_fitness").get<double>();
            r.evaluations = j.at("evaluations").get<std::size_t>();
            const auto& sim = j.at("simulation");
            r.simulation_policy = sim.at("policy").get<std::string>();
            r.simulation.runs = sim.at("runs").get<std::size_t>();
            r.simulation.successes = sim.at("successes").get<std::size_t>();
            r.simulation.success_rate = sim.at("success_rate").get<double>();
            r.simulation.std_error = sim.at("std_error").get<double>();
            r.simulation.wall_time = sim.at("seconds").get<double>();
            r.wall_clock = j.at("wall_clock").get<double>();
            return r;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed run record: ") + e.what());
        }
    }
};

/// Artefacts of a trial besides the record.
struct RunArtifacts {
    AttackGraph graph;
    CondensedGraph kernel;
    std::optional<Population> population;
    std::optional<Mlp> network;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::optional<double> try_exact(const CondensedGraph& cg, const BlockingPlan& plan, std::size_t budget) {
    try {
        ExactSolver solver(cg, budget);
        return solver.value(initial_state(cg, plan));
    } catch (const ResourceError&) {
        return std::nullopt;
    }
}

inline EvolutionConfig evolution_config(const ExperimentConfig& cfg) {
    EvolutionConfig evo;
    evo.budget = cfg.budget;
    evo.mu = cfg.mu;
    evo.iterations = cfg.iterations;
    return evo;
}

inline RunRecord new_record(const ExperimentConfig& cfg, Strategy strategy, std::uint64_t seed, const AttackGraph& g,
                            const CondensedGraph& cg) {
    RunRecord rec;
    rec.strategy = std::string(to_string(strategy));
    rec.seed = seed;
    rec.distribution = std::string(to_string(cfg.distribution.kind));
    rec.graph_source = cfg.graph_source();
    rec.graph_digest = graph_digest(g);
    rec.config = cfg.to_json();
    rec.nsp_count = cg.nsp_count();
    rec.bw_count = cg.bw_edges.size();
    if (cg.bw_edges.size() < cfg.budget)
        throw ConfigError("budget k=" + std::to_string(cfg.budget) + " exceeds |BW|=" + std::to_string(cg.bw_edges.size()));
    return rec;
}

/// Alternates `search` (EDO or VEC under the current network) with training.
/// Returns the final population rescored with the final network.
template <typename Search>
Population alternate(const ExperimentConfig& cfg, const CondensedGraph& cg, ValueApproximator& approx, Rng& rng,
                     RunRecord& rec, Search&& search) {
    const EvolutionConfig evo = evolution_config(cfg);
    Population pop;
    bool diverged = false;
    TrainStats last;
    if (cfg.rounds == 0) {
        pop = random_population(cg.bw_edges.size(), make_approximator_evaluator(approx), evo, rng);
        rec.round_best.push_back(pop.best_fitness());
        return pop;
    }
    for (std::size_t r = 0; r < cfg.rounds; ++r) {
        pop = search(make_approximator_evaluator(approx), evo, rng);
        rec.round_best.push_back(pop.best_fitness());
        last = train_round(approx, pop.plans(), cfg.training, rng);
        diverged = diverged || last.diverged;
        rec.loss_curves.push_back(last.epoch_loss);
    }
    last = train_round(approx, pop.plans(), cfg.training, rng);
    diverged = diverged || last.diverged;
    rec.loss_curves.push_back(last.epoch_loss);
    rec.unconverged = diverged || !(last.tail_mean(50) <= cfg.unconverged_loss);

    auto rescore = make_approximator_evaluator(approx);
    for (auto& m : pop.members) m.fitness = rescore(m.plan);
    return pop;
}

inline void finish(const ExperimentConfig& cfg, const CondensedGraph& cg, const BlockingPlan& plan,
                   const PolicyHandle& policy, std::uint64_t seed, RunRecord& rec) {
    rec.best_plan = plan.to_string();
    if (!rec.exact_fitness) rec.exact_fitness = try_exact(cg, plan, cfg.dp_state_budget);
    rec.simulation = simulate(cg, plan, policy, cfg.mc_runs, derive_seed(seed, 0x73696dULL), cfg.workers);
    rec.simulation_policy = std::string(to_string(policy.kind));
}

}  // namespace detail

/// The alternating NNDP-EDO procedure (or an exact-evaluator EDO run when
/// `evaluator = exact`).
inline RunRecord run_nndp_edo(const ExperimentConfig& cfg, std::uint64_t seed, RunArtifacts* artifacts = nullptr) {
    const auto t0 = std::chrono::steady_clock::now();
    AttackGraph g = prepare_graph(cfg, seed);
    CondensedGraph cg = kernelize(g);
    RunRecord rec = detail::new_record(cfg, Strategy::Edo, seed, g, cg);
    Rng rng = make_rng(seed, 0x65646fULL);

    Population pop;
    std::optional<ValueApproximator> approx;
    PolicyHandle policy;
    if (cfg.evaluator == "exact") {
        auto ev = make_exact_evaluator(cg, cfg.dp_state_budget);
        pop = edo_run(cg, ev, detail::evolution_config(cfg), rng);
        rec.round_best.push_back(pop.best_fitness());
        rec.evaluations = ev.evaluations();
        policy = make_exact_policy(cg);
    } else {
        approx.emplace(cg, cfg.training.hidden_width, cfg.training.hidden_depth, seed, cfg.training.learning_rate);
        pop = detail::alternate(cfg, cg, *approx, rng, rec, [&](const FitnessEvaluator& ev, const EvolutionConfig& evo, Rng& r) {
            return edo_run(cg, ev, evo, r);
        });
        policy = make_approximator_policy(*approx);
    }
    const Member& best = pop.members[pop.best()];
    rec.predicted_fitness = best.fitness;
    detail::finish(cfg, cg, best.plan, policy, seed, rec);
    rec.wall_clock = cfg.record_timing ? detail::seconds_since(t0) : 0.0;
    if (!cfg.record_timing) rec.simulation.wall_time = 0.0;
    if (artifacts) {
        artifacts->population = pop;
        if (approx) artifacts->network = approx->net();
        artifacts->graph = std::move(g);
        artifacts->kernel = std::move(cg);
    }
    return rec;
}

/// VEC, Greedy or Exhaustive defender with the same graph/kernel/evaluator
/// wiring. VEC alternates with training like EDO; Greedy trains the network
/// through the NNDP-EDO procedure and then searches greedily with it.
inline RunRecord run_baseline(const ExperimentConfig& cfg, Strategy strategy, std::uint64_t seed,
                              RunArtifacts* artifacts = nullptr) {
    if (strategy == Strategy::Edo) return run_nndp_edo(cfg, seed, artifacts);
    const auto t0 = std::chrono::steady_clock::now();
    AttackGraph g = prepare_graph(cfg, seed);
    CondensedGraph cg = kernelize(g);
    RunRecord rec = detail::new_record(cfg, strategy, seed, g, cg);
    Rng rng = make_rng(seed, 0x65646fULL);
    const std::size_t n_bw = cg.bw_edges.size();
    const bool exact = strategy == Strategy::Exhaustive || cfg.evaluator == "exact";

    std::optional<ValueApproximator> approx;
    std::optional<Population> pop;
    BlockingPlan plan;
    PolicyHandle policy;
    if (exact) {
        auto ev = make_exact_evaluator(cg, cfg.dp_state_budget);
        if (strategy == Strategy::Exhaustive) {
            auto r = exhaustive_run(n_bw, ev, cfg.budget, cfg.enumeration_budget);
            plan = r.plan;
            rec.predicted_fitness = r.fitness;
            rec.exact_fitness = r.fitness;
        } else if (strategy == Strategy::Greedy) {
            auto r = greedy_run(n_bw, ev, cfg.budget);
            plan = r.plan;
            rec.predicted_fitness = r.fitness;
        } else {
            pop = vec_run(cg, ev, detail::evolution_config(cfg), rng);
            rec.round_best.push_back(pop->best_fitness());
            plan = pop->members[pop->best()].plan;
            rec.predicted_fitness = pop->best_fitness();
        }
        rec.evaluations = ev.evaluations();
        policy = make_exact_policy(cg);
    } else {
        approx.emplace(cg, cfg.training.hidden_width, cfg.training.hidden_depth, seed, cfg.training.learning_rate);
        if (strategy == Strategy::Vec) {
            pop = detail::alternate(cfg, cg, *approx, rng, rec, [&](const FitnessEvaluator& ev, const EvolutionConfig& evo, Rng& r) {
                return vec_run(cg, ev, evo, r);
            });
            plan = pop->members[pop->best()].plan;
            rec.predicted_fitness = pop->best_fitness();
        } else {
            detail::alternate(cfg, cg, *approx, rng, rec, [&](const FitnessEvaluator& ev, const EvolutionConfig& evo, Rng& r) {
                return edo_run(cg, ev, evo, r);
            });
            auto ev = make_approximator_evaluator(*approx);
            auto r = greedy_run(n_bw, ev, cfg.budget);
            plan = r.plan;
            rec.predicted_fitness = r.fitness;
            rec.evaluations = ev.evaluations();
        }
        policy = make_approximator_policy(*approx);
    }
    detail::finish(cfg, cg, plan, policy, seed, rec);
    rec.wall_clock = cfg.record_timing ? detail::seconds_since(t0) : 0.0;
    if (!cfg.record_timing) rec.simulation.wall_time = 0.0;
    if (artifacts) {
        artifacts->population = std::move(pop);
        if (approx) artifacts->network = approx->net();
        artifacts->graph = std::move(g);
        artifacts->kernel = std::move(cg);
    }
    return rec;
}

struct ReportRow {
    std::string strategy;
    std::string distribution;
    std::vector<std::pair<std::uint64_t, double>> per_seed;  ///< (seed, success rate)
    double mean_success_rate = 0.0;
    double mean_seconds = 0.0;
};

/// Strategy x distribution table averaged over seeds. Refuses records drawn
/// from different graph families.
inline std::vector<ReportRow> report(const std::vector<RunRecord>& records) {
    if (records.empty()) throw ConfigError("report needs at least one run record");
    for (const auto& r : records)
        if (r.graph_source != records.front().graph_source)
            throw ValidationError("records come from different graph instances ('" + records.front().graph_source +
                                  "' vs '" + r.graph_source + "') and are not comparable");
    std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) groups[{r.strategy, r.distribution}].push_back(&r);
    std::vector<ReportRow> rows;
    for (auto& [key, recs] : groups) {
        std::stable_sort(recs.begin(), recs.end(), [](auto* a, auto* b) { return a->seed < b->seed; });
        ReportRow row{key.first, key.second, {}, 0.0, 0.0};
        for (const RunRecord* r : recs) {
            row.per_seed.emplace_back(r->seed, r->simulation.success_rate);
            row.mean_success_rate += r->simulation.success_rate;
            row.mean_seconds += r->wall_clock;
        }
        row.mean_success_rate /= static_cast<double>(recs.size());
        row.mean_seconds /= static_cast<double>(recs.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_report_table(std::ostream& os, const std::vector<ReportRow>& rows) {
    os << "strategy,distribution,seeds,mean_success_rate,mean_seconds,per_seed\n";
    for (const auto& row : rows) {
        os << row.strategy << ',' << row.distribution << ',' << row.per_seed.size() << ','
           << format_double(row.mean_success_rate) << ',' << format_double(row.mean_seconds) << ',';
        for (std::size_t i = 0; i < row.per_seed.size(); ++i)
            os << (i ? ";" : "") << row.per_seed[i].first << ':' << format_double(row.per_seed[i].second);
        os << '\n';
    }
}

inline void save_record(const RunRecord& rec, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << rec.to_json().dump(2) << '\n';
}

inline RunRecord load_record(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    try {
        return RunRecord::from_json(nlohmann::ordered_json::parse(is));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
}

}  // namespace adgame
