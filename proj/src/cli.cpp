#include "coopstab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "coopstab/action.hpp"
#include "coopstab/csv.hpp"
#include "coopstab/equilibria.hpp"
#include "coopstab/flow.hpp"
#include "coopstab/hypotheses.hpp"
#include "coopstab/lyapunov.hpp"
#include "coopstab/sde.hpp"

namespace coopstab {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return j;
}

void write_json_file(const fs::path& path, const ojson& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out << j.dump(2) << "\n";
}

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson eigs_to_json(const std::vector<std::complex<double>>& eigs) {
    ojson arr = ojson::array();
    for (const auto& ev : eigs) arr.push_back({{"re", ev.real()}, {"im", ev.imag()}});
    return arr;
}

ojson points_to_json(const std::vector<Vec>& pts) {
    ojson arr = ojson::array();
    for (const auto& p : pts) arr.push_back(vec_to_json(p));
    return arr;
}

ojson prediction_to_json(const SupportPrediction& p) {
    return ojson{{"regime", p.regime},
                 {"origin", p.origin},
                 {"ray_roots", p.ray_roots},
                 {"marginal", p.marginal}};
}

ojson report_to_json(const HypothesisReport& rep) {
    ojson params = ojson::object();
    for (const auto& [k, v] : rep.params) params[k] = finite_or_null(v);
    return ojson{{"which", rep.which},
                 {"pass", rep.pass},
                 {"margin", finite_or_null(rep.margin)},
                 {"grid", rep.grid_desc},
                 {"failing_points", static_cast<long>(rep.failing_points.size())},
                 {"params", params}};
}

HistogramGrid grid_from_json(const json& j, int dim) {
    require_keys(j, {"lo", "hi", "bins"}, "grid");
    HistogramGrid g;
    g.lo = vec_from_json(j.at("lo"), dim);
    g.hi = vec_from_json(j.at("hi"), dim);
    for (int b : j.at("bins").get<std::vector<int>>()) g.bins.push_back(b);
    g.validate();
    if (g.dim() != dim) throw ConfigError("grid: dimension mismatch with the model");
    return g;
}

struct RunContext {
    Model model;
    std::uint64_t seed = 0;
    fs::path out;
    int threads = 1;
    json cfg;
};

int cmd_equilibria(const RunContext& ctx, const json& block) {
    require_keys(block, {"seeds"}, "equilibria");
    ojson out;
    if (ctx.model.griffith) {
        const auto cls = classify_griffith(*ctx.model.griffith);
        out["phi"] = cls.summary.phi;
        out["phi_m"] = cls.summary.phi_m ? ojson(*cls.summary.phi_m) : ojson(nullptr);
        out["roots"] = cls.summary.roots;
        ojson eq = ojson::array();
        for (const auto& rec : cls.records) {
            ojson e{{"point", vec_to_json(rec.point)},
                    {"eigs", eigs_to_json(rec.eigenvalues)},
                    {"class", to_string(rec.classification)}};
            if (rec.griffith_root) e["root"] = *rec.griffith_root;
            if (rec.ratio_slope) e["ratio_slope"] = *rec.ratio_slope;
            if (!rec.note.empty()) e["note"] = rec.note;
            eq.push_back(std::move(e));
        }
        out["equilibria"] = std::move(eq);
        out["stable_set"] = points_to_json(cls.stable_set());
        out["predicted"] = prediction_to_json(cls.summary.predicted);
        std::cout << "equilibria: " << cls.records.size() << " found, "
                  << cls.stable_set().size() << " stable\n";
    } else {
        if (!block.contains("seeds"))
            throw ConfigError("equilibria: non-Griffith models need 'seeds'");
        std::vector<Vec> seeds;
        for (const auto& s : block.at("seeds")) seeds.push_back(vec_from_json(s, ctx.model.dim));
        const auto res = newton_equilibria(ctx.model, seeds);
        out["phi"] = nullptr;
        out["phi_m"] = nullptr;
        out["roots"] = ojson::array();
        ojson eq = ojson::array();
        for (const auto& rec : res.records)
            eq.push_back({{"point", vec_to_json(rec.point)},
                          {"eigs", eigs_to_json(rec.eigenvalues)},
                          {"class", to_string(rec.classification)}});
        out["equilibria"] = std::move(eq);
        ojson stable = ojson::array();
        for (const auto& rec : res.records)
            if (rec.classification == Stability::AsymptoticallyStable)
                stable.push_back(vec_to_json(rec.point));
        out["stable_set"] = std::move(stable);
        out["failed_seeds"] = points_to_json(res.failed_seeds);
        std::cout << "equilibria: " << res.records.size() << " found, "
                  << res.failed_seeds.size() << " seeds failed\n";
    }
    write_json_file(ctx.out / "equilibria.json", out);
    return kExitOk;
}

int cmd_simulate(const RunContext& ctx, const json& block) {
    require_keys(block, {"x0", "eps", "T", "step", "n_paths", "store_paths"}, "simulate");
    const Vec x0 = vec_from_json(block.at("x0"), ctx.model.dim);
    const double eps = block.at("eps").get<double>();
    const double T = block.at("T").get<double>();
    const double step = block.at("step").get<double>();
    const int n_paths = block.value("n_paths", 1);
    if (n_paths < 1) throw ConfigError("simulate: n_paths must be >= 1");

    EnsembleOptions eo;
    eo.threads = ctx.threads;
    eo.store_full_paths = block.value("store_paths", n_paths == 1);
    const auto runs = ensemble(ctx.model, x0, eps, T, step, n_paths, ctx.seed, eo);

    int blowups = 0;
    Vec mean = Vec::Zero(ctx.model.dim);
    double second = 0.0;
    int completed = 0;
    for (const auto& run : runs) {
        if (run.blown_up) {
            ++blowups;
            continue;
        }
        mean += run.trajectory.final_state();
        second += run.trajectory.final_state().squaredNorm();
        ++completed;
    }
    if (completed > 0) {
        mean /= completed;
        second /= completed;
    }

    if (eo.store_full_paths)
        for (std::size_t i = 0; i < runs.size(); ++i)
            write_trajectory_csv((ctx.out / ("trajectory_" + std::to_string(i) + ".csv")).string(),
                                 runs[i].trajectory);

    ojson out{{"eps", eps},
              {"T", T},
              {"step", step},
              {"seed", ctx.seed},
              {"n_paths", n_paths},
              {"blowups", blowups},
              {"flagged", blowups > 0 ? ojson("blow-up") : ojson(nullptr)},
              {"moments", {{"mean", vec_to_json(mean)}, {"second_moment", second}}}};
    write_json_file(ctx.out / "simulate.json", out);
    std::cout << "simulate: " << n_paths << " path(s), " << blowups << " blow-up(s)\n";
    return blowups > 0 ? kExitNumerical : kExitOk;
}

std::vector<Vec> default_centers(const Model& model) {
    std::vector<Vec> centers;
    if (model.griffith)
        for (const auto& rec : classify_griffith(*model.griffith).records)
            centers.push_back(rec.point);
    return centers;
}

int cmd_stationary(const RunContext& ctx, const json& block) {
    require_keys(block,
                 {"x0", "eps", "T_total", "step", "burn_in", "grid", "ball_radius", "centers"},
                 "stationary");
    const Vec x0 = vec_from_json(block.at("x0"), ctx.model.dim);
    const double eps = block.at("eps").get<double>();
    const double T_total = block.at("T_total").get<double>();
    const double step = block.at("step").get<double>();
    const HistogramGrid grid = grid_from_json(block.at("grid"), ctx.model.dim);

    StationaryOptions so;
    so.burn_in = block.value("burn_in", 0.2);
    so.ball_radius = block.value("ball_radius", 0.2);
    std::vector<Vec> centers;
    if (block.contains("centers"))
        for (const auto& c : block.at("centers")) centers.push_back(vec_from_json(c, ctx.model.dim));
    else
        centers = default_centers(ctx.model);

    const auto est =
        estimate_stationary(ctx.model, x0, eps, T_total, step, ctx.seed, grid, centers, so);

    write_histogram_csv((ctx.out / "histogram.csv").string(), est);
    ojson out{{"eps", eps},
              {"T_total", T_total},
              {"step", step},
              {"seed", ctx.seed},
              {"burn_in", so.burn_in},
              {"ball_radius", so.ball_radius},
              {"total_samples", est.total_samples},
              {"outside_fraction", est.outside_fraction},
              {"valid", est.valid},
              {"flag", est.flag.empty() ? ojson(nullptr) : ojson(est.flag)},
              {"centers", points_to_json(centers)},
              {"ball_masses", est.ball_masses},
              {"second_moment", est.second_moment()}};
    write_json_file(ctx.out / "stationary.json", out);
    std::cout << "stationary: eps=" << eps << (est.valid ? "" : " [flagged: blow-up]") << "\n";
    return est.valid ? kExitOk : kExitNumerical;
}

ojson sweep_report_to_json(const ConcentrationReport& rep) {
    ojson rows = ojson::array();
    for (const auto& row : rep.rows)
        rows.push_back({{"eps", row.eps},
                        {"T_total", row.T_total},
                        {"stable_mass", row.stable_mass},
                        {"unstable_mass", row.unstable_mass},
                        {"leftover", row.leftover},
                        {"valid", row.valid}});
    ojson out{{"rows", std::move(rows)}, {"monotone", rep.monotone}};
    out["predicted"] = rep.predicted ? prediction_to_json(*rep.predicted) : ojson(nullptr);
    out["agrees_with_classification"] = rep.agrees_with_classification;
    return out;
}

int cmd_sweep(const RunContext& ctx, const json& block) {
    require_keys(block,
                 {"x0", "eps_list", "step", "t_scale", "t_min", "t_cap", "grid", "ball_radius",
                  "burn_in"},
                 "sweep");
    SweepOptions so;
    so.threads = ctx.threads;
    so.step = block.value("step", 1e-3);
    so.t_scale = block.value("t_scale", 0.5);
    so.t_min = block.value("t_min", 50.0);
    so.t_cap = block.value("t_cap", 2000.0);
    so.stationary.ball_radius = block.value("ball_radius", 0.2);
    so.stationary.burn_in = block.value("burn_in", 0.2);
    if (block.contains("x0")) so.x0 = vec_from_json(block.at("x0"), ctx.model.dim);
    if (block.contains("grid")) so.grid = grid_from_json(block.at("grid"), ctx.model.dim);
    const auto eps_list = block.at("eps_list").get<std::vector<double>>();

    const auto rep = concentration_sweep(ctx.model, eps_list, ctx.seed, so);
    for (std::size_t i = 0; i < rep.estimates.size(); ++i)
        write_histogram_csv((ctx.out / ("histogram_" + std::to_string(i) + ".csv")).string(),
                            rep.estimates[i]);
    write_json_file(ctx.out / "sweep.json", sweep_report_to_json(rep));

    bool all_valid = true;
    for (const auto& row : rep.rows) all_valid = all_valid && row.valid;
    std::cout << "sweep: " << eps_list.size() << " noise levels, monotone="
              << (rep.monotone ? "yes" : "no") << "\n";
    return all_valid ? kExitOk : kExitNumerical;
}

int cmd_quasipotential(const RunContext& ctx, const json& block) {
    require_keys(block, {"x", "y", "T_grid", "segments", "escape_delta", "reach_ball"},
                 "quasipotential");
    const Vec x = vec_from_json(block.at("x"), ctx.model.dim);
    const Vec y = vec_from_json(block.at("y"), ctx.model.dim);
    const auto T_grid = block.at("T_grid").get<std::vector<double>>();
    const int segments = block.value("segments", 200);
    QuasipotentialOptions qo;
    qo.threads = ctx.threads;
    qo.escape_delta = block.value("escape_delta", 1e-2);
    qo.reach_ball = block.value("reach_ball", 1e-2);

    const auto est = quasipotential(ctx.model, x, y, T_grid, segments, qo);
    write_path_csv((ctx.out / "qp_path.csv").string(), est.path);
    ojson out{{"x", vec_to_json(x)},
              {"y", vec_to_json(y)},
              {"T_grid", T_grid},
              {"segments", segments},
              {"value", est.value},
              {"T_used", est.T_used},
              {"diag",
               {{"iterations", est.diag.iterations},
                {"grad_norm", est.diag.grad_norm},
                {"converged", est.diag.converged},
                {"line_search_failed", est.diag.line_search_failed}}}};
    write_json_file(ctx.out / "quasipotential.json", out);
    std::cout << "quasipotential: value=" << est.value << " at T=" << est.T_used << "\n";
    return est.diag.line_search_failed ? kExitNumerical : kExitOk;
}

int cmd_verify(const RunContext& ctx, const json& block) {
    require_keys(block, {"box", "per_dim", "h2", "h3"}, "verify");
    const int r = ctx.model.dim;
    const double box = block.value("box", 4.0);
    const int per_dim = block.value("per_dim", 9);
    const auto grid = box_grid(Vec::Constant(r, -box), Vec::Constant(r, box), per_dim);

    const auto coop = check_cooperative(ctx.model, grid);
    const auto irred = check_irreducible(ctx.model, grid);

    // Lyapunov matrix from the linear part at the origin (the feedback
    // circuit's bidiagonal part has the feedback entry removed).
    Mat A = ctx.model.jacobian(Vec::Zero(r));
    if (ctx.model.griffith) A(0, r - 1) = 0.0;
    const auto V = solve_lyapunov(A);

    const json h2cfg = block.value("h2", json::object());
    require_keys(h2cfg, {"gamma", "eps0", "R", "R_max", "per_dim"}, "verify.h2");
    const double gamma = h2cfg.value("gamma", 0.5);
    const double eps0 = h2cfg.value("eps0", 0.1);
    const double R = h2cfg.value("R", 3.0);
    const double r_max = h2cfg.value("R_max", 2.0 * R);
    const auto h2_grid = annulus_grid(r, R, r_max, h2cfg.value("per_dim", 13));
    const auto h2 = verify_h2(ctx.model, V, gamma, eps0, R, h2_grid);

    const json h3cfg = block.value("h3", json::object());
    require_keys(h3cfg, {"theta", "eta", "C", "M", "c_growth"}, "verify.h3");
    double c_growth = h3cfg.value("c_growth", 1.0);
    if (ctx.model.griffith) c_growth = ctx.model.griffith->sigma.growth_bound();
    H3Constants k = h3_constants_recipe(ctx.model, V, c_growth, grid);
    if (h3cfg.contains("theta")) k.theta = h3cfg.at("theta").get<double>();
    if (h3cfg.contains("eta")) k.eta = h3cfg.at("eta").get<double>();
    if (h3cfg.contains("C")) k.C = h3cfg.at("C").get<double>();
    if (h3cfg.contains("M")) k.M = h3cfg.at("M").get<double>();
    const auto h3 = verify_h3(ctx.model, V, k.theta, k.eta, k.C, k.M, grid);

    ojson out{{"cooperative", report_to_json(coop)},
              {"irreducible", report_to_json(irred)},
              {"h2", report_to_json(h2)},
              {"h3", report_to_json(h3)},
              {"lyapunov_residual", V.residual_inf}};
    write_json_file(ctx.out / "verify.json", out);
    std::cout << "verify: cooperative=" << coop.pass << " irreducible=" << irred.pass
              << " h2=" << h2.pass << " h3=" << h3.pass << "\n";
    return kExitOk;
}

}  // namespace

ojson vec_to_json(const Vec& v) {
    ojson arr = ojson::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vec vec_from_json(const json& j, int expected_dim) {
    if (!j.is_array()) throw ConfigError("expected a numeric array");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    if (expected_dim >= 0 && v.size() != expected_dim)
        throw ConfigError("vector has wrong dimension");
    return v;
}

Table1Report reproduce_table1(const std::string& out_dir, std::uint64_t seed,
                              const Table1Options& opts) {
    fs::create_directories(out_dir);
    Table1Report report;
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < opts.regimes.size(); ++i) {
        const auto& [m, alphas] = opts.regimes[i];
        GriffithParams p;
        p.alphas = alphas;
        p.m = m;
        p.sigma = {DiffusionSpec::Kind::Const, opts.sigma_c};
        const Model model = griffith_model(p);
        const auto cls = classify_griffith(p);

        Table1Row row;
        row.m = m;
        row.alphas = alphas;
        row.phi = cls.summary.phi;
        row.predicted = cls.summary.predicted;
        row.stable_set = cls.stable_set();
        row.marginal = cls.summary.predicted.marginal;

        ojson jr{{"m", m},
                 {"alphas", alphas},
                 {"phi", row.phi},
                 {"predicted", prediction_to_json(row.predicted)},
                 {"stable_set", points_to_json(row.stable_set)},
                 {"marginal", row.marginal}};

        if (row.marginal) {
            // classification boundary: spectra only, no Monte-Carlo claim
            row.agreement = true;
            jr["agreement"] = true;
            jr["sweep"] = nullptr;
        } else {
            SweepOptions so;
            so.threads = opts.threads;
            so.step = opts.step;
            so.t_scale = opts.t_scale;
            so.t_min = opts.t_min;
            so.t_cap = opts.t_cap;
            so.stationary.ball_radius = opts.ball_radius;
            const auto sweep =
                concentration_sweep(model, opts.eps_list, seed + 1000 * i, so);
            row.agreement = sweep.agrees_with_classification;
            row.stable_mass = sweep.rows.back().stable_mass;
            row.unstable_mass = sweep.rows.back().unstable_mass;
            jr["agreement"] = row.agreement;
            jr["sweep"] = sweep_report_to_json(sweep);
        }
        report.rows.push_back(row);
        rows.push_back(std::move(jr));
    }
    report.all_agree = true;
    for (const auto& row : report.rows) report.all_agree = report.all_agree && row.agreement;

    ojson out{{"seed", seed}, {"eps_list", opts.eps_list}, {"rows", std::move(rows)},
              {"all_agree", report.all_agree}};
    write_json_file(fs::path(out_dir) / "table1.json", out);

    std::cout << "m      phi    predicted                      agree  stable_mass  unstable_mass\n";
    for (const auto& row : report.rows) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-6g %-6g %-30s %-6s %-12.4f %-12.4f\n", row.m,
                      row.phi, row.predicted.regime.c_str(), row.agreement ? "yes" : "NO",
                      row.stable_mass, row.unstable_mass);
        std::cout << buf;
    }
    return report;
}

int run_cli(const std::string& subcommand, const std::string& config_path,
            const CliOverrides& overrides) {
    try {
        const json cfg = load_config(config_path);
        require_keys(cfg,
                     {"model", "seed", "out", "threads", "equilibria", "simulate", "stationary",
                      "sweep", "quasipotential", "verify", "table1"},
                     "config");

        RunContext ctx;
        ctx.cfg = cfg;
        ctx.seed = overrides.seed.value_or(cfg.value("seed", 0ull));
        ctx.threads = overrides.threads.value_or(cfg.value("threads", 1));
        ctx.out = overrides.out.value_or(cfg.value("out", std::string("results")));
        fs::create_directories(ctx.out);

        if (subcommand == "table1") {
            Table1Options topts;
            const json block = cfg.value("table1", json::object());
            require_keys(block,
                         {"eps_list", "sigma_c", "step", "t_scale", "t_min", "t_cap",
                          "ball_radius"},
                         "table1");
            if (block.contains("eps_list"))
                topts.eps_list = block.at("eps_list").get<std::vector<double>>();
            topts.sigma_c = block.value("sigma_c", topts.sigma_c);
            topts.step = block.value("step", topts.step);
            topts.t_scale = block.value("t_scale", topts.t_scale);
            topts.t_min = block.value("t_min", topts.t_min);
            topts.t_cap = block.value("t_cap", topts.t_cap);
            topts.ball_radius = block.value("ball_radius", topts.ball_radius);
            topts.threads = ctx.threads;
            reproduce_table1(ctx.out.string(), ctx.seed, topts);
            return kExitOk;
        }

        if (!cfg.contains("model")) throw ConfigError("config: missing 'model'");
        ctx.model = model_from_json(cfg.at("model"));

        const json block = cfg.value(subcommand, json::object());
        if (subcommand == "equilibria") return cmd_equilibria(ctx, block);
        if (subcommand == "simulate") return cmd_simulate(ctx, block);
        if (subcommand == "stationary") return cmd_stationary(ctx, block);
        if (subcommand == "sweep") return cmd_sweep(ctx, block);
        if (subcommand == "quasipotential") return cmd_quasipotential(ctx, block);
        if (subcommand == "verify") return cmd_verify(ctx, block);
        throw ConfigError("unknown subcommand: " + subcommand);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BlowupError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace coopstab
