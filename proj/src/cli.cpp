#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "wicklab/config.hpp"
#include "wicklab/counting.hpp"
#include "wicklab/moments.hpp"
#include "wicklab/solver.hpp"
#include "wicklab/version.hpp"

namespace wicklab::cli {

namespace {

namespace fs = std::filesystem;

// file config first, command-line values override
ExperimentConfig resolve(const std::string& config_path,
                         const std::map<std::string, std::string>& flags) {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::load(config_path);
    for (const auto& [k, v] : flags) cfg.set(k, v);
    return cfg;
}

void echo_config(const ExperimentConfig& cfg) {
    std::cout << "# " << kVersion << "\n";
    std::cout << cfg.serialize();
}

void write_run_record(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (out_dir.empty()) return;
    fs::create_directories(out_dir);
    std::ofstream os(fs::path(out_dir) / "resolved.cfg");
    os << "# " << kVersion << "\n" << cfg.serialize();
}

void write_text(const std::string& out_dir, const std::string& name, const std::string& text) {
    if (out_dir.empty()) {
        std::cout << text;
        return;
    }
    fs::create_directories(out_dir);
    std::ofstream os(fs::path(out_dir) / name);
    os << text;
}

ParamSet params_from(const ExperimentConfig& cfg) {
    ParamSet p;
    p.d = int(cfg.get_long("d"));
    p.N = int(cfg.get_long("N"));
    p.k = int(std::stol(cfg.get_or("k", "2")));
    p.alpha = cfg.get_double("alpha");
    p.beta = cfg.get_double("beta");
    p.T = std::stod(cfg.get_or("T", "0.25"));
    p.sigma = std::stod(cfg.get_or("sigma", "0.2"));
    p.seed = std::uint64_t(std::stoull(cfg.get_or("seed", "1")));
    if (p.d < 1 || p.d > 2) throw ConfigError("d must be 1 or 2");
    if (p.N < 0) throw ConfigError("N must be >= 0");
    if (p.alpha <= 0) throw ConfigError("alpha must be > 0");
    if (p.T <= 0) throw ConfigError("T must be > 0");
    return p;
}

ObjectSpec object_from(const ExperimentConfig& cfg) {
    ObjectSpec spec;
    spec.params = params_from(cfg);
    std::string kind = cfg.get_or("kind", "z");
    if (kind == "z")
        spec.kind = ObjectKind::z;
    else if (kind == "wick") {
        spec.kind = ObjectKind::wick_power;
        spec.ell = int(cfg.get_long("ell"));
    } else if (kind == "duhamel") {
        spec.kind = ObjectKind::duhamel_wick;
        spec.k = int(cfg.get_long("k"));
    } else if (kind == "product") {
        spec.kind = ObjectKind::product;
        spec.k = int(cfg.get_long("k"));
        spec.k1 = int(cfg.get_long("k1"));
        spec.k2 = int(cfg.get_long("k2"));
    } else {
        throw ConfigError("unknown object kind '" + kind + "' (z, wick, duhamel, product)");
    }
    spec.validate();
    return spec;
}

Targets targets_from(const ExperimentConfig& cfg, const ObjectSpec& spec) {
    Targets t;
    if (cfg.has("shells")) {
        std::istringstream is(cfg.get("shells"));
        std::string tok;
        while (std::getline(is, tok, ',')) t.shells.push_back(std::stoi(tok));
    } else {
        int hi = std::min(spec.natural_cutoff(), int(cfg.get_long("N")) / 2);
        hi = std::max(hi, 1);
        if (spec.params.d == 1) {
            for (int n = 0; n <= hi; ++n) t.modes.push_back(FreqVec{n});
        } else {
            for (int n = 0; n <= hi; ++n) t.modes.push_back(FreqVec{n, 0});
        }
    }
    return t;
}

int cmd_params(const ExperimentConfig& cfg) {
    echo_config(cfg);
    Admissibility adm = admissible_params(int(cfg.get_long("d")), int(cfg.get_long("k")),
                                          cfg.get_double("alpha"), cfg.get_double("beta"));
    if (adm.admissible) {
        std::cout << "admissible, sigma in (" << adm.sigma_lo << ", " << adm.sigma_hi << ")\n";
        std::cout << "sigma default " << adm.sigma_default << "\n";
    } else {
        std::cout << "rejected: " << adm.detail << "\n";
    }
    return 0;
}

int cmd_sample(const ExperimentConfig& cfg) {
    echo_config(cfg);
    ParamSet p = params_from(cfg);
    std::string out = cfg.get_or("out", "");
    InitialData data = sample_initial_data(Lattice(p.d, p.N), p.beta, p.alpha, p.seed);
    write_run_record(cfg, out);
    if (!out.empty()) {
        write_field((fs::path(out) / "u0.wlf").string(), data.u0);
        write_field((fs::path(out) / "u1.wlf").string(), data.u1);
        std::cout << "wrote u0.wlf, u1.wlf to " << out << "\n";
    } else {
        std::cout << "u0 H^0 norm " << sobolev_norm(data.u0, 0.0) << "\n";
    }
    return 0;
}

int cmd_wick(const ExperimentConfig& cfg) {
    echo_config(cfg);
    ParamSet p = params_from(cfg);
    int ell = int(cfg.get_long("ell"));
    double t = std::stod(cfg.get_or("t", "0"));
    Lattice lat(p.d, p.N);
    double sigma_n = cutoff_variance(lat, p.beta);
    GaussianDraw draw = GaussianDraw::sample(lat, p.seed);
    SpectralField z = linear_solution(draw, p.beta, p.alpha, t);
    SpectralField w = wick_power(z, WickSpec(ell, sigma_n));
    std::cout << "sigma_N = " << sigma_n << "\n";
    std::string out = cfg.get_or("out", "");
    write_run_record(cfg, out);
    if (!out.empty()) {
        write_field((fs::path(out) / "z.wlf").string(), z);
        write_field((fs::path(out) / "wick.wlf").string(), w);
        std::cout << "wrote z.wlf, wick.wlf to " << out << "\n";
    }
    return 0;
}

int cmd_moments(const ExperimentConfig& cfg) {
    echo_config(cfg);
    ObjectSpec spec = object_from(cfg);
    const std::string mode = cfg.get_or("mode", "mc");
    double t = std::stod(cfg.get_or("t", "0"));
    std::string out = cfg.get_or("out", "");
    MomentTable table;

    if (mode == "mc") {
        table = mc_moment(spec, t, targets_from(cfg, spec), cfg.get_long("samples"),
                          std::uint64_t(std::stoull(cfg.get_or("seed", "1"))));
    } else if (mode == "delta") {
        table = delta_moment(spec, t, cfg.get_double("h"), targets_from(cfg, spec),
                             cfg.get_long("samples"),
                             std::uint64_t(std::stoull(cfg.get_or("seed", "1"))));
    } else if (mode == "exact") {
        int jmin = int(std::stol(cfg.get_or("jmin", "2")));
        int jmax = int(std::stol(cfg.get_or("jmax",
                                            std::to_string(default_shell_range(spec.params.N).second))));
        Lattice lat = spec.base_lattice();
        const ParamSet& p = spec.params;
        if (spec.kind == ObjectKind::wick_power) {
            auto all = exact_wick_moment_all(spec.ell, lat, p.beta);
            Lattice big(p.d, spec.ell * p.N);
            table = shell_table(p.d, big.N, jmin, jmax,
                                [&](const FreqVec& n) { return all[big.index_of(n)]; });
        } else if (spec.kind == ObjectKind::duhamel_wick) {
            table = shell_table(p.d, spec.k * p.N, jmin, jmax, [&](const FreqVec& n) {
                return exact_duhamel_moment(spec.k, lat, p.beta, p.alpha, t, n);
            });
        } else if (spec.kind == ObjectKind::z) {
            table = shell_table(p.d, p.N, jmin, jmax,
                                [&](const FreqVec& n) { return exact_z_moment(lat, p.beta, n); });
        } else {
            throw ConfigError("exact mode supports kinds z, wick, duhamel");
        }
    } else {
        throw ConfigError("unknown moments mode '" + mode + "' (mc, exact, delta)");
    }

    write_run_record(cfg, out);
    write_text(out, "moments.csv", moment_table_csv(table));
    return 0;
}

int cmd_fit(const ExperimentConfig& cfg) {
    echo_config(cfg);
    std::ifstream is(cfg.get("table"));
    if (!is) throw ConfigError("cannot open table " + cfg.get("table"));
    std::stringstream buf;
    buf << is.rdbuf();
    MomentTable table = moment_table_from_csv(buf.str());
    int d = int(cfg.get_long("d"));
    int jmin = int(std::stol(cfg.get_or("jmin", "0")));
    int jmax = int(std::stol(cfg.get_or("jmax", "30")));
    ExponentFit fit = fit_exponent(table, d, jmin, jmax);
    std::cout.precision(6);
    std::cout << "slope " << std::fixed << fit.slope << " +/- " << fit.stderr_ << "\n";
    std::cout << "s0_hat " << fit.s0_hat << "\n";
    return 0;
}

int cmd_report(const ExperimentConfig& cfg) {
    echo_config(cfg);
    std::ifstream is(cfg.get("table"));
    if (!is) throw ConfigError("cannot open table " + cfg.get("table"));
    std::stringstream buf;
    buf << is.rdbuf();
    MomentTable table = moment_table_from_csv(buf.str());
    int d = int(cfg.get_long("d"));
    ExponentFit fit = fit_exponent(table, d, int(std::stol(cfg.get_or("jmin", "0"))),
                                   int(std::stol(cfg.get_or("jmax", "30"))));
    std::optional<std::pair<double, double>> tf;
    if (cfg.has("a") && cfg.has("b")) tf = std::make_pair(cfg.get_double("a"), cfg.get_double("b"));
    RegularityReport rep = regularity_report(fit, tf);
    std::cout.precision(6);
    std::cout << "s0 " << rep.s0 << " (spatial claim: any s < s0; " << rep.note << ")\n";
    if (rep.s_spacetime) std::cout << "space-time claim: s < " << *rep.s_spacetime << "\n";
    return 0;
}

int cmd_prodcheck(const ExperimentConfig& cfg) {
    echo_config(cfg);
    ParamSet p = params_from(cfg);
    std::string mode = cfg.get_or("mode", "p1");
    double t = std::stod(cfg.get_or("t", "0"));
    int k1 = int(std::stol(cfg.get_or("k1", "1")));
    int k2 = int(std::stol(cfg.get_or("k2", "1")));

    std::vector<ObjectSpec> factors;
    {
        ObjectSpec f;
        f.params = p;
        if (k1 == 1)
            f.kind = ObjectKind::z;
        else {
            f.kind = ObjectKind::wick_power;
            f.ell = k1;
        }
        factors.push_back(f);
        ObjectSpec g;
        g.params = p;
        if (k2 == 1)
            g.kind = ObjectKind::z;
        else {
            g.kind = ObjectKind::wick_power;
            g.ell = k2;
        }
        factors.push_back(g);
    }

    if (mode == "p1") {
        int hi = int(std::stol(cfg.get_or("hi", std::to_string(2 * p.N))));
        RatioReport rep = product_bound_check(factors, t, -hi, hi);
        std::cout << "sup ratio " << rep.sup << ", inf ratio " << rep.inf << "\n";
        std::ostringstream os;
        os.precision(17);
        os << "n,lhs,rhs,ratio\n";
        for (const auto& e : rep.entries)
            os << e.n[0] << "," << e.lhs << "," << e.rhs << "," << e.ratio << "\n";
        write_run_record(cfg, cfg.get_or("out", ""));
        write_text(cfg.get_or("out", ""), "prodcheck.csv", os.str());
    } else if (mode == "p3") {
        FreqVec n(std::size_t(p.d), 0);
        if (cfg.has("t")) {
        }
        DecompositionCheck chk = chaos_decomposition_check(factors, t, n,
                                                           int(std::stol(cfg.get_or("nodes", "24"))));
        std::cout << "full " << chk.full << "\n";
        for (std::size_t l = 0; l < chk.projected.size(); ++l)
            std::cout << "projected[" << l << "] " << chk.projected[l] << "\n";
        std::cout << "residual " << chk.residual << "\n";
    } else {
        throw ConfigError("unknown prodcheck mode '" + mode + "' (p1, p3)");
    }
    return 0;
}

int cmd_counting(const ExperimentConfig& cfg) {
    echo_config(cfg);
    std::string which = cfg.get_or("case", "i");
    int d = int(cfg.get_long("d"));
    double a = cfg.get_double("a");
    double b = cfg.get_double("b");
    double c = std::stod(cfg.get_or("c", "0"));
    double lo = std::stod(cfg.get_or("lo", "4"));
    double hi = std::stod(cfg.get_or("hi", "256"));
    long radius = std::stol(cfg.get_or("radius", "100000"));

    counting::SweepReport rep = counting::conv_bound_sweep(
        which == "i" ? counting::SumCase::two_factor : counting::SumCase::three_factor, d, a, b, c,
        lo, hi, radius);
    std::cout << "sup ratio " << rep.sup_ratio << (rep.monotone_growth_flag ? " (GROWTH FLAG)" : "")
              << "\n";
    write_run_record(cfg, cfg.get_or("out", ""));
    write_text(cfg.get_or("out", ""), "counting.csv", counting::sweep_csv(rep));
    return 0;
}

int cmd_solve(const ExperimentConfig& cfg) {
    echo_config(cfg);
    ParamSet p = params_from(cfg);
    Admissibility adm = admissible_params(p.d, p.k, p.alpha, p.beta);
    if (!cfg.has("sigma") && adm.admissible) p.sigma = adm.sigma_default;
    if (!adm.admissible)
        std::cout << "warning: parameters rejected (" << adm.detail << "), solving anyway\n";
    else if (p.sigma <= adm.sigma_lo || p.sigma >= adm.sigma_hi)
        std::cout << "warning: sigma outside admissible window (" << adm.sigma_lo << ", "
                  << adm.sigma_hi << ")\n";

    int steps = int(std::stol(cfg.get_or("steps", "64")));
    double tol = std::stod(cfg.get_or("tol", "1e-8"));
    ForcingFamily fam = build_forcing(p, steps);
    std::cout << "forcing norm " << fam.norm_z << "\n";
    PicardResult pic = picard_solve(fam, p, tol);
    std::cout << (pic.report.converged ? "converged" : "NOT converged") << " in "
              << pic.report.iterations << " iterations, residual " << pic.report.final_residual
              << "\n";
    std::cout << "contraction ratios:";
    for (double r : pic.report.contraction_ratios) std::cout << " " << r;
    std::cout << "\n";

    std::string out = cfg.get_or("out", "");
    write_run_record(cfg, out);
    if (!out.empty()) {
        write_field((fs::path(out) / "v_final.wlf").string(), pic.v.frames.back());
        std::cout << "wrote v_final.wlf to " << out << "\n";
    }
    return pic.report.converged ? 0 : 2;
}

int cmd_converge(const ExperimentConfig& cfg) {
    echo_config(cfg);
    ParamSet p = params_from(cfg);
    std::vector<int> cutoffs;
    {
        std::istringstream is(cfg.get_or("N_list", "16,32,64,128"));
        std::string tok;
        while (std::getline(is, tok, ',')) cutoffs.push_back(std::stoi(tok));
    }
    int steps = int(std::stol(cfg.get_or("steps", "64")));
    ConvergenceStudy study = convergence_study(p, cutoffs, steps);
    if (!study.sigma_in_window) std::cout << "flag: sigma outside admissible window\n";
    std::cout << study.csv;
    write_run_record(cfg, cfg.get_or("out", ""));
    if (cfg.has("out")) write_text(cfg.get("out"), "converge.csv", study.csv);
    return 0;
}

struct Command {
    std::string name;
    std::string help;
    std::vector<std::string> required;
    int (*fn)(const ExperimentConfig&);
};

const std::vector<Command>& command_table() {
    static const std::vector<Command> cmds = {
        {"params", "check parameter admissibility and the sigma window", {"d", "k", "alpha", "beta"}, cmd_params},
        {"sample", "draw seeded random initial data", {"d", "N", "alpha", "beta"}, cmd_sample},
        {"wick", "build the linear solution and a Wick power", {"d", "N", "alpha", "beta", "ell"}, cmd_wick},
        {"moments", "moment tables: mc, exact, delta", {"d", "N", "alpha", "beta"}, cmd_moments},
        {"fit", "fit a power-law exponent to a moment table", {"table", "d"}, cmd_fit},
        {"prodcheck", "product inequality (p1) and orthogonality (p3) checks", {"d", "N", "alpha", "beta"}, cmd_prodcheck},
        {"counting", "convolution bound sweeps", {"d", "a", "b"}, cmd_counting},
        {"solve", "Picard-solve the remainder equation", {"d", "N", "k", "alpha", "beta"}, cmd_solve},
        {"converge", "coupled N-convergence study", {"d", "k", "alpha", "beta"}, cmd_converge},
        {"report", "regularity claim from fitted exponents", {"table", "d"}, cmd_report},
    };
    return cmds;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{std::string(kVersion) + " - stochastic wave laboratory"};
    app.require_subcommand(1);
    // "--h" is the time-increment flag, so help stays long-form only
    app.set_help_flag("--help", "print usage");

    struct Collected {
        std::map<std::string, std::string> flags;
        std::string config_path;
        const Command* cmd = nullptr;
    } col;

    for (const auto& cmd : command_table()) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->set_help_flag("--help", "print usage");
        sub->add_option("--config", "config file (key = value lines)");
        for (const auto& key : ExperimentConfig::known_keys()) sub->add_option("--" + key);
        sub->callback([sub, &col, &cmd]() {
            col.cmd = &cmd;
            for (const CLI::Option* opt : sub->get_options()) {
                if (opt->count() == 0) continue;
                std::string name = opt->get_name();
                if (name.rfind("--", 0) == 0) name = name.substr(2);
                if (name == "config")
                    col.config_path = opt->results().front();
                else
                    col.flags[name] = opt->results().front();
            }
        });
    }

    try {
        std::vector<std::string> argv_rev(args.rbegin(), args.rend());
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        ExperimentConfig cfg = resolve(col.config_path, col.flags);
        for (const auto& key : col.cmd->required)
            if (!cfg.has(key)) {
                std::cerr << "missing required flag --" << key << " for '" << col.cmd->name
                          << "'\n";
                return 1;
            }
        return col.cmd->fn(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
}

} // namespace wicklab::cli
