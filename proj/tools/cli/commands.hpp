// The hmotor verbs. Each takes a parsed Config and writes one CSV; run_cli
// maps the library's exceptions onto the documented exit codes.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cli/config.hpp"
#include "cli/csv.hpp"
#include "hmotor/dynamics.hpp"
#include "hmotor/harmonics.hpp"
#include "hmotor/identify.hpp"
#include "hmotor/validate.hpp"

namespace hmotor::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

/// Environment variable naming the directory for outputs without --out.
inline constexpr const char* kOutputDirEnv = "HMOTOR_OUTPUT_DIR";

struct GlobalOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

struct Console {
    std::ostream& out;
    std::ostream& err;
    bool quiet = false;

    template <class... T>
    void info(const T&... parts) const {
        if (quiet) return;
        (out << ... << parts) << '\n';
    }
    void warn(const std::string& msg) const {
        if (!quiet) err << "hmotor: warning: " << msg << '\n';
    }
};

inline std::filesystem::path output_path(const GlobalOptions& g, const std::string& default_name) {
    if (!g.out.empty()) return g.out;
    const char* env = std::getenv(kOutputDirEnv);
    const std::filesystem::path dir = env && *env ? std::filesystem::path(env) : std::filesystem::path(".");
    return dir / default_name;
}

inline Config load(const GlobalOptions& g) {
    if (g.config.empty()) throw ParameterError("--config", "a configuration file is required");
    Config cfg = load_config(g.config);
    if (g.seed) cfg.seed = *g.seed;
    return cfg;
}

// -----------------------------------------------------------------------------
// Simulation
// -----------------------------------------------------------------------------

struct SimOutcome {
    Trajectory traj;  ///< rotating-frame records
    std::optional<PowerBalance> balance;
    std::string balance_note;  ///< why the balance is missing
    double mean_torque = 0.0;
    std::vector<std::string> warnings;
};

/// Time average of the recorded torque (trapezoidal).
inline double mean_torque(const Trajectory& traj) {
    const auto& r = traj.records;
    if (r.size() < 2) return r.empty() ? 0.0 : r.front().torque;
    double s = 0.0;
    for (std::size_t k = 1; k < r.size(); ++k) s += 0.5 * (r[k].torque + r[k - 1].torque) * (r[k].t - r[k - 1].t);
    return s / (r.back().t - r.front().t);
}

inline SimOutcome run_simulation(const Config& cfg) {
    const ModelSpec& spec = cfg.require_model();
    const SimConfig& sim = cfg.require_sim();
    const ModelPtr model = spec.build();
    const MachineState s0 = cfg.initial_state(*model);

    SimOutcome out;
    const auto balance = [&](const EnergyModel& m, const Trajectory& t) {
        try {
            out.balance = power_balance_report(m, t);
        } catch (const ParameterError& e) {
            out.balance_note = e.what();
        }
    };

    if (spec.is_induction()) {
        out.traj = simulate_im(*model, s0, cfg.drive, sim, cfg.initial.theta_s);
        balance(*model, out.traj);
    } else if (cfg.frame == Frame::stationary) {
        const StationaryFrameModel view(*model);
        MachineState sa = s0;
        sa.phi = frames::inv_park2(Eigen::Vector2d(s0.phi), s0.theta);
        out.traj = simulate_pmsm(view, sa, cfg.drive, sim, Frame::stationary);
        balance(view, out.traj);
        for (auto& r : out.traj.records) {
            r.phi = frames::park2(r.phi, r.theta);
            r.i = frames::park2(r.i, r.theta);
            r.u = frames::park2(r.u, r.theta);
        }
        out.traj.frame = Frame::rotating;
    } else {
        out.traj = simulate_pmsm(*model, s0, cfg.drive, sim, Frame::rotating);
        balance(*model, out.traj);
    }
    out.mean_torque = mean_torque(out.traj);

    if (const auto* c = spec.polynomial()) {
        for (const auto& r : out.traj.records) {
            if (outside_validity_box(*c, r.phi)) {
                out.warnings.push_back("trajectory leaves the validity box of the saturation polynomial at t = " +
                                       fmt(r.t));
                break;
            }
        }
    }
    return out;
}

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
    CsvWriter w(path);
    if (traj.induction) {
        w.header({"t", "theta", "rho", "omega", "phi_d", "phi_q", "i_d", "i_q", "u_d", "u_q", "torque",
                  "load", "phi_rd", "phi_rq", "i_rd", "i_rq", "theta_s"});
    } else {
        w.header({"t", "theta", "rho", "omega", "phi_d", "phi_q", "i_d", "i_q", "u_d", "u_q", "torque",
                  "load"});
    }
    for (const auto& r : traj.records) {
        std::vector<double> row{r.t,    r.theta, r.rho, r.omega, r.phi[0],  r.phi[1],
                                r.i[0], r.i[1],  r.u[0], r.u[1], r.torque, r.load};
        if (traj.induction) row.insert(row.end(), {r.phi_r[0], r.phi_r[1], r.i_r[0], r.i_r[1], r.theta_s});
        w.row(row);
    }
    w.close();
}

inline void print_summary(const Console& con, const SimOutcome& o, const std::filesystem::path& path) {
    const Record& f = o.traj.records.back();
    std::ostringstream phi;
    phi << "(" << fmt(f.phi[0]) << ", " << fmt(f.phi[1]);
    if (o.traj.induction) phi << ", " << fmt(f.phi_r[0]) << ", " << fmt(f.phi_r[1]);
    phi << ")";
    con.info("wrote ", o.traj.records.size(), " records to ", path.string());
    con.info("final state: t = ", fmt(f.t), " s, theta = ", fmt(f.theta), " rad, rho = ", fmt(f.rho),
             ", omega = ", fmt(f.omega), " rad/s, phi = ", phi.str(), " Wb");
    con.info("mean torque: ", fmt(o.mean_torque), " N m");
    if (o.balance) {
        con.info("power balance residual: ", fmt(o.balance->max_relative_residual), " relative (",
                 fmt(o.balance->max_abs_residual), " J)");
    } else {
        con.info("power balance residual: n/a (", o.balance_note, ")");
    }
}

inline int cmd_simulate(const GlobalOptions& g, const Console& con, bool induction) {
    const Config cfg = load(g);
    for (const auto& w : cfg.warnings) con.warn(w);
    const ModelSpec& spec = cfg.require_model();
    if (spec.is_induction() != induction) {
        throw ConfigError(cfg.source.locate("model.kind"), "model.kind",
                          induction ? "im-sim needs a linear_im model (use simulate for the PMSM family)"
                                    : "simulate needs a PMSM-family model (use im-sim for linear_im)");
    }
    const SimOutcome o = run_simulation(cfg);
    for (const auto& w : o.warnings) con.warn(w);
    const auto path = output_path(g, induction ? "im_trajectory.csv" : "trajectory.csv");
    write_trajectory(path, o.traj);
    print_summary(con, o, path);
    return kOk;
}

// -----------------------------------------------------------------------------
// Sweep
// -----------------------------------------------------------------------------

struct SweepOptions {
    std::string parameter;
    std::vector<double> values;
    unsigned jobs = 0;
};

/// Independent simulations, one per value, each writing run_<k>.csv into the
/// output directory; a sweep.csv index summarises them.
inline int cmd_sweep(const GlobalOptions& g, const Console& con, SweepOptions opt) {
    const Config base = load(g);
    if (base.sweep) {
        if (opt.parameter.empty()) opt.parameter = base.sweep->parameter;
        if (opt.values.empty()) opt.values = base.sweep->values;
        if (opt.jobs == 0) opt.jobs = base.sweep->jobs;
    }
    if (opt.parameter.empty()) throw ParameterError("--param", "no sweep parameter given");
    if (opt.values.empty()) throw ParameterError("--values", "no sweep values given");
    (void)base.require_model();
    (void)base.require_sim();

    std::vector<Config> configs;
    for (double v : opt.values) {
        YAML::Node doc = YAML::Clone(base.document);
        set_path(doc, opt.parameter, v);
        Config c = parse_config(doc, base.source.file + " [" + opt.parameter + " = " + fmt(v) + "]");
        if (g.seed) c.seed = *g.seed;
        configs.push_back(std::move(c));
    }

    const std::filesystem::path dir = output_path(g, "sweep");
    const std::size_t n = configs.size();
    std::vector<std::optional<SimOutcome>> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                SimOutcome o = run_simulation(configs[k]);
                write_trajectory(dir / ("run_" + std::to_string(k) + ".csv"), o.traj);
                o.traj.records.erase(o.traj.records.begin(), o.traj.records.end() - 1);
                results[k] = std::move(o);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    unsigned jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < jobs; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    CsvWriter index(dir / "sweep.csv");
    index.raw("run,value,final_omega,mean_torque,power_balance_residual,file");
    for (std::size_t k = 0; k < n; ++k) {
        const SimOutcome& o = *results[k];
        for (const auto& w : o.warnings) con.warn("run " + std::to_string(k) + ": " + w);
        index.raw(std::to_string(k) + "," + fmt(opt.values[k]) + "," + fmt(o.traj.records.back().omega) + "," +
                  fmt(o.mean_torque) + "," + (o.balance ? fmt(o.balance->max_relative_residual) : "") +
                  ",run_" + std::to_string(k) + ".csv");
    }
    index.close();
    con.info("wrote ", n, " runs of ", opt.parameter, " to ", dir.string());
    return kOk;
}

// -----------------------------------------------------------------------------
// Ripple
// -----------------------------------------------------------------------------

inline int cmd_ripple(const GlobalOptions& g, const Console& con) {
    const Config cfg = load(g);
    for (const auto& w : cfg.warnings) con.warn(w);
    const ModelSpec& spec = cfg.require_model();
    if (spec.is_induction()) {
        throw ConfigError(cfg.source.locate("model.kind"), "model.kind", "ripple needs a PMSM-family model");
    }
    const ModelPtr model = spec.build();
    const RippleSpec rs = cfg.ripple.value_or(RippleSpec{});
    const auto* harmonic = dynamic_cast<const HarmonicPmsm*>(model.get());
    const bool with_vn = harmonic && harmonic->has_zero_axis();

    std::vector<TrajectoryPoint> pts;
    if (rs.mode == RippleSpec::Mode::trajectory) {
        const SimOutcome o = run_simulation(cfg);
        for (const auto& w : o.warnings) con.warn(w);
        for (const auto& r : o.traj.records) pts.push_back({r.t, r.theta, r.rho, r.phi});
    } else {
        const double kappa = model->d_rho(0.0, 1.0, Eigen::Vector2d::Zero());
        const double rho = rs.omega ? *rs.omega / kappa : rs.rho.value_or(0.0);
        const double omega = kappa * rho;
        const Eigen::Vector2d phi = rs.phi.value_or(Eigen::Vector2d(spec.phi_M(), 0.0));
        for (int k = 0; k < rs.points; ++k) {
            const double dth = rs.theta_span * k / (rs.points - 1);
            // the sweep is read as uniform rotation at omega; at standstill the
            // time axis is only an ordering
            const double t = omega != 0.0 ? dth / std::abs(omega) : static_cast<double>(k);
            pts.push_back({t, rs.theta_start + (omega < 0.0 ? -dth : dth), rho, phi});
        }
    }

    std::vector<double> vn;
    if (with_vn) vn = neutral_voltage(*harmonic, pts, rs.v_s0);

    const auto path = output_path(g, "ripple.csv");
    CsvWriter w(path);
    w.header({"theta", "torque", "i_d", "i_q", "v_N"});
    double t_min = 0.0, t_max = 0.0, t_sum = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto& p = pts[k];
        const Eigen::VectorXd i = model->d_flux(p.theta, p.rho, p.phi);
        const double te = torque(*model, p.theta, p.rho, p.phi);
        w.row({p.theta, te, i[0], i[1], with_vn ? vn[k] : std::numeric_limits<double>::quiet_NaN()});
        t_min = k ? std::min(t_min, te) : te;
        t_max = k ? std::max(t_max, te) : te;
        t_sum += te;
    }
    w.close();
    con.info("wrote ", pts.size(), " points to ", path.string());
    con.info("torque: mean ", fmt(t_sum / static_cast<double>(pts.size())), " N m, peak-to-peak ",
             fmt(t_max - t_min), " N m");
    if (!with_vn) con.info("v_N column left empty: the model has no 0-axis flux");
    return kOk;
}

// -----------------------------------------------------------------------------
// Flux map
// -----------------------------------------------------------------------------

inline int cmd_flux_map(const GlobalOptions& g, const Console& con) {
    const Config cfg = load(g);
    for (const auto& w : cfg.warnings) con.warn(w);
    const ModelSpec& spec = cfg.require_model();
    if (spec.is_induction()) {
        throw ConfigError(cfg.source.locate("model.kind"), "model.kind", "flux-map needs a PMSM-family model");
    }
    if (!cfg.flux_map) throw ConfigError(cfg.source.file, "flux_map", "this command needs a flux_map section");
    const ModelPtr model = spec.build();
    const FluxMapSpec& f = *cfg.flux_map;
    const auto samples = sample_current_map(
        [&](const Eigen::Vector2d& phi) { return Eigen::Vector2d(model->d_flux(f.theta, 0.0, phi)); }, f.grid,
        f.noise, cfg.seed);

    const auto path = output_path(g, "flux_map.csv");
    CsvWriter w(path);
    w.header({"phi_d", "phi_q", "i_d", "i_q"});
    for (const auto& s : samples) w.row({s.phi_d, s.phi_q, s.i_d, s.i_q});
    w.close();
    con.info("wrote ", samples.size(), " grid points to ", path.string());
    return kOk;
}

// -----------------------------------------------------------------------------
// Identification
// -----------------------------------------------------------------------------

struct IdentifyOptions {
    std::string samples;
    std::optional<double> phi_M;
    bool refine_phi_M = false;
    std::string covariance;
};

inline int cmd_identify(const GlobalOptions& g, const Console& con, const IdentifyOptions& cli_opt) {
    std::optional<Config> cfg;
    if (!g.config.empty()) cfg = load(g);
    if (cfg)
        for (const auto& w : cfg->warnings) con.warn(w);
    const IdentifySpec spec = cfg && cfg->identify ? *cfg->identify : IdentifySpec{};

    std::string samples_path = !cli_opt.samples.empty() ? cli_opt.samples : spec.samples;
    if (samples_path.empty())
        throw ParameterError("--samples", "no sample file given (flag or identify.samples)");

    std::optional<double> phi_M = cli_opt.phi_M ? cli_opt.phi_M : spec.phi_M;
    if (!phi_M && cfg && cfg->model && cfg->model->phi_M() > 0.0) phi_M = cfg->model->phi_M();
    if (!phi_M) throw ParameterError("phi_M", "no magnet flux given (--phi-M, identify.phi_M or model.params.phi_M)");
    if (!(*phi_M > 0.0)) throw ParameterError("phi_M", "must be > 0");

    FitOptions opt;
    opt.refine_phi_M = cli_opt.refine_phi_M || spec.refine_phi_M;
    opt.covariance = spec.covariance;
    if (cli_opt.covariance == "robust") opt.covariance = Covariance::robust;
    if (cli_opt.covariance == "classical") opt.covariance = Covariance::classical;

    const auto samples = read_samples(samples_path);
    const FitResult fit = fit_saturation(samples, *phi_M, opt);
    const double phi_fit = fit.coefficients.phi_M;
    const ScaledReport rep = report_scaled(fit, phi_fit);

    const auto path = output_path(g, "identify.csv");
    CsvWriter w(path);
    w.raw("parameter,value,std_error,raw_parameter,raw_value,raw_std_error");
    const auto raw_vals = fit.coefficients.magnetic();
    const auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    for (std::size_t k = 0; k < 7; ++k) {
        std::optional<double> se, raw_se;
        if (rep.std_errors) se = (*rep.std_errors)[k];
        if (fit.std_errors) raw_se = (*fit.std_errors)[k];
        w.raw(std::string(kScaledNames[k]) + "," + fmt(rep.values[k]) + "," + cell(se) + "," +
              std::string(kMagneticNames[k]) + "," + fmt(raw_vals[k]) + "," + cell(raw_se));
    }
    w.raw("phi_M," + fmt(phi_fit) + "," + cell(fit.phi_M_std_error) + ",phi_M," + fmt(phi_fit) + "," +
          cell(fit.phi_M_std_error));
    w.close();

    con.info("fitted ", samples.size(), " samples from ", samples_path, " (phi_M = ", fmt(phi_fit), " Wb",
             opt.refine_phi_M ? ", refined" : ", fixed", ")");
    for (std::size_t k = 0; k < 7; ++k) {
        std::ostringstream line;
        line << "  " << std::left << std::setw(18) << kScaledNames[k] << std::right << std::setw(14)
             << std::setprecision(6) << rep.values[k];
        if (rep.std_errors) line << "  +/- " << std::setprecision(3) << (*rep.std_errors)[k];
        line << "  A*Wb";
        con.info(line.str());
    }
    con.info("residual rms: ", fmt(fit.residual_rms), " A, condition number: ", fmt(fit.condition_number));
    con.info("wrote ", path.string());
    if (!fit.converged) {
        throw NumericalError("phi_M refinement did not converge after " + std::to_string(fit.iterations) +
                             " iterations; the report holds the best iterate");
    }
    return kOk;
}

// -----------------------------------------------------------------------------
// Validation
// -----------------------------------------------------------------------------

struct ValidateOptions {
    std::optional<std::size_t> samples;
    std::optional<double> tolerance;
};

inline int cmd_validate(const GlobalOptions& g, const Console& con, const ValidateOptions& cli_opt) {
    const Config cfg = load(g);
    for (const auto& w : cfg.warnings) con.warn(w);
    const ModelPtr model = cfg.require_model().build();
    CheckOptions opt;
    opt.samples = cli_opt.samples.value_or(cfg.validate.samples);
    opt.tolerance = cli_opt.tolerance.value_or(cfg.validate.tolerance);
    opt.seed = cfg.seed;
    if (opt.samples == 0) throw ParameterError("--samples", "must be > 0");
    if (!(opt.tolerance > 0.0)) throw ParameterError("--tolerance", "must be > 0");
    const auto reports = run_suite(*model, default_box(*model), opt);

    const auto path = output_path(g, "validate.csv");
    CsvWriter w(path);
    w.raw("check,samples,max_abs,max_rel,tolerance,passed");
    bool all = true;
    con.info(std::left, std::setw(20), "check", std::right, std::setw(10), "samples", std::setw(14), "max_abs",
             std::setw(14), "max_rel", std::setw(12), "tolerance", "  result");
    for (const auto& r : reports) {
        all = all && r.passed;
        w.raw(r.name + "," + std::to_string(r.samples) + "," + fmt(r.max_abs) + "," + fmt(r.max_rel) + "," +
              fmt(r.tolerance) + "," + (r.passed ? "true" : "false"));
        std::ostringstream line;
        line << std::left << std::setw(20) << r.name << std::right << std::setw(10) << r.samples
             << std::setprecision(3) << std::setw(14) << r.max_abs << std::setw(14) << r.max_rel << std::setw(12)
             << r.tolerance << "  " << (r.passed ? "PASS" : "FAIL");
        con.info(line.str());
    }
    w.close();
    if (!all) {
        con.err << "hmotor: validation failed for model '" << model->kind() << "'\n";
        return kValidation;
    }
    return kOk;
}

// -----------------------------------------------------------------------------
// Entry point
// -----------------------------------------------------------------------------

inline void add_globals(CLI::App* sub, GlobalOptions& g, std::uint64_t& seed_value) {
    sub->add_option("-c,--config", g.config, "YAML configuration file");
    sub->add_option("-o,--out", g.out,
                    std::string("output file (directory for sweep); default: $") + kOutputDirEnv +
                        " or the working directory");
    sub->add_option("--seed", seed_value, "override the configuration seed");
    sub->add_flag("-q,--quiet", g.quiet, "suppress summaries and warnings");
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"Energy-based AC machine models: simulation, identification, ripple and symmetry checks",
                 "hmotor"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", "hmotor 0.1.0");

    GlobalOptions g;
    std::uint64_t seed_value = 0;
    SweepOptions sweep;
    IdentifyOptions ident;
    double phi_M_flag = 0.0;
    ValidateOptions val;
    std::size_t val_samples = 0;
    double val_tol = 0.0;

    auto* sim = app.add_subcommand("simulate", "integrate a PMSM-family model, write the trajectory CSV");
    auto* im = app.add_subcommand("im-sim", "integrate the induction machine, write the trajectory CSV");
    auto* ide = app.add_subcommand("identify", "fit saturation coefficients to flux-current samples");
    auto* rip = app.add_subcommand("ripple", "torque, currents and neutral voltage over a rotor angle sweep");
    auto* vld = app.add_subcommand("validate", "run the reciprocity and symmetry checks for the model");
    auto* flx = app.add_subcommand("flux-map", "currents over a flux grid");
    auto* swp = app.add_subcommand("sweep", "parallel simulations over one parameter, one CSV per run");
    for (auto* s : {sim, im, ide, rip, vld, flx, swp}) add_globals(s, g, seed_value);

    ide->add_option("--samples", ident.samples, "CSV with phi_d,phi_q,i_d,i_q[,weight] rows");
    auto* phi_opt = ide->add_option("--phi-M", phi_M_flag, "magnet flux [Wb] used to centre the polynomial");
    ide->add_flag("--refine-phi-M", ident.refine_phi_M, "also fit phi_M");
    ide->add_option("--covariance", ident.covariance, "standard errors: classical or robust")
        ->check(CLI::IsMember({"classical", "robust"}));
    auto* vs_opt = vld->add_option("--samples", val_samples, "random states per check");
    auto* vt_opt = vld->add_option("--tolerance", val_tol, "relative pass threshold");
    swp->add_option("--param", sweep.parameter, "dotted config path, e.g. model.params.R_s");
    swp->add_option("--values", sweep.values, "comma-separated values")->delimiter(',');
    swp->add_option("--jobs", sweep.jobs, "worker threads (0: one per core)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidation;
    }

    for (auto* s : {sim, im, ide, rip, vld, flx, swp})
        if (s->parsed() && s->count("--seed")) g.seed = seed_value;
    if (*phi_opt) ident.phi_M = phi_M_flag;
    if (*vs_opt) val.samples = val_samples;
    if (*vt_opt) val.tolerance = val_tol;
    const Console con{out, err, g.quiet};

    try {
        if (sim->parsed()) return cmd_simulate(g, con, false);
        if (im->parsed()) return cmd_simulate(g, con, true);
        if (ide->parsed()) return cmd_identify(g, con, ident);
        if (rip->parsed()) return cmd_ripple(g, con);
        if (vld->parsed()) return cmd_validate(g, con, val);
        if (flx->parsed()) return cmd_flux_map(g, con);
        if (swp->parsed()) return cmd_sweep(g, con, sweep);
    } catch (const IoError& e) {
        err << "hmotor: I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "hmotor: I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const NumericalError& e) {
        err << "hmotor: numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const ParameterError& e) {
        err << "hmotor: invalid input: " << e.what() << '\n';
        return kValidation;
    } catch (const DimensionError& e) {
        err << "hmotor: invalid input: " << e.what() << '\n';
        return kValidation;
    } catch (const YAML::Exception& e) {
        err << "hmotor: invalid input: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "hmotor: numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
    return kValidation;
}

}  // namespace hmotor::cli
