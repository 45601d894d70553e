// qwalk: command-line driver for single runs, (epsilon, W) sweeps, archive
// re-fits and RG wall amplitudes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qwalk/qwalk.hpp"

namespace {

namespace fs = std::filesystem;

qwalk::Spinor parse_spinor(const std::string& text) {
    if (text == "symmetric") return qwalk::Spinor::symmetric();
    if (text == "up") return {1.0, 0.0};
    if (text == "down") return {0.0, 1.0};
    std::vector<double> parts;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        try {
            parts.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw qwalk::precondition_error("--psi-ic: cannot parse '" + item + "'");
        }
    }
    if (parts.size() != 4) {
        throw qwalk::precondition_error("--psi-ic expects symmetric|up|down|up_re,up_im,down_re,down_im");
    }
    const qwalk::Spinor s{{parts[0], parts[1]}, {parts[2], parts[3]}};
    qwalk::detail::require(std::abs(s.norm_squared() - 1.0) < 1e-12, "--psi-ic must be normalized");
    return s;
}

/// Splices key = value pairs from --config FILE into argv after the
/// subcommand name, skipping keys already given as flags, so that explicit
/// flags win. Keys map to flags by prefixing "--" and turning '_' into '-'.
std::vector<std::string> expand_config(int argc, char** argv, const CLI::App& app) {
    std::vector<std::string> args(argv, argv + argc);
    std::optional<std::string> path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!path || rest.size() < 2) return rest;
    const CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(rest[1]);
    } catch (const CLI::OptionNotFound&) {
        return rest;
    }

    std::ifstream file(*path);
    if (!file) throw qwalk::io_error("cannot read config " + *path);
    const auto items = CLI::ConfigINI().from_config(file);

    std::set<std::string> given;
    for (const auto& a : rest) {
        if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
    }
    std::vector<std::string> injected;
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--" || item.inputs.empty()) continue;
        std::string flag = "--" + item.name;
        for (auto& c : flag) {
            if (c == '_') c = '-';
        }
        if (flag == "--disorder-model") flag = "--model";
        if (given.count(flag)) continue;
        if (sub->get_option_no_throw(flag) == nullptr) {
            std::cerr << "note: config key '" << item.name << "' does not apply to " << rest[1] << '\n';
            continue;
        }
        injected.push_back(flag);
        for (const auto& v : item.inputs) injected.push_back(v);
    }
    rest.insert(rest.begin() + 2, injected.begin(), injected.end());
    return rest;
}

struct Common {
    std::string psi_ic = "symmetric";
    int samples_per_octave = 2;
    std::optional<std::int64_t> window_lo, window_hi;
    double threshold = qwalk::kLocalizationThreshold;

    void add(CLI::App* app) {
        app->add_option("--samples-per-octave", samples_per_octave, "sigma samples per octave of t")
            ->check(CLI::PositiveNumber);
        app->add_option("--window-lo", window_lo, "first time entering the fit (default t_max/16)");
        app->add_option("--window-hi", window_hi, "last time entering the fit (default t_max)");
        app->add_option("--threshold", threshold, "1/d_w localization threshold");
    }

    qwalk::TimeWindow window(std::int64_t t_max) const {
        const auto d = qwalk::default_window(t_max);
        return {window_lo.value_or(d.lo), window_hi.value_or(d.hi)};
    }
};

void add_model_option(CLI::App* app, std::string& model) {
    app->add_option("--model,--disorder-model", model, "disorder model")
        ->check(CLI::IsMember({"none", "hierarchical", "extensive"}));
}

void print_fit(std::ostream& out, const qwalk::FitResult& fit, double threshold) {
    out << "inv_dw=" << qwalk::format_double(fit.inv_dw) << " stderr=" << qwalk::format_double(fit.std_error)
        << " log_amplitude=" << qwalk::format_double(fit.log_amplitude) << " window=[" << fit.window.lo << ","
        << fit.window.hi << "] classification=" << qwalk::to_string(qwalk::classify(fit, threshold)) << '\n';
}

int run_simulate(double epsilon, double width, const std::string& model, std::uint64_t seed,
                 std::optional<std::int64_t> t_max, std::optional<std::int64_t> half_width, const Common& common,
                 const std::string& out_path) {
    const std::int64_t horizon = t_max.value_or(half_width.value_or(0));
    qwalk::detail::require(horizon >= 1, "simulate: give --t-max or --half-width");
    const std::int64_t lattice = half_width.value_or(horizon);
    const qwalk::CoinField field(epsilon, {qwalk::parse_disorder_model(model), width, seed}, lattice);
    const auto times = qwalk::geometric_sample_times(horizon, common.samples_per_octave);
    const auto series = qwalk::evolve(field, parse_spinor(common.psi_ic), horizon, times);

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary | std::ios::trunc);
        if (!file) throw qwalk::io_error("cannot write " + out_path);
    }
    std::ostream& out = out_path.empty() ? std::cout : file;
    out << "t,sigma\n";
    for (const auto& s : series.samples) out << s.t << ',' << qwalk::format_double(s.sigma) << '\n';

    const auto fit = qwalk::fit_inv_dw(qwalk::extrapolation_points(series), common.window(horizon));
    print_fit(std::cerr, fit, common.threshold);
    std::cerr << "predicted_inv_dw(W=0)=" << qwalk::format_double(qwalk::predicted_inv_dw(epsilon)) << '\n';
    return 0;
}

void write_tables(const std::vector<qwalk::CellRecord>& cells, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& rec : cells) {
        const fs::path path = dir / ("extrapolation_eps" + qwalk::format_double(rec.cell.epsilon) + "_W" +
                                     qwalk::format_double(rec.cell.width) + ".csv");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw qwalk::io_error("cannot write " + path.string());
        qwalk::write_extrapolation_table(rec, out);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum walks on a randomized hierarchy of coin barriers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(qwalk::kVersion));

    // simulate
    auto* sim = app.add_subcommand("simulate", "evolve one instance and print sigma(t)");
    double sim_eps = 1.0, sim_w = 0.0;
    std::string sim_model;
    std::uint64_t sim_seed = 0;
    std::optional<std::int64_t> sim_tmax, sim_half;
    std::string sim_out;
    Common sim_common;
    sim->add_option("--epsilon", sim_eps, "barrier parameter in (0, 1]")->required();
    sim->add_option("--W", sim_w, "disorder half-width in [0, pi]")->required();
    add_model_option(sim, sim_model);
    sim->get_option("--model")->required();
    sim->add_option("--seed", sim_seed, "disorder seed");
    sim->add_option("--t-max", sim_tmax, "number of steps (default half_width)");
    sim->add_option("--half-width", sim_half, "lattice half-extent L (default t_max)");
    sim->add_option("--psi-ic", sim_common.psi_ic, "symmetric|up|down|up_re,up_im,down_re,down_im");
    sim->add_option("--out", sim_out, "CSV destination (default stdout)");
    sim_common.add(sim);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "disorder-averaged grid over (epsilon, W)");
    qwalk::SweepPlan plan;
    std::string sweep_model, preset, out_dir;
    std::optional<std::int64_t> sweep_tmax;
    std::optional<int> sweep_instances;
    bool no_archive = false, tables = false;
    Common sweep_common;
    sweep->add_option("--epsilon", plan.epsilons, "barrier parameters")->required()->expected(1, -1);
    sweep->add_option("--W", plan.widths, "disorder half-widths")->required()->expected(1, -1);
    add_model_option(sweep, sweep_model);
    sweep->get_option("--model")->required();
    sweep->add_option("--seed", plan.base_seed, "base seed; instance k uses seed + k");
    sweep->add_option("--instances", sweep_instances, "instances per cell")->check(CLI::PositiveNumber);
    sweep->add_option("--t-max,--half-width", sweep_tmax, "steps per instance = lattice half-width (power of two)");
    sweep->add_option("--preset", preset, "desk: t_max=2^13, 20 instances; paper: t_max=2^16 with "
                                          "50 (hierarchical) / 25 (extensive) instances")
        ->check(CLI::IsMember({"desk", "paper"}));
    sweep->add_option("--psi-ic", sweep_common.psi_ic, "symmetric|up|down|up_re,up_im,down_re,down_im");
    sweep->add_option("--budget", plan.budget, "max instances * t_max^2 summed over cells");
    sweep->add_option("--out-dir", out_dir, "output directory")->required();
    sweep->add_flag("--no-archive", no_archive, "skip the per-sample CSV");
    sweep->add_flag("--tables", tables, "write extrapolation tables per cell");
    sweep_common.add(sweep);

    // fit
    auto* fit = app.add_subcommand("fit", "re-fit an archived samples.csv");
    std::string fit_in, fit_out, fit_tables;
    Common fit_common;
    fit->add_option("--input", fit_in, "samples.csv from a sweep")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", fit_out, "aggregate CSV destination (default stdout)");
    fit->add_option("--tables-dir", fit_tables, "directory for per-cell extrapolation tables");
    fit_common.add(fit);

    // rg
    auto* rg = app.add_subcommand("rg", "wall amplitudes of the absorbing segment from the RG recursion");
    int rg_l = 1;
    double rg_eps = 1.0, rg_w = 0.0;
    std::uint64_t rg_seed = 0;
    std::string rg_model = "hierarchical", rg_psi = "symmetric";
    std::vector<double> z_re, z_im;
    rg->add_option("--l", rg_l, "walls at 0 and 2^l")->required()->check(CLI::Range(1, 60));
    rg->add_option("--epsilon", rg_eps, "barrier parameter in (0, 1]")->required();
    rg->add_option("--W", rg_w, "disorder half-width in [0, pi]")->required();
    rg->add_option("--seed", rg_seed, "disorder seed");
    add_model_option(rg, rg_model);
    rg->add_option("--z-re", z_re, "real part of z (repeatable)")->required();
    rg->add_option("--z-im", z_im, "imaginary part of z (repeatable, paired with --z-re)")->required();
    rg->add_option("--psi-ic", rg_psi, "symmetric|up|down|up_re,up_im,down_re,down_im");

    try {
        auto args = expand_config(argc, argv, app);
        std::vector<char*> cargs;
        for (auto& a : args) cargs.push_back(a.data());
        try {
            app.parse(static_cast<int>(cargs.size()), cargs.data());
        } catch (const CLI::ParseError& e) {
            return app.exit(e);
        }

        if (sim->parsed()) {
            return run_simulate(sim_eps, sim_w, sim_model, sim_seed, sim_tmax, sim_half, sim_common, sim_out);
        }

        if (sweep->parsed()) {
            plan.model = qwalk::parse_disorder_model(sweep_model);
            if (preset == "desk") {
                plan.t_max = 1 << 13;
                plan.instances = 20;
            } else if (preset == "paper") {
                plan.t_max = 1 << 16;
                plan.instances = plan.model == qwalk::DisorderModel::hierarchical ? 50
                                 : plan.model == qwalk::DisorderModel::extensive  ? 25
                                                                                  : 1;
            } else {
                qwalk::detail::require(sweep_tmax && sweep_instances,
                                       "sweep: give --preset or both --t-max and --instances");
            }
            if (sweep_tmax) plan.t_max = *sweep_tmax;
            if (sweep_instances) plan.instances = *sweep_instances;
            plan.psi_ic = parse_spinor(sweep_common.psi_ic);
            plan.samples_per_octave = sweep_common.samples_per_octave;
            plan.threshold = sweep_common.threshold;
            if (sweep_common.window_lo || sweep_common.window_hi) plan.window = sweep_common.window(plan.t_max);

            const auto result = qwalk::run_sweep(plan);
            const auto files = qwalk::emit_results(result, out_dir, {.archive = !no_archive});
            if (tables) write_tables(result.cells, out_dir);
            qwalk::write_aggregate_csv(result.cells, std::cout);
            std::cerr << "wrote " << files.aggregate.string() << " and " << files.manifest.string() << '\n';
            return 0;
        }

        if (fit->parsed()) {
            std::ifstream in(fit_in, std::ios::binary);
            if (!in) throw qwalk::io_error("cannot read " + fit_in);
            auto archive = qwalk::read_samples_csv(in);
            std::optional<qwalk::TimeWindow> window;
            if (fit_common.window_lo || fit_common.window_hi) {
                std::int64_t t_max = 0;
                for (const auto& c : archive) {
                    for (const auto& i : c.instances) {
                        if (!i.series.samples.empty()) t_max = std::max(t_max, i.series.samples.back().t);
                    }
                }
                window = fit_common.window(t_max);
            }
            const auto cells = qwalk::refit_archive(std::move(archive), window, fit_common.threshold);
            if (fit_out.empty()) {
                qwalk::write_aggregate_csv(cells, std::cout);
            } else {
                std::ofstream out(fit_out, std::ios::binary | std::ios::trunc);
                if (!out) throw qwalk::io_error("cannot write " + fit_out);
                qwalk::write_aggregate_csv(cells, out);
            }
            if (!fit_tables.empty()) write_tables(cells, fit_tables);
            return 0;
        }

        if (rg->parsed()) {
            qwalk::detail::require(z_re.size() == z_im.size(), "rg: --z-re and --z-im must pair up");
            const qwalk::CoinField field(rg_eps, {qwalk::parse_disorder_model(rg_model), rg_w, rg_seed},
                                         std::int64_t{1} << (rg_l - 1));
            const auto psi = parse_spinor(rg_psi);
            std::cout << "z_re,z_im,left_up_re,left_up_im,left_down_re,left_down_im,"
                         "right_up_re,right_up_im,right_down_re,right_down_im,condition,pole_proximal\n";
            for (std::size_t i = 0; i < z_re.size(); ++i) {
                const auto w = qwalk::absorbed_amplitude(rg_l, field, {z_re[i], z_im[i]}, psi);
                std::cout << qwalk::format_double(z_re[i]) << ',' << qwalk::format_double(z_im[i]);
                for (const auto* v : {&w.left, &w.right}) {
                    for (int c = 0; c < 2; ++c) {
                        std::cout << ',' << qwalk::format_double((*v)(c).real()) << ','
                                  << qwalk::format_double((*v)(c).imag());
                    }
                }
                std::cout << ',' << qwalk::format_double(w.worst_condition) << ',' << (w.pole_proximal ? 1 : 0)
                          << '\n';
            }
            return 0;
        }
    } catch (const qwalk::precondition_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const qwalk::budget_error& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return 3;
    } catch (const qwalk::io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
