#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qprep/experiment.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

struct CommonArgs {
    std::string config_path;
    std::string out;
    long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out) {
    cmd->add_option("config", args.config_path, "experiment config file (key = value lines)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* out = cmd->add_option("-o,--out", args.out, "output path or prefix");
    if (needs_out) out->required();
    cmd->add_option("-s,--seed", args.seed, "override the run.seed / synth.seed config keys");
}

qprep::ConfigMap load_config(const CommonArgs& args) {
    qprep::ConfigMap cfg = qprep::parse_config(qprep::read_text_file(args.config_path));
    if (!args.out.empty()) cfg["out"] = args.out;
    if (args.seed >= 0) {
        cfg["run.seed"] = std::to_string(args.seed);
        cfg["synth.seed"] = std::to_string(args.seed);
    }
    return cfg;
}

std::string out_prefix(const qprep::ConfigMap& cfg) {
    const std::string out = qprep::config_get(cfg, "out", "");
    if (out.empty()) throw std::invalid_argument("an output prefix is required (config key 'out' or --out)");
    return out;
}

int run_converge_cmd(const CommonArgs& args) {
    const qprep::ConfigMap cfg = load_config(args);
    const std::string prefix = out_prefix(cfg);
    const qprep::ConvergeResult result = qprep::run_converge(cfg);
    qprep::write_converge(result, cfg, prefix);
    std::printf("wrote %s_trace.csv (%zu rows), %s_bounds.csv, %s_meta.json\n", prefix.c_str(),
                result.trace.records.size(), prefix.c_str(), prefix.c_str());
    std::printf("final k = %ld, fidelity = %.12g, P_k = %.12g\n", result.trace.last().k, result.trace.last().fidelity,
                result.trace.last().P);
    return 0;
}

int run_bounds_cmd(const CommonArgs& args) {
    const qprep::ConfigMap cfg = load_config(args);
    qprep::BoundsReport report = qprep::run_bounds(cfg);

    std::optional<double> noisy;
    std::optional<long> n_pauli;
    if (qprep::config_has(cfg, "noise.lambda")) {
        const double lambda = qprep::config_double_require(cfg, "noise.lambda");
        const long terms = qprep::config_long(cfg, "noise.terms", 0);
        const double n_trott = qprep::config_double_require(cfg, "noise.trotter_steps");
        if (terms < 1) throw std::invalid_argument("noise.lambda needs noise.terms >= 1");
        n_pauli = qprep::pauli_gadget_count(static_cast<std::size_t>(terms), n_trott, report.gap);
        noisy = qprep::noisy_fidelity_estimate(lambda, *n_pauli);
    }

    std::fputs(qprep::bounds_table(report, noisy, n_pauli).c_str(), stdout);
    const std::string out = qprep::config_get(cfg, "out", "");
    if (!out.empty()) {
        nlohmann::json j = qprep::to_json(report);
        if (noisy) {
            j["n_pauli"] = *n_pauli;
            j["noisy_fidelity_estimate"] = *noisy;
        }
        qprep::write_text_file(out, j.dump(2) + "\n");
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

int run_noise_sweep_cmd(const CommonArgs& args) {
    const qprep::ConfigMap cfg = load_config(args);
    const std::string prefix = out_prefix(cfg);
    const qprep::NoiseSweepResult result = qprep::run_noise_sweep(cfg);
    qprep::write_noise_sweep(result, cfg, prefix);
    std::printf("n_pauli per cycle = %ld\n", result.n_pauli);
    for (const auto& point : result.points)
        std::printf("lambda = %-12g plateau fidelity = %-14.8g estimate = %-14.8g\n", point.lambda, point.plateau,
                    point.estimate);
    std::printf("wrote %s_summary.json and %zu trace files\n", prefix.c_str(), result.points.size());
    return 0;
}

int run_morph_sweep_cmd(const CommonArgs& args) {
    const qprep::ConfigMap cfg = load_config(args);
    const std::string prefix = out_prefix(cfg);
    const qprep::MorphSweepResult result = qprep::run_morph_sweep(cfg);
    qprep::write_text_file(prefix + "_points.csv", qprep::to_csv(result));
    qprep::write_text_file(prefix + "_summary.json", qprep::to_json(result).dump(2) + "\n");
    std::printf("baseline cost = %.12g over %ld iterations\n", result.baseline_cost, result.baseline_iterations);
    for (const auto& [a, b] : result.advantage_regions) std::printf("advantage region: alpha in [%g, %g]\n", a, b);
    if (result.advantage_regions.empty()) std::printf("no advantage region found\n");
    std::printf("wrote %s_points.csv and %s_summary.json\n", prefix.c_str(), prefix.c_str());
    return 0;
}

int run_gen_cmd(const CommonArgs& args) {
    const qprep::ConfigMap cfg = load_config(args);
    const std::string out = out_prefix(cfg);
    qprep::write_text_file(out, qprep::run_gen(cfg));
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int run_rte_error_cmd(const CommonArgs& args) {
    const qprep::ConfigMap cfg = load_config(args);
    const qprep::RteErrorResult result = qprep::run_rte_error(cfg);
    std::printf("eps_rte = %.12g at t = %.12g over %zu schedule times\n", result.report.eps_rte,
                result.report.worst_time, result.report.times.size());
    const std::string out = qprep::config_get(cfg, "out", "");
    if (!out.empty()) {
        qprep::write_text_file(out, qprep::to_json(result).dump(2) + "\n");
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eigenstate preparation by repeated phase-estimation measurements: simulator and analytic bounds"};
    app.require_subcommand(1);

    CommonArgs converge_args, bounds_args, noise_args, morph_args, gen_args, rte_args;
    add_common(app.add_subcommand("converge", "run a preparation and write trace + bound curves"), converge_args, true);
    add_common(app.add_subcommand("bounds", "evaluate the analytic bounds for one parameter set"), bounds_args, false);
    add_common(app.add_subcommand("noise-sweep", "noisy density-matrix runs over a list of error rates"), noise_args,
               true);
    add_common(app.add_subcommand("morph-sweep", "cost study over a morphing Hamiltonian family"), morph_args, true);
    add_common(app.add_subcommand("gen", "generate synthetic inputs"), gen_args, true);
    add_common(app.add_subcommand("rte-error", "measure the Trotter error over the schedule times"), rte_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    }

    try {
        if (app.got_subcommand("converge")) return run_converge_cmd(converge_args);
        if (app.got_subcommand("bounds")) return run_bounds_cmd(bounds_args);
        if (app.got_subcommand("noise-sweep")) return run_noise_sweep_cmd(noise_args);
        if (app.got_subcommand("morph-sweep")) return run_morph_sweep_cmd(morph_args);
        if (app.got_subcommand("gen")) return run_gen_cmd(gen_args);
        if (app.got_subcommand("rte-error")) return run_rte_error_cmd(rte_args);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumericalError;
    }
    return 0;
}
