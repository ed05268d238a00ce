#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ratedml/csv.hpp"
#include "ratedml/error.hpp"
#include "ratedml/pipeline.hpp"
#include "ratedml/synth.hpp"
#include "ratedml/validation.hpp"

using namespace ratedml;

namespace {

struct RunFlags {
    std::string config;
    std::string learner;
    std::string lag;
    int k = 0;
    std::optional<std::uint64_t> seed;
    std::string fold_mode;
    std::string out;
};

PipelineConfig resolve_config(const RunFlags& f) {
    PipelineConfig c = f.config.empty() ? PipelineConfig{} : load_config(f.config);
    if (!f.learner.empty()) c.learner = parse_learner_choice(f.learner);
    if (!f.lag.empty()) {
        if (f.lag == "auto") {
            c.lag_order.reset();
        } else {
            try {
                c.lag_order = std::stoi(f.lag);
            } catch (const std::exception&) {
                fail(ErrorCode::BadConfig, "--lag must be an integer or auto");
            }
        }
    }
    if (f.k != 0) c.folds = f.k;
    if (f.seed) c.seed = *f.seed;
    if (!f.fold_mode.empty()) c.fold_mode = parse_fold_mode(f.fold_mode);
    if (!f.out.empty()) c.output_dir = f.out;
    c.validate();
    return c;
}

int cmd_run(const RunFlags& flags) {
    const auto config = resolve_config(flags);
    const auto summary = run_pipeline(config);
    std::cout << "funds " << summary.funds_used << ", panel rows " << summary.panel_rows << ", lag " << summary.lag_order
              << "\n";
    std::cout << "kept:";
    for (const auto& v : summary.kept_variables) std::cout << ' ' << v;
    std::cout << "\ndropped:";
    for (const auto& v : summary.dropped_variables) std::cout << ' ' << v;
    std::cout << "\n" << format_results_csv(summary.outcomes);
    std::cout << "manifest: " << summary.reproducibility << ", " << summary.files.size() << " files in "
              << config.output_dir.string() << "\n";
    return 0;
}

int cmd_validate(std::uint64_t seed, std::optional<int> reps) {
    ValidationOptions opt;
    opt.seed = seed;
    opt.reps = reps;
    bool all = true;
    for (int id = 1; id <= kCriterionCount; ++id) {
        const auto r = run_criterion(id, opt);
        std::cout << format_validation_line(r) << std::endl;
        all = all && r.pass;
    }
    return all ? 0 : static_cast<int>(ErrorCategory::Validation);
}

int cmd_critvals(const std::vector<std::size_t>& ns, std::size_t reps, std::uint64_t seed, const std::string& format) {
    std::string out = format == "cpp" ? "" : "n,pct,value\n";
    for (auto n : ns) {
        const auto v = df_critical_values(n, reps, seed);
        if (format == "cpp") {
            out += "    {" + std::to_string(n) + ", {" + csv::format_double(v[0]) + ", " + csv::format_double(v[1]) + ", " +
                   csv::format_double(v[2]) + "}},\n";
        } else {
            const char* pct[] = {"1", "5", "10"};
            for (int i = 0; i < 3; ++i) out += std::to_string(n) + "," + pct[i] + "," + csv::format_double(v[static_cast<std::size_t>(i)]) + "\n";
        }
    }
    std::cout << out;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-fitted double machine learning for rate-change effects on fund returns"};
    app.require_subcommand(1);

    RunFlags flags;
    auto* run = app.add_subcommand("run", "run the full pipeline");
    run->add_option("--config", flags.config, "JSON config file");
    run->add_option("--learner", flags.learner, "linear|boosted|both");
    run->add_option("--lag", flags.lag, "lag order N or auto");
    run->add_option("--k", flags.k, "cross-fitting folds");
    run->add_option("--seed", flags.seed, "seed");
    run->add_option("--fold-mode", flags.fold_mode, "row|unit");
    run->add_option("--out", flags.out, "output directory");

    std::string plots_dir = "out";
    auto* plots = app.add_subcommand("plots", "render SVG plots from a run's CSVs");
    plots->add_option("--out", plots_dir, "run output directory");

    std::uint64_t vseed = ValidationOptions{}.seed;
    std::optional<int> vreps;
    auto* val = app.add_subcommand("validate", "run the synthetic acceptance suite");
    val->add_option("--seed", vseed, "base seed");
    val->add_option("--reps", vreps, "replication budget");

    std::string fixture_dir = "fixture";
    std::uint64_t fseed = 1;
    double ftheta = 0.5;
    auto* gen = app.add_subcommand("gen-fixture", "write a synthetic panel with a known effect");
    gen->add_option("--out", fixture_dir, "directory");
    gen->add_option("--seed", fseed, "seed");
    gen->add_option("--theta", ftheta, "true effect");

    std::vector<std::size_t> cv_n{50, 100, 250, 500, 10000};
    std::size_t cv_reps = 100000;
    std::uint64_t cv_seed = 1;
    std::string cv_format = "csv";
    auto* crit = app.add_subcommand("critvals", "Monte Carlo Dickey-Fuller critical values");
    crit->add_option("--n", cv_n, "series lengths");
    crit->add_option("--reps", cv_reps, "replications");
    crit->add_option("--seed", cv_seed, "base seed");
    crit->add_option("--format", cv_format, "csv|cpp")->check(CLI::IsMember({"csv", "cpp"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ErrorCategory::Config);
    }

    try {
        if (*run) return cmd_run(flags);
        if (*plots) {
            for (const auto& f : emit_plots(plots_dir)) std::cout << (std::filesystem::path(plots_dir) / f).string() << "\n";
            return 0;
        }
        if (*val) return cmd_validate(vseed, vreps);
        if (*gen) {
            write_fixture(fixture_dir, fseed, ftheta);
            std::cout << "wrote fixture to " << fixture_dir << "\n";
            return 0;
        }
        if (*crit) return cmd_critvals(cv_n, cv_reps, cv_seed, cv_format);
    } catch (const Error& e) {
        std::cerr << "error " << code_name(e.code()) << ": " << e.what() << std::endl;
        return static_cast<int>(e.category());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error Io: " << e.what() << std::endl;
        return static_cast<int>(ErrorCategory::Data);
    }
    return 0;
}
