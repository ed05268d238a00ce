#include "ratedml/validation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "ratedml/csv.hpp"
#include "ratedml/dml.hpp"
#include "ratedml/error.hpp"
#include "ratedml/pipeline.hpp"
#include "ratedml/preprocess.hpp"
#include "ratedml/rng.hpp"
#include "ratedml/synth.hpp"

namespace fs = std::filesystem;

namespace ratedml {

namespace {

std::string fmt(const char* pattern, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, pattern, a);
    return buf;
}

std::string fmt(const char* pattern, double a, double b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

std::string fmt(const char* pattern, double a, double b, double c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

std::uint64_t stream(const ValidationOptions& o, int id, int rep) {
    return derive_seed(o.seed, static_cast<std::uint64_t>(id) * 100000u + static_cast<std::uint64_t>(rep));
}

// --- 1: inference arithmetic --------------------------------------------------

void inference_arithmetic(CriterionResult& r, const ValidationOptions&) {
    const auto res = make_inference(-11.97, 2.522, 1);
    const bool ok = std::abs(res.t - -4.747) <= 0.001 && std::abs(res.ci_low - -16.91) <= 0.01 &&
                    std::abs(res.ci_high - -7.03) <= 0.01;
    r.pass = ok;
    r.measured = fmt("t=%.4f ci=[%.4f, %.4f]", res.t, res.ci_low, res.ci_high);
    r.required = "t=-4.747+-0.001 ci=[-16.91, -7.03]+-0.01";
}

// --- 2: per-1% rescaling --------------------------------------------------------

void rescaling(CriterionResult& r, const ValidationOptions&) {
    const double in[] = {-0.025, -0.019, 0.229, -11.97};
    const double want[] = {-0.00025, -0.00019, 0.00229, -0.1197};
    bool ok = true;
    std::string measured;
    for (int i = 0; i < 4; ++i) {
        const double got = rescale_per_1pct(in[i]);
        ok = ok && got == want[i];
        measured += (i ? " " : "") + csv::format_double(got);
    }
    r.pass = ok;
    r.measured = measured;
    r.required = "-0.00025 -0.00019 0.00229 -0.1197 exactly";
}

// --- 3: FWL oracle ---------------------------------------------------------------

void fwl_equivalence(CriterionResult& r, const ValidationOptions& o) {
    const int reps = required_reps(3);
    double worst = 0.0;
    for (int i = 0; i < reps; ++i) {
        const auto inst = random_linear_instance(200, 5, stream(o, 3, i));
        PlrProblem p;
        p.y = inst.y;
        p.d = inst.d;
        p.x = inst.x;
        p.unit_ids.assign(200, "u");
        DmlOptions opt;
        opt.mode = DmlMode::NoSplitDebug;
        const auto run = run_dml(p, LearnerSpec{}, opt, Exec::Serial);
        worst = std::max(worst, std::abs(run.result.theta - fwl_oracle_theta(inst.y, inst.d, inst.x)));
    }
    r.pass = worst <= 1e-8;
    r.measured = fmt("max |theta - ols| = %.3g over 50 instances", worst);
    r.required = "<= 1e-8";
}

// --- 4 and 6: nonlinear design -------------------------------------------------------

struct NonlinearDraw {
    DmlResult boosted;
    double r2_y_boosted = 0.0;
    DmlResult linear;
    double r2_y_linear = 0.0;
};

SyntheticPlr nonlinear_problem(std::uint64_t seed, int n) {
    SynthSpec s;
    s.kind = SynthKind::PlrNonlinear;
    s.theta_true = 0.5;
    s.n = n;
    s.k_controls = 5;
    s.seed = seed;
    return gen_plr(s);
}

void consistency(CriterionResult& r, const ValidationOptions& o) {
    const int reps = required_reps(4);
    const auto [py, pd] = pilot_boosted_params(stream(o, 4, 99999), 5000);
    LearnerSpec spec{LearnerKind::Boosted, py, pd};
    std::vector<int> inside(static_cast<std::size_t>(reps), 0);
    std::vector<std::optional<Error>> errors(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < reps; ++i) {
        try {
            const auto draw = nonlinear_problem(stream(o, 4, i), 5000);
            DmlOptions opt;
            opt.folds = 2;
            opt.seed = stream(o, 4, i);
            const auto res = run_dml(draw.problem, spec, opt, Exec::Serial).result;
            inside[static_cast<std::size_t>(i)] = std::abs(res.theta - 0.5) <= 3.0 * res.se ? 1 : 0;
        } catch (const Error& e) {
            errors[static_cast<std::size_t>(i)] = e;
        }
    }
    for (auto& e : errors) {
        if (e) throw *e;
    }
    int hits = 0;
    for (int v : inside) hits += v;
    r.pass = hits >= 95;
    r.measured = std::to_string(hits) + "/100 within 3 SE (y: " + std::to_string(py.n_trees) + " trees depth " +
                 std::to_string(py.max_depth) + ", d: " + std::to_string(pd.n_trees) + " trees depth " + std::to_string(pd.max_depth) + ")";
    r.required = ">= 95/100";
}

void learner_contrast(CriterionResult& r, const ValidationOptions& o) {
    const int reps = required_reps(6);
    const auto [py, pd] = pilot_boosted_params(stream(o, 6, 99999), 5000);
    std::vector<NonlinearDraw> draws(static_cast<std::size_t>(reps));
    std::vector<std::optional<Error>> errors(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < reps; ++i) {
        try {
            const auto draw = nonlinear_problem(stream(o, 6, i), 5000);
            DmlOptions opt;
            opt.seed = stream(o, 6, i);
            auto& out = draws[static_cast<std::size_t>(i)];
            const auto b = run_dml(draw.problem, LearnerSpec{LearnerKind::Boosted, py, pd}, opt, Exec::Serial);
            const auto l = run_dml(draw.problem, LearnerSpec{}, opt, Exec::Serial);
            out.boosted = b.result;
            out.r2_y_boosted = b.residuals.r2_y;
            out.linear = l.result;
            out.r2_y_linear = l.residuals.r2_y;
        } catch (const Error& e) {
            errors[static_cast<std::size_t>(i)] = e;
        }
    }
    for (auto& e : errors) {
        if (e) throw *e;
    }
    double r2b = 0, r2l = 0, biasb = 0, biasl = 0;
    for (const auto& d : draws) {
        r2b += d.r2_y_boosted;
        r2l += d.r2_y_linear;
        biasb += std::abs(d.boosted.theta - 0.5);
        biasl += std::abs(d.linear.theta - 0.5);
    }
    const double m = reps;
    r2b /= m;
    r2l /= m;
    biasb /= m;
    biasl /= m;
    r.pass = (r2b - r2l) >= 0.10 && biasb < biasl;
    r.measured = fmt("r2_y gap %.4f, ", r2b - r2l) + fmt("mean |err| boosted %.4f vs linear %.4f", biasb, biasl);
    r.required = "r2_y gap >= 0.10 and boosted error < linear error";
}

// --- 5: coverage -----------------------------------------------------------------------

void coverage(CriterionResult& r, const ValidationOptions& o) {
    const int reps = required_reps(5);
    std::vector<int> covered(static_cast<std::size_t>(reps), 0);
    std::vector<std::optional<Error>> errors(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < reps; ++i) {
        try {
            SynthSpec s;
            s.kind = SynthKind::PlrLinear;
            s.theta_true = 0.5;
            s.n = 2000;
            s.k_controls = 5;
            s.seed = stream(o, 5, i);
            const auto draw = gen_plr(s);
            DmlOptions opt;
            opt.seed = s.seed;
            const auto res = run_dml(draw.problem, LearnerSpec{}, opt, Exec::Serial).result;
            covered[static_cast<std::size_t>(i)] = res.ci_low <= 0.5 && 0.5 <= res.ci_high ? 1 : 0;
        } catch (const Error& e) {
            errors[static_cast<std::size_t>(i)] = e;
        }
    }
    for (auto& e : errors) {
        if (e) throw *e;
    }
    int hits = 0;
    for (int v : covered) hits += v;
    const double rate = static_cast<double>(hits) / reps;
    r.pass = rate >= 0.90 && rate <= 0.98;
    r.measured = fmt("coverage %.3f", rate) + " (" + std::to_string(hits) + "/" + std::to_string(reps) + ")";
    r.required = "[0.90, 0.98]";
}

// --- 7: ADF size and power ---------------------------------------------------------------

void adf_size_power(CriterionResult& r, const ValidationOptions& o) {
    const int reps = required_reps(7);
    const auto crit = df_critical_values(500, 100000, stream(o, 7, 99999));
    const double compiled5 = df_critical_value_table(500)[1];
    std::vector<int> rw(static_cast<std::size_t>(reps)), ar(static_cast<std::size_t>(reps));
    std::vector<std::optional<Error>> errors(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < reps; ++i) {
        try {
            SynthSpec s;
            s.n = 500;
            s.seed = stream(o, 7, i);
            s.kind = SynthKind::RandomWalk;
            rw[static_cast<std::size_t>(i)] = adf_test(gen_unit_root(s)).verdict == Verdict::Stationary;
            s.kind = SynthKind::Ar1;
            s.phi = 0.5;
            s.seed = stream(o, 7, reps + i);
            ar[static_cast<std::size_t>(i)] = adf_test(gen_unit_root(s)).verdict == Verdict::Stationary;
        } catch (const Error& e) {
            errors[static_cast<std::size_t>(i)] = e;
        }
    }
    for (auto& e : errors) {
        if (e) throw *e;
    }
    double size = 0, power = 0;
    for (int i = 0; i < reps; ++i) {
        size += rw[static_cast<std::size_t>(i)];
        power += ar[static_cast<std::size_t>(i)];
    }
    size /= reps;
    power /= reps;
    const bool crit_ok = std::abs(crit[1] - -2.86) <= 0.05 && std::abs(compiled5 - crit[1]) <= 0.05;
    r.pass = crit_ok && size <= 0.10 && power >= 0.95;
    r.measured = fmt("size %.3f, power %.3f, ", size, power) + fmt("5%% crit %.4f (compiled %.4f)", crit[1], compiled5);
    r.required = "size <= 0.10, power >= 0.95, 5% crit -2.86+-0.05";
}

// --- 8: lag recovery -----------------------------------------------------------------------

void lag_recovery(CriterionResult& r, const ValidationOptions& o) {
    const int reps = required_reps(8);
    std::vector<int> chosen(static_cast<std::size_t>(reps));
    std::vector<std::optional<Error>> errors(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < reps; ++i) {
        try {
            SynthSpec s;
            s.kind = SynthKind::Var;
            s.n = 400;
            s.seed = stream(o, 8, i);
            s.var_coefficients = recovery_var2_coefficients();
            chosen[static_cast<std::size_t>(i)] = select_lag_var_aic(gen_var(s), 8);
        } catch (const Error& e) {
            errors[static_cast<std::size_t>(i)] = e;
        }
    }
    for (auto& e : errors) {
        if (e) throw *e;
    }
    int hits = 0, under = 0;
    for (int p : chosen) {
        hits += p == 2;
        under += p < 2;
    }
    r.pass = hits >= 90;
    r.measured = std::to_string(hits) + "/100 select p=2 (" + std::to_string(under) + " under, " +
                 std::to_string(reps - hits - under) + " over)";
    r.required = ">= 90/100";
}

// --- 9: GBT loss ---------------------------------------------------------------------------

void gbt_monotone(CriterionResult& r, const ValidationOptions& o) {
    const int reps = required_reps(9);
    int monotone = 0;
    double worst_mean_gap = 0.0;
    for (int i = 0; i < reps; ++i) {
        Rng rng(stream(o, 9, i));
        const Eigen::Index n = 300, k = 4;
        Matrix x(n, k);
        Vector y(n);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < k; ++b) x(a, b) = rng.normal();
            y(a) = std::sin(x(a, 0)) + x(a, 1) * x(a, 1) + 0.5 * x(a, 2) + 0.3 * rng.normal();
        }
        HyperParams hp{60, 3, 0.3, 5, 1.0};
        const auto model = gbt_fit(x, y, hp, stream(o, 9, i), Exec::Parallel);
        const auto curve = gbt_training_curve(model, x, y);
        bool ok = true;
        for (std::size_t m = 1; m < curve.size(); ++m) ok = ok && curve[m] <= curve[m - 1] * (1.0 + 1e-12);
        monotone += ok;

        HyperParams flat{10, 0, 0.3, 1, 1.0};
        const auto stump = gbt_fit(x, y, flat, 0, Exec::Parallel);
        const Vector pred = predict(stump, x);
        const double mean = y.mean();
        worst_mean_gap = std::max(worst_mean_gap, (pred.array() - mean).abs().maxCoeff());
    }
    r.pass = monotone == reps && worst_mean_gap <= 1e-12;
    r.measured = std::to_string(monotone) + "/" + std::to_string(reps) + " monotone, " +
                 fmt("depth-0 max |pred - mean| %.3g", worst_mean_gap);
    r.required = "20/20 monotone, depth-0 gap <= 1e-12";
}

// --- 10: end-to-end determinism ------------------------------------------------------------

void end_to_end(CriterionResult& r, const ValidationOptions& o) {
    const fs::path dir = (o.scratch_dir.empty() ? fs::temp_directory_path() : o.scratch_dir) /
                         ("ratedml-e2e-" + std::to_string(o.seed));
    fs::remove_all(dir);
    write_fixture(dir, o.seed);
    auto config = load_config(dir / "config.json");
    config.output_dir = dir / "run1";
    run_pipeline(config);
    config.output_dir = dir / "run2";
    run_pipeline(config);
    int same = 0;
    std::string differing;
    for (const char* f : {"results.csv", "r2.csv", "per_1pct.csv"}) {
        if (csv::read_file(dir / "run1" / f) == csv::read_file(dir / "run2" / f)) {
            ++same;
        } else {
            differing += std::string(" ") + f;
        }
    }
    fs::remove_all(dir);
    r.pass = same == 3;
    r.measured = std::to_string(same) + "/3 files byte-identical" + differing;
    r.required = "3/3";
}

}  // namespace

int required_reps(int id) {
    switch (id) {
        case 3: return 50;
        case 4: return 100;
        case 5: return 200;
        case 6: return 20;
        case 7: return 200;
        case 8: return 100;
        case 9: return 20;
        default: return 0;
    }
}

std::string criterion_name(int id) {
    switch (id) {
        case 1: return "inference arithmetic";
        case 2: return "per-1% rescaling";
        case 3: return "FWL oracle equivalence";
        case 4: return "estimator consistency";
        case 5: return "CI coverage";
        case 6: return "learner contrast";
        case 7: return "ADF size and power";
        case 8: return "lag-order recovery";
        case 9: return "GBT monotone loss";
        case 10: return "end-to-end determinism";
        default: return "unknown";
    }
}

CriterionResult run_criterion(int id, const ValidationOptions& options) {
    CriterionResult r;
    r.id = id;
    r.name = criterion_name(id);
    const int need = required_reps(id);
    if (options.reps && need > 0 && *options.reps < need) {
        r.insufficient = true;
        r.measured = "insufficient reps (" + std::to_string(*options.reps) + ")";
        r.required = std::to_string(need) + " reps";
        return r;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
        switch (id) {
            case 1: inference_arithmetic(r, options); break;
            case 2: rescaling(r, options); break;
            case 3: fwl_equivalence(r, options); break;
            case 4: consistency(r, options); break;
            case 5: coverage(r, options); break;
            case 6: learner_contrast(r, options); break;
            case 7: adf_size_power(r, options); break;
            case 8: lag_recovery(r, options); break;
            case 9: gbt_monotone(r, options); break;
            case 10: end_to_end(r, options); break;
            default: fail(ErrorCode::InvalidArgument, "no criterion " + std::to_string(id));
        }
    } catch (const Error& e) {
        r.pass = false;
        r.measured = std::string("error ") + std::string(code_name(e.code())) + ": " + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<CriterionResult> validate(const ValidationOptions& options) {
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id) out.push_back(run_criterion(id, options));
    return out;
}

std::string format_validation_line(const CriterionResult& r) {
    char head[64];
    std::snprintf(head, sizeof head, "%s  %2d %-24s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str());
    char tail[32];
    std::snprintf(tail, sizeof tail, "  (%.1fs)", r.seconds);
    return std::string(head) + "  measured " + r.measured + " | required " + r.required + tail;
}

LinearInstance random_linear_instance(std::size_t n, int k, std::uint64_t seed) {
    Rng rng(seed);
    LinearInstance inst;
    const auto rows = static_cast<Eigen::Index>(n);
    inst.x.resize(rows, k);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (int j = 0; j < k; ++j) inst.x(i, j) = rng.normal();
    }
    Vector a(k), b(k);
    for (int j = 0; j < k; ++j) {
        a(j) = rng.normal();
        b(j) = rng.normal();
    }
    const double theta = 2.0 * rng.uniform() - 1.0;
    const double c0 = rng.normal(), c1 = rng.normal();
    inst.d.resize(rows);
    inst.y.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        inst.d(i) = c0 + inst.x.row(i).dot(a) + rng.normal();
        inst.y(i) = c1 + theta * inst.d(i) + inst.x.row(i).dot(b) + rng.normal();
    }
    return inst;
}

double fwl_oracle_theta(const Vector& y, const Vector& d, const Matrix& x) {
    Matrix design(x.rows(), x.cols() + 2);
    design.col(0).setOnes();
    design.col(1) = d;
    design.rightCols(x.cols()) = x;
    return least_squares(design, y).coef(1);
}

std::vector<Matrix> recovery_var2_coefficients() {
    Matrix a1(2, 2), a2(2, 2);
    a1 << 0.5, 0.1, 0.2, 0.3;
    a2 << -0.4, 0.1, 0.0, -0.35;
    return {a1, a2};
}

std::pair<HyperParams, HyperParams> pilot_boosted_params(std::uint64_t seed, int n, Exec exec) {
    const auto pilot = nonlinear_problem(seed, n);
    const auto grid = default_grid();
    const auto ty = grid_search_cv(pilot.problem.x, pilot.problem.y, grid, 2, derive_seed(seed, 1), exec);
    const auto td = grid_search_cv(pilot.problem.x, pilot.problem.d, grid, 2, derive_seed(seed, 2), exec);
    return {ty.best, td.best};
}

}  // namespace ratedml
