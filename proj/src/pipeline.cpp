#include "ratedml/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include <openssl/evp.h>

#include "ratedml/csv.hpp"
#include "ratedml/error.hpp"
#include "ratedml/learners.hpp"
#include "ratedml/rng.hpp"
#include "ratedml/svg.hpp"
#include "ratedml/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ratedml {

LearnerChoice parse_learner_choice(std::string_view text) {
    if (text == "linear") return LearnerChoice::Linear;
    if (text == "boosted") return LearnerChoice::Boosted;
    if (text == "both") return LearnerChoice::Both;
    fail(ErrorCode::BadConfig, "unknown learner '" + std::string(text) + "' (use linear, boosted or both)");
}

std::string_view to_string(LearnerChoice c) {
    switch (c) {
        case LearnerChoice::Linear: return "linear";
        case LearnerChoice::Boosted: return "boosted";
        case LearnerChoice::Both: return "both";
    }
    return "both";
}

FoldMode parse_fold_mode(std::string_view text) {
    if (text == "row") return FoldMode::Row;
    if (text == "unit") return FoldMode::UnitBlocked;
    fail(ErrorCode::BadConfig, "unknown fold mode '" + std::string(text) + "' (use row or unit)");
}

std::string_view to_string(FoldMode m) { return m == FoldMode::Row ? "row" : "unit"; }

ScoreForm parse_score_form(std::string_view text) {
    if (text == "orthogonal") return ScoreForm::Orthogonal;
    if (text == "residual") return ScoreForm::ResidualOnResidual;
    fail(ErrorCode::BadConfig, "unknown score form '" + std::string(text) + "' (use orthogonal or residual)");
}

std::string_view to_string(ScoreForm s) { return s == ScoreForm::Orthogonal ? "orthogonal" : "residual"; }

void PipelineConfig::validate() const {
    if (funds_csv.empty()) fail(ErrorCode::BadConfig, "config needs a funds CSV path");
    if (macro_csv.empty()) fail(ErrorCode::BadConfig, "config needs a macro CSV path");
    if (treatment.empty()) fail(ErrorCode::BadConfig, "config needs a treatment name");
    if (lag_order && *lag_order < 0) fail(ErrorCode::BadConfig, "lag order must be >= 0");
    if (lag_p_max < 1) fail(ErrorCode::BadConfig, "lag p_max must be >= 1");
    if (folds < 2) fail(ErrorCode::BadK, "K must be >= 2");
    if (tuning_folds < 2) fail(ErrorCode::BadK, "tuning folds must be >= 2");
    if (output_dir.empty()) fail(ErrorCode::BadConfig, "config needs an output directory");
}

json PipelineConfig::to_json() const {
    json j;
    j["funds"] = funds_csv.generic_string();
    j["macro"] = macro_csv.generic_string();
    j["meta"] = meta_csv.generic_string();
    j["treatment"] = treatment;
    j["lag"] = lag_order ? json(*lag_order) : json("auto");
    j["lag_p_max"] = lag_p_max;
    j["learner"] = std::string(to_string(learner));
    j["grid"] = grid.generic_string();
    j["k"] = folds;
    j["tuning_k"] = tuning_folds;
    j["seed"] = seed;
    j["adf_level"] = std::string(to_string(level));
    j["out"] = output_dir.generic_string();
    j["fold_mode"] = std::string(to_string(fold_mode));
    j["score"] = std::string(to_string(score));
    j["means_encoding"] = means_encoding;
    json f;
    f["min_aum"] = filter.min_aum;
    json classes = json::array();
    for (auto a : filter.asset_classes) classes.push_back(std::string(to_string(a)));
    f["asset_classes"] = classes;
    f["managed"] = filter.managed ? json(std::string(to_string(*filter.managed))) : json(nullptr);
    f["min_inception"] = filter.min_inception ? json(filter.min_inception->str()) : json(nullptr);
    j["filter"] = f;
    return j;
}

PipelineConfig config_from_json(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) fail(ErrorCode::BadConfig, "config must be a JSON object");
    static const std::set<std::string> known{"funds", "macro", "meta", "treatment", "lag", "lag_p_max", "learner",
                                             "grid", "k", "tuning_k", "seed", "adf_level", "out", "fold_mode",
                                             "score", "means_encoding", "filter"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key)) fail(ErrorCode::BadConfig, "unknown config key '" + key + "'");
    }
    auto resolve = [&](const std::string& p) -> fs::path {
        if (p.empty()) return {};
        fs::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    PipelineConfig c;
    try {
        if (doc.contains("funds")) c.funds_csv = resolve(doc.at("funds").get<std::string>());
        if (doc.contains("macro")) c.macro_csv = resolve(doc.at("macro").get<std::string>());
        if (doc.contains("meta")) c.meta_csv = resolve(doc.at("meta").get<std::string>());
        if (doc.contains("grid")) c.grid = resolve(doc.at("grid").get<std::string>());
        if (doc.contains("out")) c.output_dir = resolve(doc.at("out").get<std::string>());
        c.treatment = doc.value("treatment", c.treatment);
        if (doc.contains("lag")) {
            const auto& lag = doc.at("lag");
            if (lag.is_string()) {
                if (lag.get<std::string>() != "auto") fail(ErrorCode::BadConfig, "lag must be an integer or \"auto\"");
                c.lag_order.reset();
            } else {
                c.lag_order = lag.get<int>();
            }
        }
        c.lag_p_max = doc.value("lag_p_max", c.lag_p_max);
        if (doc.contains("learner")) c.learner = parse_learner_choice(doc.at("learner").get<std::string>());
        c.folds = doc.value("k", c.folds);
        c.tuning_folds = doc.value("tuning_k", c.tuning_folds);
        c.seed = doc.value("seed", c.seed);
        if (doc.contains("adf_level")) c.level = parse_adf_level(doc.at("adf_level").get<std::string>());
        if (doc.contains("fold_mode")) c.fold_mode = parse_fold_mode(doc.at("fold_mode").get<std::string>());
        if (doc.contains("score")) c.score = parse_score_form(doc.at("score").get<std::string>());
        c.means_encoding = doc.value("means_encoding", c.means_encoding);
        if (doc.contains("filter")) {
            const auto& f = doc.at("filter");
            c.filter.min_aum = f.value("min_aum", 0.0);
            if (f.contains("asset_classes")) {
                for (const auto& a : f.at("asset_classes")) c.filter.asset_classes.insert(parse_asset_class(a.get<std::string>()));
            }
            if (f.contains("managed") && !f.at("managed").is_null()) {
                c.filter.managed = parse_management(f.at("managed").get<std::string>());
            }
            if (f.contains("min_inception") && !f.at("min_inception").is_null()) {
                c.filter.min_inception = Month::parse(f.at("min_inception").get<std::string>());
            }
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::BadConfig, std::string("config: ") + e.what());
    } catch (const Error& e) {
        if (e.category() == ErrorCategory::Config) throw;
        fail(ErrorCode::BadConfig, std::string("config: ") + e.what());
    }
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = csv::read_file(path);
    } catch (const Error& e) {
        fail(ErrorCode::BadConfig, std::string("cannot read config: ") + e.what());
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::BadConfig, path.string() + ": " + e.what());
    }
    return config_from_json(doc, path.parent_path());
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        fail(ErrorCode::Io, "SHA-256 digest failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

namespace {

std::string config_hash(const PipelineConfig& config) {
    auto j = config.to_json();
    j.erase("out");  // same run into another directory is the same run
    return sha256_hex(j.dump());
}

std::vector<std::string> fund_columns(const TimeSeriesMatrix& funds, const PipelineConfig& config) {
    if (config.meta_csv.empty()) return funds.columns();
    const auto catalog = filter_funds(load_fund_meta_csv(config.meta_csv), config.filter);
    std::set<std::string> wanted;
    for (const auto& f : catalog) wanted.insert(f.ticker);
    std::vector<std::string> out;
    for (const auto& c : funds.columns()) {
        if (wanted.contains(c)) out.push_back(c);
    }
    return out;
}

class Staging {
public:
    explicit Staging(fs::path target) : target_(std::move(target)) {
        dir_ = target_.parent_path() / (target_.filename().string() + ".staging");
        std::error_code ec;
        fs::remove_all(dir_, ec);
        fs::create_directories(dir_);
    }
    ~Staging() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    const fs::path& dir() const { return dir_; }

    void write(const std::string& name, const std::string& content) {
        csv::write_file(dir_ / name, content);
        files_.push_back(name);
    }
    const std::vector<std::string>& files() const { return files_; }

    void commit() {
        fs::create_directories(target_);
        for (const auto& f : files_) fs::rename(dir_ / f, target_ / f);
    }

private:
    fs::path target_;
    fs::path dir_;
    std::vector<std::string> files_;
};

const LearnerOutcome& primary_outcome(const std::vector<LearnerOutcome>& outcomes) {
    for (const auto& o : outcomes) {
        if (o.kind == LearnerKind::Boosted) return o;
    }
    return outcomes.front();
}

}  // namespace

PipelineSummary run_pipeline(const PipelineConfig& config, Exec exec) {
    config.validate();
    PipelineSummary summary;

    // load and filter
    auto funds_raw = load_tscs_csv(config.funds_csv);
    auto macro_raw = load_tscs_csv(config.macro_csv);
    if (!macro_raw.column_index(config.treatment)) {
        fail(ErrorCode::BadConfig, "treatment '" + config.treatment + "' is not a macro column");
    }
    const auto tickers = fund_columns(funds_raw, config);
    if (tickers.empty()) fail(ErrorCode::InsufficientData, "no fund passes the metadata filter");
    auto funds = funds_raw.select(tickers);
    summary.funds_used = tickers.size();

    // difference and screen
    auto macro_diff = difference_columns(macro_raw);
    auto screen = screen_stationarity(macro_diff, config.level, std::nullopt, exec);
    std::vector<std::string> kept = screen.kept.columns();
    if (std::find(kept.begin(), kept.end(), config.treatment) == kept.end()) {
        // the treatment is never dropped; its verdict stays in the audit
        std::vector<std::string> names;
        for (const auto& c : macro_diff.columns()) {
            if (c == config.treatment || std::find(kept.begin(), kept.end(), c) != kept.end()) names.push_back(c);
        }
        kept = names;
    }
    for (const auto& [name, _] : screen.dropped) {
        if (name != config.treatment) summary.dropped_variables.push_back(name);
    }
    summary.kept_variables = kept;
    const auto macro = macro_diff.select(kept);

    // correlation and PCA
    const Matrix corr = correlation_matrix(macro);
    const auto pca = pca_corr(corr);

    // lag order
    std::optional<LagSelection> lag_detail;
    if (config.lag_order) {
        summary.lag_order = *config.lag_order;
    } else {
        lag_detail = select_lag_var_aic_detail(macro, config.lag_p_max);
        summary.lag_order = lag_detail->best;
    }

    // panel
    auto [funds_al, macro_al] = align_common(funds, macro);
    const auto treatment = to_series(macro_al, config.treatment);
    const auto controls = macro_al.drop({config.treatment});
    const auto panel = to_panel(funds_al, treatment, controls, summary.lag_order, exec);
    summary.panel_rows = panel.rows.size();
    const auto problem = plr_from_panel(panel);

    DmlOptions options;
    options.folds = config.folds;
    options.seed = config.seed;
    options.fold_mode = config.fold_mode;
    options.score = config.score;
    if (config.means_encoding) options.means_encoding = MeansEncodingOptions{};

    Staging staging(config.output_dir);

    std::vector<LearnerKind> kinds;
    if (config.learner != LearnerChoice::Boosted) kinds.push_back(LearnerKind::Linear);
    if (config.learner != LearnerChoice::Linear) kinds.push_back(LearnerKind::Boosted);

    for (auto kind : kinds) {
        LearnerSpec spec;
        spec.kind = kind;
        if (kind == LearnerKind::Boosted) {
            const auto grid = config.grid.empty() ? default_grid() : parse_grid_json(csv::read_file(config.grid));
            const auto tune_y = grid_search_cv(problem.x, problem.y, grid, config.tuning_folds, derive_seed(config.seed, 7001), exec);
            const auto tune_d = grid_search_cv(problem.x, problem.d, grid, config.tuning_folds, derive_seed(config.seed, 7002), exec);
            spec.params_y = tune_y.best;
            spec.params_d = tune_d.best;
            staging.write("tuning_y.csv", format_grid_csv(tune_y));
            staging.write("tuning_d.csv", format_grid_csv(tune_d));
        }
        summary.outcomes.push_back({kind, run_dml(problem, spec, options, exec)});
    }

    const auto& primary = primary_outcome(summary.outcomes);
    const auto diag = residual_diagnostics(primary.run.residuals);
    staging.write("results.csv", format_results_csv(summary.outcomes));
    staging.write("per_1pct.csv", format_per_1pct_csv(summary.outcomes));
    staging.write("r2.csv", format_r2_csv(summary.outcomes));
    staging.write("residuals.csv", format_residuals_csv(primary.run.residuals));
    staging.write("residuals_fitted.csv", format_residual_points_csv(diag));
    staging.write("corr.csv", format_matrix_csv(kept, corr));
    staging.write("pca.csv", format_pca_csv(kept, pca));
    staging.write("adf_audit.csv", format_adf_audit(screen));
    if (lag_detail) {
        std::string aic = "p,aic\n";
        for (std::size_t p = 0; p < lag_detail->aic.size(); ++p) aic += std::to_string(p + 1) + "," + csv::format_double(lag_detail->aic[p]) + "\n";
        staging.write("lag_aic.csv", aic);
    }
    for (const auto& f : emit_plots(staging.dir())) staging.write(f, csv::read_file(staging.dir() / f));

    // manifest
    json manifest;
    manifest["seed"] = config.seed;
    manifest["config_hash"] = config_hash(config);
    manifest["config"] = config.to_json();
    manifest["rng"] = std::string(Rng::kName);
    manifest["flags"] = {
        {"dml_variant", "DML2"},
        {"score", std::string(to_string(config.score))},
        {"inference", "normal z, unclustered"},
        {"fold_mode", std::string(to_string(config.fold_mode))},
        {"means_encoding", config.means_encoding ? "recomputed per training fold" : "off"},
        {"lag_order", summary.lag_order},
        {"lag_selection", config.lag_order ? "fixed" : "var-aic"},
        {"treatment_lags_in_controls", true},
        {"adf_level", std::string(to_string(config.level))},
        {"residuals_model", std::string(model_label(primary.kind))},
    };
    manifest["panel_rows"] = summary.panel_rows;
    manifest["kept_variables"] = summary.kept_variables;
    manifest["dropped_variables"] = summary.dropped_variables;
    json hashes = json::object();
    for (const auto& f : staging.files()) hashes[f] = sha256_hex(csv::read_file(staging.dir() / f));
    manifest["files"] = hashes;

    summary.reproducibility = "first-run";
    const auto previous = config.output_dir / "manifest.json";
    if (fs::exists(previous)) {
        json old;
        try {
            old = json::parse(csv::read_file(previous));
        } catch (const json::exception&) {
            old = json::object();
        }
        if (old.value("config_hash", "") == manifest["config_hash"] && old.contains("files")) {
            std::vector<std::string> mismatched;
            for (const auto& [name, hash] : hashes.items()) {
                if (old["files"].contains(name) && old["files"][name] != hash) mismatched.push_back(name);
            }
            if (!mismatched.empty()) {
                std::string list;
                for (const auto& m : mismatched) list += (list.empty() ? "" : ", ") + m;
                fail(ErrorCode::ValidationFailed, "rerun does not reproduce the previous manifest: " + list);
            }
            summary.reproducibility = "verified";
        } else {
            summary.reproducibility = "config-changed";
        }
    }
    manifest["reproducibility"] = summary.reproducibility;
    staging.write("manifest.json", manifest.dump(2) + "\n");
    summary.files = staging.files();
    staging.commit();
    return summary;
}

std::vector<std::string> emit_plots(const fs::path& dir) {
    for (const char* name : {"corr.csv", "pca.csv", "residuals_fitted.csv"}) {
        if (!fs::exists(dir / name)) fail(ErrorCode::MissingInput, (dir / name).string() + " not found");
    }
    const auto corr = parse_matrix_csv(dir / "corr.csv");
    csv::write_file(dir / "corr_heatmap.svg", svg::corr_heatmap(corr.names, corr.values));

    const auto pca = csv::read(dir / "pca.csv");
    if (pca.header.size() < 3 || pca.header[2] != "explained_ratio") fail(ErrorCode::MalformedRow, "pca.csv: missing explained_ratio");
    Vector ratio(static_cast<Eigen::Index>(pca.rows.size()));
    for (std::size_t i = 0; i < pca.rows.size(); ++i) {
        auto v = csv::parse_double(pca.rows[i][2]);
        if (!v) fail(ErrorCode::MalformedRow, "pca.csv: non-numeric explained_ratio");
        ratio(static_cast<Eigen::Index>(i)) = *v;
    }
    csv::write_file(dir / "pca_scree.svg", svg::pca_scree(ratio));

    const auto res = csv::read(dir / "residuals_fitted.csv");
    std::vector<std::pair<double, double>> points;
    for (const auto& row : res.rows) {
        auto f = csv::parse_double(row.at(0));
        auto r = csv::parse_double(row.at(1));
        if (!f || !r) fail(ErrorCode::MalformedRow, "residuals_fitted.csv: non-numeric entry");
        points.emplace_back(*f, *r);
    }
    csv::write_file(dir / "residuals_fitted.svg", svg::residuals_fitted(points));
    return {"corr_heatmap.svg", "pca_scree.svg", "residuals_fitted.svg"};
}

void write_fixture(const fs::path& dir, std::uint64_t seed, double theta) {
    PanelFixtureSpec spec;
    spec.seed = seed;
    spec.theta = theta;
    const auto fx = gen_panel_fixture(spec);
    fs::create_directories(dir);
    write_tscs_csv(fx.funds, dir / "funds.csv");
    write_tscs_csv(fx.macro, dir / "macro.csv");
    write_fund_meta_csv(fx.catalog, dir / "meta.csv");
    json cfg;
    cfg["funds"] = "funds.csv";
    cfg["macro"] = "macro.csv";
    cfg["meta"] = "meta.csv";
    cfg["treatment"] = fx.treatment;
    cfg["learner"] = "both";
    cfg["lag"] = 7;
    cfg["k"] = 2;
    cfg["seed"] = seed;
    cfg["out"] = "out";
    csv::write_file(dir / "config.json", cfg.dump(2) + "\n");
}

}  // namespace ratedml
