#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ratedml/dml.hpp"
#include "ratedml/panel_data.hpp"
#include "ratedml/preprocess.hpp"
#include "ratedml/report.hpp"

namespace ratedml {

enum class LearnerChoice { Linear, Boosted, Both };
LearnerChoice parse_learner_choice(std::string_view text);
std::string_view to_string(LearnerChoice c);
FoldMode parse_fold_mode(std::string_view text);
std::string_view to_string(FoldMode m);
ScoreForm parse_score_form(std::string_view text);
std::string_view to_string(ScoreForm s);

struct PipelineConfig {
    std::filesystem::path funds_csv;
    std::filesystem::path macro_csv;
    std::filesystem::path meta_csv;  ///< empty: keep every fund column
    std::string treatment = "fedfunds";
    std::optional<int> lag_order = 7;  ///< nullopt selects by VAR AIC
    int lag_p_max = 12;
    LearnerChoice learner = LearnerChoice::Both;
    std::filesystem::path grid;  ///< empty: default grid
    int folds = 2;
    int tuning_folds = 2;
    std::uint64_t seed = 0;
    AdfLevel level = AdfLevel::Pct5;
    std::filesystem::path output_dir = "out";
    FoldMode fold_mode = FoldMode::Row;
    ScoreForm score = ScoreForm::Orthogonal;
    bool means_encoding = true;
    FundCriteria filter;

    /// Errors: BadConfig, BadK.
    void validate() const;
    /// Canonical form; paths are written as given.
    nlohmann::json to_json() const;
};

/// Relative input paths resolve against base_dir. Errors: BadConfig.
PipelineConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

struct PipelineSummary {
    std::vector<LearnerOutcome> outcomes;
    std::vector<std::string> kept_variables;
    std::vector<std::string> dropped_variables;
    int lag_order = 0;
    std::size_t panel_rows = 0;
    std::size_t funds_used = 0;
    std::string reproducibility;  ///< "first-run", "verified" or "config-changed"
    std::vector<std::string> files;
};

/// Loads, screens, builds the panel, tunes, estimates and writes every
/// artifact plus manifest.json. Outputs are staged and only moved into
/// output_dir on success. A rerun whose hashes differ from the previous
/// manifest of the same config fails with ValidationFailed.
PipelineSummary run_pipeline(const PipelineConfig& config, Exec exec = Exec::Parallel);

/// Renders corr_heatmap.svg, pca_scree.svg and residuals_fitted.svg from the
/// CSVs in dir. Errors: MissingInput.
std::vector<std::string> emit_plots(const std::filesystem::path& dir);

/// Writes funds.csv, macro.csv, meta.csv and config.json for the fixture.
void write_fixture(const std::filesystem::path& dir, std::uint64_t seed, double theta = 0.5);

}  // namespace ratedml
