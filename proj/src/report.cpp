#include "ratedml/report.hpp"

#include "ratedml/csv.hpp"
#include "ratedml/error.hpp"

namespace ratedml {

using csv::format_double;

std::string format_result_row(std::string_view model, const DmlResult& r) {
    return csv::join({std::string(model), format_double(r.theta), format_double(r.se), format_double(r.t),
                      format_double(r.p), format_double(r.ci_low), format_double(r.ci_high), std::to_string(r.n),
                      format_double(r.per_1pct)});
}

std::string format_results_csv(const std::vector<LearnerOutcome>& outcomes) {
    std::string out(kResultsHeader);
    out += '\n';
    for (const auto& o : outcomes) out += format_result_row(model_label(o.kind), o.run.result) + "\n";
    return out;
}

std::string format_per_1pct_csv(const std::vector<LearnerOutcome>& outcomes) {
    std::string out = "model,coef,per_1pct\n";
    for (const auto& o : outcomes) {
        out += csv::join({std::string(model_label(o.kind)), format_double(o.run.result.theta),
                          format_double(o.run.result.per_1pct)}) +
               "\n";
    }
    return out;
}

std::string format_r2_csv(const std::vector<LearnerOutcome>& outcomes) {
    std::string out = "model,r2_y,r2_d\n";
    for (const auto& o : outcomes) {
        out += csv::join({std::string(model_label(o.kind)), format_double(o.run.residuals.r2_y),
                          format_double(o.run.residuals.r2_d)}) +
               "\n";
    }
    return out;
}

std::string format_residuals_csv(const NuisanceResiduals& res) {
    std::string out = "row,fold,u,v\n";
    for (Eigen::Index i = 0; i < res.u.size(); ++i) {
        out += std::to_string(i) + "," + std::to_string(res.fold_of[static_cast<std::size_t>(i)]) + "," +
               format_double(res.u(i)) + "," + format_double(res.v(i)) + "\n";
    }
    return out;
}

std::string format_residual_points_csv(const ResidualDiagnostics& diag) {
    std::string out = "fitted,residual\n";
    for (const auto& [f, r] : diag.points) out += format_double(f) + "," + format_double(r) + "\n";
    return out;
}

std::string format_matrix_csv(const std::vector<std::string>& names, const Matrix& m) {
    if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != names.size()) {
        fail(ErrorCode::DimensionMismatch, "matrix CSV needs a square matrix with one name per row");
    }
    std::vector<std::string> header{"variable"};
    header.insert(header.end(), names.begin(), names.end());
    std::string out = csv::join(header) + "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<std::string> row{names[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(format_double(m(i, j)));
        out += csv::join(row) + "\n";
    }
    return out;
}

std::string format_pca_csv(const std::vector<std::string>& names, const CorrPcaReport& pca) {
    std::vector<std::string> header{"component", "eigenvalue", "explained_ratio"};
    header.insert(header.end(), names.begin(), names.end());
    std::string out = csv::join(header) + "\n";
    for (Eigen::Index j = 0; j < pca.eigenvalues.size(); ++j) {
        std::vector<std::string> row{"PC" + std::to_string(j + 1), format_double(pca.eigenvalues(j)),
                                     format_double(pca.explained_ratio(j))};
        for (Eigen::Index i = 0; i < pca.components.rows(); ++i) row.push_back(format_double(pca.components(i, j)));
        out += csv::join(row) + "\n";
    }
    return out;
}

NamedMatrix parse_matrix_csv(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    if (table.header.empty() || table.header.front() != "variable") {
        fail(ErrorCode::MalformedRow, path.string() + ": expected a leading `variable` column");
    }
    NamedMatrix out;
    out.names.assign(table.header.begin() + 1, table.header.end());
    const auto k = static_cast<Eigen::Index>(out.names.size());
    if (static_cast<Eigen::Index>(table.rows.size()) != k) fail(ErrorCode::DimensionMismatch, path.string() + ": matrix is not square");
    out.values.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            auto v = csv::parse_double(table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)]);
            if (!v) fail(ErrorCode::MalformedRow, path.string() + ": non-numeric matrix entry");
            out.values(i, j) = *v;
        }
    }
    return out;
}

}  // namespace ratedml
