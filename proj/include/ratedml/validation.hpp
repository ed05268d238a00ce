#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ratedml/exec.hpp"
#include "ratedml/learners.hpp"
#include "ratedml/linalg.hpp"

namespace ratedml {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    bool insufficient = false;  ///< Monte Carlo row skipped for lack of replications
    std::string measured;
    std::string required;
    double seconds = 0.0;
};

struct ValidationOptions {
    std::uint64_t seed = 20241019;
    /// Replication budget; a criterion needing more is reported as
    /// "insufficient reps" and fails. nullopt runs every criterion in full.
    std::optional<int> reps;
    /// Scratch space for the end-to-end check; empty uses the system temp dir.
    std::filesystem::path scratch_dir;
};

inline constexpr int kCriterionCount = 10;

/// Replications a criterion needs (0 for deterministic checks).
int required_reps(int id);
std::string criterion_name(int id);

CriterionResult run_criterion(int id, const ValidationOptions& options);
std::vector<CriterionResult> validate(const ValidationOptions& options);

/// One line per criterion: `PASS|FAIL  <id> <name>  measured ... | required ...`.
std::string format_validation_line(const CriterionResult& r);

// Shared fixtures, also used by the unit tests.

/// Random linear PLR instance with random coefficients (FWL checks).
struct LinearInstance {
    Matrix x;
    Vector d;
    Vector y;
};
LinearInstance random_linear_instance(std::size_t n, int k, std::uint64_t seed);

/// d-coefficient of OLS of y on [1, d, X].
double fwl_oracle_theta(const Vector& y, const Vector& d, const Matrix& x);

/// Stationary K=2 VAR(2) coefficients used by the lag-recovery check.
std::vector<Matrix> recovery_var2_coefficients();

/// y-task and d-task settings tuned once on a pilot draw of the nonlinear design.
std::pair<HyperParams, HyperParams> pilot_boosted_params(std::uint64_t seed, int n, Exec exec = Exec::Parallel);

}  // namespace ratedml
