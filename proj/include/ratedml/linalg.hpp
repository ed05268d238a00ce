#pragma once

#include <Eigen/Dense>

namespace ratedml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Least-squares solution of design * coef ~ y by column-pivoted Householder QR.
struct LeastSquaresFit {
    Vector coef;
    Vector residuals;
    double rss = 0.0;
    /// (X'X)^{-1}; empty unless requested.
    Matrix xtx_inverse;
};

/// Throws Error{RankDeficient} when the design has exactly collinear columns
/// and Error{TooFewRows} when rows < columns.
LeastSquaresFit least_squares(const Matrix& design, const Vector& y, bool with_inverse = false);

/// [1 | X] design matrix.
Matrix with_intercept(const Matrix& x);

}  // namespace ratedml
