#include "ratedml/linalg.hpp"

#include <string>

#include "ratedml/error.hpp"

namespace ratedml {

LeastSquaresFit least_squares(const Matrix& design, const Vector& y, bool with_inverse) {
    const auto n = design.rows();
    const auto k = design.cols();
    if (y.size() != n) fail(ErrorCode::LengthMismatch, "design has " + std::to_string(n) + " rows, target " + std::to_string(y.size()));
    if (n < k) fail(ErrorCode::TooFewRows, "need at least as many rows as columns");

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    qr.setThreshold(1e-11);
    if (qr.rank() < k) fail(ErrorCode::RankDeficient, "design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " + std::to_string(k) + ")");

    LeastSquaresFit fit;
    fit.coef = qr.solve(y);
    fit.residuals = y - design * fit.coef;
    fit.rss = fit.residuals.squaredNorm();
    if (with_inverse) {
        // X P = Q R  =>  (X'X)^{-1} = P R^{-1} R^{-T} P'
        Matrix r = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
        Matrix r_inv = r.template triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
        Matrix inner = r_inv * r_inv.transpose();
        fit.xtx_inverse = qr.colsPermutation() * inner * qr.colsPermutation().transpose();
    }
    return fit;
}

Matrix with_intercept(const Matrix& x) {
    Matrix out(x.rows(), x.cols() + 1);
    out.col(0).setOnes();
    out.rightCols(x.cols()) = x;
    return out;
}

}  // namespace ratedml
