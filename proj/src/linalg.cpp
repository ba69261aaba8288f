#include "otrank/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <string>

namespace otrank::linalg {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> decompose(const Matrix& a, const char* what) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
    }
    if (!a.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
    if (es.info() != Eigen::Success) throw std::invalid_argument(std::string(what) + ": eigendecomposition failed");
    if (es.eigenvalues().minCoeff() < kEigenFloor) {
        throw std::invalid_argument(std::string(what) + ": matrix is not positive definite");
    }
    return es;
}

}  // namespace

Matrix sym_sqrt(const Matrix& a) {
    const auto es = decompose(a, "sym_sqrt");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

Matrix sym_inv_sqrt(const Matrix& a) {
    const auto es = decompose(a, "sym_inv_sqrt");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

void require_positive_definite(const Matrix& a, const char* what) { decompose(a, what); }

}  // namespace otrank::linalg
