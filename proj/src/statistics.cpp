#include "otrank/statistics.hpp"

#include "otrank/linalg.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace otrank::stats {

namespace {

Matrix pool(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.cols() != y.cols()) throw std::invalid_argument("samples have different dimensions");
    Matrix z(x.rows() + y.rows(), x.cols());
    z << x, y;
    return z;
}

Matrix pool_columns(const SampleMatrix& x, const SampleMatrix& y) {
    Matrix z(x.rows(), x.cols() + y.cols());
    z << x, y;
    return z;
}

Matrix gather_rows(const Matrix& source, const std::vector<int>& sigma) {
    Matrix out(static_cast<Eigen::Index>(sigma.size()), source.cols());
    for (std::size_t i = 0; i < sigma.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = source.row(sigma[i]);
    return out;
}

double log_det_pd(const Matrix& a, const char* what) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw std::invalid_argument(std::string(what) + ": matrix is singular");
    const Vector diag = llt.matrixLLT().diagonal();
    double s = 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag(i) > 0.0)) throw std::invalid_argument(std::string(what) + ": matrix is singular");
        s += 2.0 * std::log(diag(i));
    }
    return s;
}

Matrix centered_cov(const Matrix& a, double divisor) {
    const Matrix c = a.rowwise() - a.colwise().mean();
    return c.transpose() * c / divisor;
}

Matrix pairwise_distances(const Matrix& s) {
    const Eigen::Index n = s.rows();
    Matrix dist(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (s.row(i) - s.row(j)).norm();
            dist(i, j) = v;
            dist(j, i) = v;
        }
    }
    return dist;
}

}  // namespace

TwoSampleSetup TwoSampleSetup::make(ReferenceGrid grid, reference::ScoreFunction score, Matrix sigma_erd,
                                    lap::RankOptions rank_options) {
    if (score.dim != grid.dim()) throw std::invalid_argument("score and grid dimensions differ");
    if (sigma_erd.rows() != grid.dim()) throw std::invalid_argument("ERD covariance has the wrong size");
    linalg::require_positive_definite(sigma_erd, "ERD covariance");
    TwoSampleSetup s;
    s.sigma_inv = sigma_erd.inverse();
    s.scored_grid = reference::apply_score_rows(score, grid.points);
    s.grid = std::move(grid);
    s.score = score;
    s.sigma_erd = std::move(sigma_erd);
    s.rank_options = rank_options;
    return s;
}

TwoSampleSetup TwoSampleSetup::standard(NuTag nu, ScoreKind kind, int n_total, int d,
                                        std::optional<std::uint64_t> seed, bool center,
                                        lap::RankOptions rank_options) {
    ReferenceGrid grid = reference::default_grid(nu, n_total, d, seed);
    if (center) reference::center_grid(grid);
    const reference::ScoreFunction score{kind, d};
    Matrix sigma = reference::erd_covariance(nu, score).sigma_erd;
    return make(std::move(grid), score, std::move(sigma), rank_options);
}

RankHotellingResult rank_hotelling(const SampleMatrix& x, const SampleMatrix& y, const TwoSampleSetup& setup) {
    const Eigen::Index m = x.rows();
    const Eigen::Index n = y.rows();
    if (m < 2 || n < 2) throw std::invalid_argument("rank_hotelling: each sample needs at least 2 rows");
    if (m + n != setup.grid.size()) throw std::invalid_argument("rank_hotelling: m + n must equal the grid size");
    const Matrix z = pool(x, y);
    const lap::RankedSample ranked = lap::empirical_rank_map(z, setup.grid, setup.rank_options);

    RankHotellingResult out;
    out.sigma = ranked.assignment.sigma;
    out.scores = gather_rows(setup.scored_grid, out.sigma);
    out.delta = out.scores.topRows(m).colwise().mean().transpose() - out.scores.bottomRows(n).colwise().mean().transpose();
    const double factor = static_cast<double>(m) * static_cast<double>(n) / static_cast<double>(m + n);
    out.statistic = factor * out.delta.dot(setup.sigma_inv * out.delta);
    return out;
}

RankHotellingResult rank_hotelling(const TwoSampleInput& input) { return rank_hotelling(input.x, input.y, input.setup); }

double rank_hotelling_from_scores(const Matrix& scores, const std::vector<int>& order, int m, const Matrix& sigma_inv) {
    const auto total = static_cast<int>(order.size());
    const int n = total - m;
    if (m < 1 || n < 1) throw std::invalid_argument("rank_hotelling_from_scores: bad split");
    Vector sx = Vector::Zero(scores.cols());
    Vector sy = Vector::Zero(scores.cols());
    for (int i = 0; i < m; ++i) sx += scores.row(order[i]).transpose();
    for (int i = m; i < total; ++i) sy += scores.row(order[i]).transpose();
    const Vector delta = sx / m - sy / n;
    return static_cast<double>(m) * n / total * delta.dot(sigma_inv * delta);
}

double hotelling_t2(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.cols() != y.cols()) throw std::invalid_argument("hotelling_t2: samples have different dimensions");
    const double m = static_cast<double>(x.rows());
    const double n = static_cast<double>(y.rows());
    if (m + n - 2.0 < static_cast<double>(x.cols()) || m < 1 || n < 1) {
        throw std::invalid_argument("hotelling_t2: need m + n - 2 >= d");
    }
    const Matrix cx = x.rowwise() - x.colwise().mean();
    const Matrix cy = y.rowwise() - y.colwise().mean();
    const Matrix s = (cx.transpose() * cx + cy.transpose() * cy) / (m + n - 2.0);
    const Vector diff = x.colwise().mean().transpose() - y.colwise().mean().transpose();
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("hotelling_t2: pooled covariance is singular");
    return m * n / (m + n) * diff.dot(llt.solve(diff));
}

IndependenceSetup IndependenceSetup::make(ReferenceGrid grid_x, ReferenceGrid grid_y, reference::ScoreFunction score_x,
                                          reference::ScoreFunction score_y, Matrix sigma_x, Matrix sigma_y,
                                          lap::RankOptions rank_options) {
    if (grid_x.size() != grid_y.size()) throw std::invalid_argument("independence grids must have equal sizes");
    if (score_x.dim != grid_x.dim() || score_y.dim != grid_y.dim()) {
        throw std::invalid_argument("score and grid dimensions differ");
    }
    IndependenceSetup s;
    s.whiten_x = linalg::sym_inv_sqrt(sigma_x);
    s.whiten_y = linalg::sym_inv_sqrt(sigma_y);
    s.scored_x = reference::apply_score_rows(score_x, grid_x.points);
    s.scored_y = reference::apply_score_rows(score_y, grid_y.points);
    s.grid_x = std::move(grid_x);
    s.grid_y = std::move(grid_y);
    s.score_x = score_x;
    s.score_y = score_y;
    s.sigma_x = std::move(sigma_x);
    s.sigma_y = std::move(sigma_y);
    s.rank_options = rank_options;
    return s;
}

IndependenceSetup IndependenceSetup::standard(NuTag nu, ScoreKind kind, int n, int dx, int dy,
                                              std::optional<std::uint64_t> seed, bool center,
                                              lap::RankOptions rank_options) {
    ReferenceGrid gx = reference::default_grid(nu, n, dx, seed);
    ReferenceGrid gy = reference::default_grid(nu, n, dy, seed);
    if (center) {
        reference::center_grid(gx);
        reference::center_grid(gy);
    }
    const reference::ScoreFunction sx{kind, dx};
    const reference::ScoreFunction sy{kind, dy};
    Matrix cx = reference::erd_covariance(nu, sx).sigma_erd;
    Matrix cy = reference::erd_covariance(nu, sy).sigma_erd;
    return make(std::move(gx), std::move(gy), sx, sy, std::move(cx), std::move(cy), rank_options);
}

ScoredPairs scored_ranks(const SampleMatrix& x, const SampleMatrix& y, const IndependenceSetup& setup) {
    if (x.rows() != y.rows()) throw std::invalid_argument("independence samples need equal row counts");
    if (x.rows() < 3) throw std::invalid_argument("independence tests need at least 3 observations");
    if (x.rows() != setup.grid_x.size()) throw std::invalid_argument("sample size must equal the grid size");
    const lap::RankedSample rx = lap::empirical_rank_map(x, setup.grid_x, setup.rank_options);
    const lap::RankedSample ry = lap::empirical_rank_map(y, setup.grid_y, setup.rank_options);
    return {gather_rows(setup.scored_x, rx.assignment.sigma), gather_rows(setup.scored_y, ry.assignment.sigma)};
}

double spearman_from_scores(const Matrix& sx, const Matrix& sy, const Matrix& whiten_x, const Matrix& whiten_y) {
    if (sx.rows() != sy.rows()) throw std::invalid_argument("spearman: row counts differ");
    const double n = static_cast<double>(sx.rows());
    const Matrix ax = sx.rowwise() - sx.colwise().mean();
    const Matrix ay = sy.rowwise() - sy.colwise().mean();
    const Matrix cross = ax.transpose() * ay / std::sqrt(n);
    // (W_x (x) W_y) vec_row(C) = vec_row(W_x C W_y) for symmetric W_y.
    return (whiten_x * cross * whiten_y).squaredNorm();
}

double rank_spearman(const SampleMatrix& x, const SampleMatrix& y, const IndependenceSetup& setup) {
    const ScoredPairs s = scored_ranks(x, y, setup);
    return spearman_from_scores(s.sx, s.sy, setup.whiten_x, setup.whiten_y);
}

double rank_spearman(const IndependenceInput& input) { return rank_spearman(input.x, input.y, input.setup); }

double wilks(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.rows() != y.rows()) throw std::invalid_argument("wilks: row counts differ");
    const double n = static_cast<double>(x.rows());
    const Matrix q = centered_cov(pool_columns(x, y), n);
    const Eigen::Index dx = x.cols();
    const Eigen::Index dy = y.cols();
    return n * (log_det_pd(q.topLeftCorner(dx, dx), "wilks Q11") + log_det_pd(q.bottomRightCorner(dy, dy), "wilks Q22") -
                log_det_pd(q, "wilks Q"));
}

double rdcov_from_scores(const Matrix& sx, const Matrix& sy) {
    if (sx.rows() != sy.rows()) throw std::invalid_argument("rdcov: row counts differ");
    const double n = static_cast<double>(sx.rows());
    const Matrix d1 = pairwise_distances(sx);
    const Matrix d2 = pairwise_distances(sy);
    const double term1 = d1.cwiseProduct(d2).sum() / (n * n);
    const double term2 = d1.sum() * d2.sum() / (n * n * n * n);
    const Vector r1 = d1.rowwise().sum();
    const Vector r2 = d2.rowwise().sum();
    const double term3 = 2.0 * r1.dot(r2) / (n * n * n);
    return term1 + term2 - term3;
}

double rdcov(const SampleMatrix& x, const SampleMatrix& y, const IndependenceSetup& setup) {
    const ScoredPairs s = scored_ranks(x, y, setup);
    return rdcov_from_scores(s.sx, s.sy);
}

double rdcov(const IndependenceInput& input) { return rdcov(input.x, input.y, input.setup); }

}  // namespace otrank::stats
