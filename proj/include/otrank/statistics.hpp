#pragma once

// Rank-based and classical two-sample and independence statistics.

#include "otrank/grid.hpp"
#include "otrank/lap.hpp"
#include "otrank/reference.hpp"
#include "otrank/types.hpp"

#include <optional>

namespace otrank::stats {

// Data-independent part of a rank Hotelling test: grid, score, ERD and the
// scored grid J(h_j) (the scored ranks are a permutation of its rows).
struct TwoSampleSetup {
    ReferenceGrid grid;
    reference::ScoreFunction score;
    Matrix sigma_erd;
    Matrix sigma_inv;
    Matrix scored_grid;
    lap::RankOptions rank_options;

    static TwoSampleSetup make(ReferenceGrid grid, reference::ScoreFunction score, Matrix sigma_erd,
                               lap::RankOptions rank_options = {});
    // Default grid for nu, closed-form ERD for (nu, score).
    static TwoSampleSetup standard(NuTag nu, ScoreKind kind, int n_total, int d,
                                   std::optional<std::uint64_t> seed = {}, bool center = false,
                                   lap::RankOptions rank_options = {});
};

struct TwoSampleInput {
    SampleMatrix x;
    SampleMatrix y;
    TwoSampleSetup setup;
};

struct RankHotellingResult {
    double statistic = 0.0;
    Vector delta;          // mean X-score minus mean Y-score
    Matrix scores;         // pooled scored ranks, X rows first
    std::vector<int> sigma;
};

/// (mn/(m+n)) delta' Sigma_ERD^{-1} delta with delta the difference of mean
/// scored ranks, ranks computed once on the pooled sample.
RankHotellingResult rank_hotelling(const SampleMatrix& x, const SampleMatrix& y, const TwoSampleSetup& setup);
RankHotellingResult rank_hotelling(const TwoSampleInput& input);

// Same statistic from pooled scores; rows listed in `order`, the first m of
// which form sample 1.
double rank_hotelling_from_scores(const Matrix& scores, const std::vector<int>& order, int m,
                                  const Matrix& sigma_inv);

// Pooled-covariance Hotelling T^2.
double hotelling_t2(const SampleMatrix& x, const SampleMatrix& y);

struct IndependenceSetup {
    ReferenceGrid grid_x;
    ReferenceGrid grid_y;
    reference::ScoreFunction score_x;
    reference::ScoreFunction score_y;
    Matrix sigma_x;
    Matrix sigma_y;
    Matrix whiten_x;  // Sigma_x^{-1/2}
    Matrix whiten_y;  // Sigma_y^{-1/2}
    Matrix scored_x;  // J_1(grid_x)
    Matrix scored_y;  // J_2(grid_y)
    lap::RankOptions rank_options;

    static IndependenceSetup make(ReferenceGrid grid_x, ReferenceGrid grid_y, reference::ScoreFunction score_x,
                                  reference::ScoreFunction score_y, Matrix sigma_x, Matrix sigma_y,
                                  lap::RankOptions rank_options = {});
    // Same reference law and score kind on both blocks.
    static IndependenceSetup standard(NuTag nu, ScoreKind kind, int n, int dx, int dy,
                                      std::optional<std::uint64_t> seed = {}, bool center = false,
                                      lap::RankOptions rank_options = {});
};

struct IndependenceInput {
    SampleMatrix x;
    SampleMatrix y;
    IndependenceSetup setup;
};

// Scored ranks of each block, rows aligned with the observations.
struct ScoredPairs {
    Matrix sx;
    Matrix sy;
};
ScoredPairs scored_ranks(const SampleMatrix& x, const SampleMatrix& y, const IndependenceSetup& setup);

/// Squared norm of (Sigma_1 (x) Sigma_2)^{-1/2} vec(n^{-1/2} sum_i (a_i - abar)(b_i - bbar)'),
/// vec taken row-wise, a_i and b_i the scored ranks, centered by their means.
double rank_spearman(const SampleMatrix& x, const SampleMatrix& y, const IndependenceSetup& setup);
double rank_spearman(const IndependenceInput& input);
double spearman_from_scores(const Matrix& sx, const Matrix& sy, const Matrix& whiten_x, const Matrix& whiten_y);

// n log(det Q11 det Q22 / det Q), Q the 1/n centered joint covariance.
double wilks(const SampleMatrix& x, const SampleMatrix& y);

// Distance-covariance V-statistic of the scored ranks.
double rdcov(const SampleMatrix& x, const SampleMatrix& y, const IndependenceSetup& setup);
double rdcov(const IndependenceInput& input);
double rdcov_from_scores(const Matrix& sx, const Matrix& sy);

}  // namespace otrank::stats
