#pragma once

// Exact squared-Euclidean assignment between a sample and a reference grid.

#include "otrank/grid.hpp"
#include "otrank/types.hpp"

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace otrank::lap {

// Dense square matrix of non-negative finite costs, row-major.
class CostMatrix {
public:
    CostMatrix() = default;
    explicit CostMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    // Validates squareness, finiteness and non-negativity.
    static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);
    static CostMatrix from_eigen(const Matrix& m);

    [[nodiscard]] std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    [[nodiscard]] const double* row(std::size_t i) const { return data_.data() + i * n_; }

    void validate() const;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

// sigma[i] is the grid index assigned to observation i.
struct RankAssignment {
    std::vector<int> sigma;
    double total_cost = 0.0;
};

// Pooled data contained repeated rows while the tie policy forbids them.
class TiedDataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class TiePolicy { reject, jitter };

struct RankOptions {
    TiePolicy ties = TiePolicy::reject;
    std::uint64_t jitter_seed = 0;
};

struct RankedSample {
    Matrix ranks;  // row i is the grid point assigned to observation i
    RankAssignment assignment;
};

// costs(i, j) = ||sample_i - grid_j||^2, computed coordinate-wise.
CostMatrix build_squared_cost(const SampleMatrix& sample, const ReferenceGrid& grid);

/// Minimum-cost perfect matching by shortest augmenting paths
/// (Jonker-Volgenant: column reduction, reduction transfer, two passes of
/// augmenting row reduction, then Dijkstra augmentation per free row).
///
/// Deterministic: rows and columns are scanned in index order and the lowest
/// index wins among equal reduced costs. When several optimal assignments
/// exist, any of them yields a statistically valid rank map; the one returned
/// is fixed by that scan order. The result is checked for bijectivity and for
/// complementary slackness of the final duals; a violation throws
/// std::logic_error.
RankAssignment solve(const CostMatrix& costs);

// Exhaustive search over all n! permutations in lexicographic order, keeping
// the first strict minimum. n <= 10.
RankAssignment brute_force_solve(const CostMatrix& costs);

bool is_permutation(const std::vector<int>& sigma);

// Throws TiedDataError if two rows are identical.
void check_distinct_rows(const SampleMatrix& sample);

// Adds seeded uniform noise of magnitude 1e-10 times the data range.
SampleMatrix jitter(const SampleMatrix& sample, std::uint64_t seed);

RankedSample empirical_rank_map(const SampleMatrix& sample, const ReferenceGrid& grid,
                                const RankOptions& options = {});

}  // namespace otrank::lap
