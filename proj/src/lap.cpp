#include "otrank/lap.hpp"

#include "otrank/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace otrank::lap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Reduced costs above -kClamp count as zero; past that the relative
// tolerance applies.
constexpr double kClamp = 1e-9;
constexpr double kSlackRelTol = 1e-6;

double assignment_cost(const CostMatrix& c, const std::vector<int>& sigma) {
    double total = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i) total += c(i, static_cast<std::size_t>(sigma[i]));
    return total;
}

void check_slackness(const CostMatrix& c, const std::vector<int>& rowsol,
                     const std::vector<double>& v) {
    const std::size_t n = c.size();
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = c.row(i);
        scale = std::max(scale, *std::max_element(row, row + n));
    }
    const double tol = std::max(kClamp, kSlackRelTol * scale);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = c.row(i);
        const double u = row[rowsol[i]] - v[rowsol[i]];
        for (std::size_t j = 0; j < n; ++j) {
            if (row[j] - u - v[j] < -tol) {
                throw std::logic_error("lap::solve: complementary slackness violated at (" +
                                       std::to_string(i) + ", " + std::to_string(j) + ")");
            }
        }
    }
}

}  // namespace

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    CostMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw std::invalid_argument("cost matrix must be square");
        for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    }
    m.validate();
    return m;
}

CostMatrix CostMatrix::from_eigen(const Matrix& mat) {
    if (mat.rows() != mat.cols()) throw std::invalid_argument("cost matrix must be square");
    CostMatrix m(static_cast<std::size_t>(mat.rows()));
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
        for (Eigen::Index j = 0; j < mat.cols(); ++j) m(i, j) = mat(i, j);
    m.validate();
    return m;
}

void CostMatrix::validate() const {
    if (n_ == 0) throw std::invalid_argument("cost matrix must be non-empty");
    for (double x : data_) {
        if (!std::isfinite(x) || x < 0.0) {
            throw std::invalid_argument("cost matrix entries must be finite and non-negative");
        }
    }
}

CostMatrix build_squared_cost(const SampleMatrix& sample, const ReferenceGrid& grid) {
    const auto& h = grid.points;
    if (sample.cols() != h.cols()) throw std::invalid_argument("sample and grid dimensions differ");
    if (sample.rows() != h.rows()) throw std::invalid_argument("sample and grid sizes differ");
    if (sample.rows() == 0) throw std::invalid_argument("empty sample");
    if (!sample.allFinite() || !h.allFinite()) throw std::invalid_argument("non-finite coordinates");

    const auto n = static_cast<std::size_t>(sample.rows());
    const Eigen::Index d = sample.cols();
    // Row-major copies keep the inner loop contiguous.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> z = sample;
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g = h;
    CostMatrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = z.data() + i * d;
        for (std::size_t j = 0; j < n; ++j) {
            const double* hj = g.data() + j * d;
            double s = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                const double diff = zi[k] - hj[k];
                s += diff * diff;
            }
            c(i, j) = s;
        }
    }
    return c;
}

RankAssignment solve(const CostMatrix& costs) {
    const int n = static_cast<int>(costs.size());
    if (n == 0) throw std::invalid_argument("lap::solve: empty cost matrix");
    if (n == 1) return {{0}, costs(0, 0)};

    std::vector<int> rowsol(n, -1);
    std::vector<int> colsol(n, -1);
    std::vector<int> matches(n, 0);
    std::vector<int> free_rows(n);
    std::vector<int> collist(n);
    std::vector<int> pred(n);
    std::vector<double> v(n);
    std::vector<double> dist(n);

    // Column reduction, scanning columns in reverse.
    for (int j = n - 1; j >= 0; --j) {
        double min = costs(0, j);
        int imin = 0;
        for (int i = 1; i < n; ++i) {
            if (costs(i, j) < min) {
                min = costs(i, j);
                imin = i;
            }
        }
        v[j] = min;
        if (++matches[imin] == 1) {
            rowsol[imin] = j;
            colsol[j] = imin;
        } else if (v[j] < v[rowsol[imin]]) {
            const int j1 = rowsol[imin];
            rowsol[imin] = j;
            colsol[j] = imin;
            colsol[j1] = -1;
        } else {
            colsol[j] = -1;
        }
    }

    // Reduction transfer from rows assigned exactly once.
    int numfree = 0;
    for (int i = 0; i < n; ++i) {
        if (matches[i] == 0) {
            free_rows[numfree++] = i;
        } else if (matches[i] == 1) {
            const int j1 = rowsol[i];
            const double* row = costs.row(i);
            double min = kInf;
            for (int j = 0; j < n; ++j) {
                if (j != j1) min = std::min(min, row[j] - v[j]);
            }
            v[j1] -= min;
        }
    }

    // Augmenting row reduction, two passes. Floating-point ties can make the
    // relabelling chain cycle, so each pass is capped; rows left over simply
    // go to the augmentation phase.
    const long step_cap = 100L * n;
    for (int pass = 0; pass < 2 && numfree > 0; ++pass) {
        int k = 0;
        const int prvnumfree = numfree;
        numfree = 0;
        long steps = 0;
        while (k < prvnumfree && steps < step_cap) {
            ++steps;
            const int i = free_rows[k++];
            const double* row = costs.row(i);
            double umin = row[0] - v[0];
            int j1 = 0;
            double usubmin = kInf;
            int j2 = 0;
            for (int j = 1; j < n; ++j) {
                const double h = row[j] - v[j];
                if (h < usubmin) {
                    if (h >= umin) {
                        usubmin = h;
                        j2 = j;
                    } else {
                        usubmin = umin;
                        umin = h;
                        j2 = j1;
                        j1 = j;
                    }
                }
            }
            int i0 = colsol[j1];
            if (umin < usubmin) {
                v[j1] -= usubmin - umin;
            } else if (i0 >= 0) {
                j1 = j2;
                i0 = colsol[j2];
            }
            rowsol[i] = j1;
            colsol[j1] = i;
            if (i0 >= 0) {
                if (umin < usubmin) {
                    free_rows[--k] = i0;
                } else {
                    free_rows[numfree++] = i0;
                }
            }
        }
        for (int r = k; r < prvnumfree; ++r) free_rows[numfree++] = free_rows[r];
    }

    // Augmentation: Dijkstra from each remaining free row.
    for (int f = 0; f < numfree; ++f) {
        const int freerow = free_rows[f];
        const double* frow = costs.row(freerow);
        for (int j = 0; j < n; ++j) {
            dist[j] = frow[j] - v[j];
            pred[j] = freerow;
            collist[j] = j;
        }

        int low = 0;  // collist[0, low) settled
        int up = 0;   // collist[low, up) at current minimum
        int last = 0;
        int endofpath = -1;
        double min = 0.0;
        bool found = false;
        while (!found) {
            if (up == low) {
                last = low - 1;
                min = dist[collist[up++]];
                for (int k = up; k < n; ++k) {
                    const int j = collist[k];
                    const double h = dist[j];
                    if (h <= min) {
                        if (h < min) {
                            up = low;
                            min = h;
                        }
                        collist[k] = collist[up];
                        collist[up++] = j;
                    }
                }
                for (int k = low; k < up; ++k) {
                    if (colsol[collist[k]] < 0) {
                        endofpath = collist[k];
                        found = true;
                        break;
                    }
                }
            }
            if (!found) {
                const int j1 = collist[low++];
                const int i = colsol[j1];
                const double* row = costs.row(i);
                const double h = row[j1] - v[j1] - min;
                for (int k = up; k < n; ++k) {
                    const int j = collist[k];
                    const double v2 = row[j] - v[j] - h;
                    if (v2 < dist[j]) {
                        pred[j] = i;
                        if (v2 == min) {
                            if (colsol[j] < 0) {
                                endofpath = j;
                                found = true;
                                break;
                            }
                            collist[k] = collist[up];
                            collist[up++] = j;
                        }
                        dist[j] = v2;
                    }
                }
            }
        }

        for (int k = 0; k <= last; ++k) {
            const int j1 = collist[k];
            v[j1] += dist[j1] - min;
        }

        int i = -1;
        do {
            i = pred[endofpath];
            colsol[endofpath] = i;
            const int j1 = endofpath;
            endofpath = rowsol[i];
            rowsol[i] = j1;
        } while (i != freerow);
    }

    if (!is_permutation(rowsol)) throw std::logic_error("lap::solve: result is not a permutation");
    check_slackness(costs, rowsol, v);
    return {rowsol, assignment_cost(costs, rowsol)};
}

RankAssignment brute_force_solve(const CostMatrix& costs) {
    const std::size_t n = costs.size();
    if (n == 0) throw std::invalid_argument("brute_force_solve: empty cost matrix");
    if (n > 10) throw std::invalid_argument("brute_force_solve: n must be at most 10");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    RankAssignment best{perm, assignment_cost(costs, perm)};
    while (std::next_permutation(perm.begin(), perm.end())) {
        const double cost = assignment_cost(costs, perm);
        if (cost < best.total_cost) best = {perm, cost};
    }
    return best;
}

bool is_permutation(const std::vector<int>& sigma) {
    std::vector<char> seen(sigma.size(), 0);
    for (int s : sigma) {
        if (s < 0 || static_cast<std::size_t>(s) >= sigma.size() || seen[s]) return false;
        seen[s] = 1;
    }
    return true;
}

namespace {

std::vector<Eigen::Index> lexicographic_order(const SampleMatrix& sample) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(sample.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index k = 0; k < sample.cols(); ++k) {
            if (sample(a, k) != sample(b, k)) return sample(a, k) < sample(b, k);
        }
        return a < b;
    });
    return order;
}

bool has_tied_rows(const SampleMatrix& sample) {
    const auto order = lexicographic_order(sample);
    for (std::size_t r = 1; r < order.size(); ++r) {
        if (sample.row(order[r]) == sample.row(order[r - 1])) return true;
    }
    return false;
}

}  // namespace

void check_distinct_rows(const SampleMatrix& sample) {
    if (has_tied_rows(sample)) {
        throw TiedDataError(
            "pooled sample contains repeated observations; enable jitter to break ties");
    }
}

SampleMatrix jitter(const SampleMatrix& sample, std::uint64_t seed) {
    const double range = sample.size() == 0 ? 0.0 : sample.maxCoeff() - sample.minCoeff();
    const double magnitude = 1e-10 * (range > 0.0 ? range : 1.0);
    Rng rng = make_rng(seed, 0x6a69747465720000ULL);
    std::uniform_real_distribution<double> unif(-magnitude, magnitude);
    SampleMatrix out = sample;
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) += unif(rng);
    return out;
}

RankedSample empirical_rank_map(const SampleMatrix& sample, const ReferenceGrid& grid,
                                const RankOptions& options) {
    SampleMatrix data = sample;
    if (has_tied_rows(sample)) {
        if (options.ties == TiePolicy::reject) check_distinct_rows(sample);
        data = jitter(sample, options.jitter_seed);
        check_distinct_rows(data);
    }
    const CostMatrix costs = build_squared_cost(data, grid);
    RankedSample out;
    out.assignment = solve(costs);
    out.ranks.resize(sample.rows(), grid.dim());
    for (Eigen::Index i = 0; i < sample.rows(); ++i) {
        out.ranks.row(i) = grid.points.row(out.assignment.sigma[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace otrank::lap
