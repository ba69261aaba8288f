#pragma once

// Reference grids, score functions and effective-reference covariances.

#include "otrank/grid.hpp"
#include "otrank/parallel.hpp"
#include "otrank/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace otrank::reference {

constexpr int kMaxHaltonDim = 64;

// Van der Corput radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, int base);

// First N Halton points, bases = first d primes, index starting at 1.
ReferenceGrid halton_grid(int n, int d);

// {1/N, 2/N, ..., N/N}.
ReferenceGrid regular_grid_1d(int n);

struct SphericalLayout {
    int n_radii = 0;
    int n_directions = 0;
    int n_leftover = 0;
    bool iid_fallback = false;
};

/// Grid for the uniform law on the unit ball, built as radii
/// {j / (n_R + 1)} crossed with n_S unit directions (N = n_R n_S + n_0).
/// Directions come from a (d-1)-dimensional Halton block pushed through the
/// inverse-CDF hyperspherical map; the n_0 leftover points sit at radius
/// 1 / (2 (n_R + 1)) on the first n_0 directions. A seed applies a
/// Cranley-Patterson rotation to the Halton block. When no factorization with
/// at least two directions exists the grid is drawn iid and flagged.
ReferenceGrid spherical_uniform_grid(int n, int d, std::optional<std::uint64_t> seed = {},
                                     SphericalLayout* layout = nullptr);

// Coordinatewise standard normal quantile of the Halton points.
ReferenceGrid gaussian_grid(int n, int d);

// Seeded iid draws from a named law (custom_iid needs the sampler overload).
ReferenceGrid iid_grid(int n, int d, NuTag nu, std::uint64_t seed);

using PointSampler = std::function<Vector(Rng&)>;
ReferenceGrid iid_grid(int n, int d, const PointSampler& sampler, std::uint64_t seed);

// Halton for the cube ({i/N} when d = 1), the factorized grid for the ball,
// Gaussian-Halton for the normal law.
ReferenceGrid default_grid(NuTag nu, int n, int d, std::optional<std::uint64_t> seed = {});

// Subtracts the column means so the points sum to zero.
void center_grid(ReferenceGrid& grid);

struct ScoreFunction {
    ScoreKind kind = ScoreKind::identity;
    int dim = 1;
};

Vector apply_score(const ScoreFunction& score, const Vector& x);
// Row-wise application.
Matrix apply_score_rows(const ScoreFunction& score, const Matrix& points);

struct ErdSpec {
    Matrix sigma_erd;
    bool closed_form = true;
    // Largest standard error over the entries of a Monte Carlo estimate.
    double std_error = 0.0;
};

struct ErdOptions {
    bool allow_monte_carlo = false;
    int mc_draws = 200'000;
    std::uint64_t seed = 0;
};

/// Covariance of J(V), V ~ nu. Closed forms:
///   (uniform_cube, identity)                 -> I/12
///   (uniform_cube, coord_gaussian_quantile)  -> I
///   (spherical_uniform, identity)            -> I/(3d)
///   (spherical_uniform, van_der_waerden)     -> I
///   (gaussian, identity)                     -> I
///   (gaussian, coord_gaussian_cdf)           -> I/12
/// Other pairs need options.allow_monte_carlo. A covariance that is not
/// positive definite throws std::invalid_argument.
ErdSpec erd_covariance(NuTag nu, const ScoreFunction& score, const ErdOptions& options = {});

// CSV with header `dim=d,nu=<tag>,seed=<s>` and %.17g coordinates.
std::string grid_to_csv(const ReferenceGrid& grid);
ReferenceGrid grid_from_csv(std::string_view text);

// FNV-1a hash of grid_to_csv(grid).
std::uint64_t fingerprint(const ReferenceGrid& grid);

}  // namespace otrank::reference
