#pragma once

// Closed-form population rank maps for families where the optimal transport
// map to the reference law is explicit.

#include "otrank/grid.hpp"
#include "otrank/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace otrank::transport {

using PointMap = std::function<Vector(const Vector&)>;
using ScalarFn = std::function<double(double)>;

struct PopulationMap {
    std::string family;
    NuTag target = NuTag::gaussian;
    int dim = 1;
    PointMap map;

    Vector operator()(const Vector& x) const { return map(x); }
    // Row-wise application.
    Matrix apply(const Matrix& points) const;
};

// R(x) = Sigma^{-1/2} (x - theta), symmetric root.
PopulationMap gaussian_to_gaussian_map(const Vector& theta, const Matrix& sigma);

// CDF and quantile of the radius of a spherical law on R^d.
struct RadialLaw {
    std::string name;
    ScalarFn cdf;
    ScalarFn quantile;
};

// Radius of a standard Gaussian (sqrt chi-square with d degrees of freedom).
RadialLaw chi_radial(int d);
// Radius of the spherical uniform law on the unit ball, U[0,1].
RadialLaw unit_uniform_radial();
// Radius of a standard multivariate t with `dof` degrees of freedom.
RadialLaw t_radial(int d, double dof);
// Radius of sqrt(W) G with W ~ Exp(1), G standard Gaussian.
RadialLaw laplace_radial(int d);

/// (z / |z|) * H2^{-1}(H1(|z|)) with z = Sigma^{-1/2}(x - theta). Both radial
/// laws are probed for monotonicity; a decreasing CDF throws
/// std::invalid_argument.
PopulationMap elliptical_radial_map(const Vector& theta, const Matrix& sigma, const RadialLaw& h1,
                                    const RadialLaw& h2, NuTag target);

// Coordinatewise F_i (target uniform_cube) or Phi^{-1} o F_i (target gaussian).
PopulationMap independent_components_map(const std::vector<ScalarFn>& cdfs, NuTag target);

// (1/N) sum_i ||R_hat(Z_i) - R(Z_i)||. Throws when the map targets a
// different law than the grid discretizes.
double rank_convergence_error(const SampleMatrix& sample, const ReferenceGrid& grid, const PopulationMap& map);

}  // namespace otrank::transport
