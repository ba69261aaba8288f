#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace otrank {

// Rows are observations, columns are coordinates.
using SampleMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Reference distribution a grid discretizes.
enum class NuTag { uniform_cube, spherical_uniform, gaussian, custom_iid };

enum class ScoreKind { identity, coord_gaussian_cdf, coord_gaussian_quantile, van_der_waerden };

std::string_view to_string(NuTag tag);
std::string_view to_string(ScoreKind kind);
NuTag parse_nu_tag(std::string_view text);
ScoreKind parse_score_kind(std::string_view text);

}  // namespace otrank
