#pragma once

#include "otrank/types.hpp"

#include <cstdint>
#include <optional>

namespace otrank {

// N fixed points discretizing a reference distribution. Rows are points.
struct ReferenceGrid {
    Matrix points;
    NuTag nu = NuTag::uniform_cube;
    std::optional<std::uint64_t> seed;

    [[nodiscard]] Eigen::Index size() const { return points.rows(); }
    [[nodiscard]] Eigen::Index dim() const { return points.cols(); }
};

}  // namespace otrank
