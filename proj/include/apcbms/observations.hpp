#pragma once

#include <string>
#include <vector>

#include "apcbms/types.hpp"

namespace apcbms {

/// One scalar output coordinate of the analysis: a quantity of interest at
/// a (space, time) location. Models produce one value per coordinate, in
/// grid order.
struct OutputCoord {
    std::string space_label;
    std::string time_label;
    std::string quantity;

    bool operator==(const OutputCoord& other) const = default;
};

class OutputGrid {
public:
    OutputGrid() = default;
    explicit OutputGrid(std::vector<OutputCoord> coords);

    int size() const { return static_cast<int>(coords_.size()); }
    const OutputCoord& coord(int i) const { return coords_.at(static_cast<std::size_t>(i)); }
    const std::vector<OutputCoord>& coords() const { return coords_; }

    // Distinct quantities in first-appearance order.
    std::vector<std::string> quantities() const;
    // Indices of all coordinates belonging to one quantity, grid order.
    std::vector<int> indices_of(const std::string& quantity) const;
    // Distinct space labels of one quantity, first-appearance order.
    std::vector<std::string> space_labels_of(const std::string& quantity) const;

private:
    std::vector<OutputCoord> coords_;
};

/// Measurement vector with a diagonal error covariance. The default error
/// model assigns each coordinate a standard deviation of 20% of the
/// measured value; files may override sigma per coordinate.
struct ObservationSet {
    OutputGrid grid;
    Vector values;  // y0
    Vector sigma;   // per-coordinate measurement error std dev (R = diag(sigma^2))

    int size() const { return static_cast<int>(values.size()); }
};

/// Selection of output coordinates used by one analysis stage, e.g. "the
/// first 3 spatial points of calcium, all times".
struct DataSubset {
    std::string description;
    std::vector<int> indices;  // into the full grid, ascending

    int size() const { return static_cast<int>(indices.size()); }
};

// All coordinates of one quantity whose space label is among the first
// `spatial_count` distinct space labels of that quantity.
DataSubset spatial_subset(const OutputGrid& grid, const std::string& quantity, int spatial_count);

// The full grid as a subset.
DataSubset full_subset(const OutputGrid& grid);

}  // namespace apcbms
