#include "apcbms/observations.hpp"

#include <algorithm>
#include <set>

namespace apcbms {

OutputGrid::OutputGrid(std::vector<OutputCoord> coords) : coords_(std::move(coords)) {
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& c : coords_) {
        if (!seen.insert({c.space_label, c.time_label, c.quantity}).second) {
            throw InvalidArgument("duplicate output coordinate: quantity=" + c.quantity +
                                  " space=" + c.space_label + " time=" + c.time_label);
        }
    }
}

std::vector<std::string> OutputGrid::quantities() const {
    std::vector<std::string> out;
    for (const auto& c : coords_) {
        if (std::find(out.begin(), out.end(), c.quantity) == out.end()) out.push_back(c.quantity);
    }
    return out;
}

std::vector<int> OutputGrid::indices_of(const std::string& quantity) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i) {
        if (coords_[static_cast<std::size_t>(i)].quantity == quantity) out.push_back(i);
    }
    return out;
}

std::vector<std::string> OutputGrid::space_labels_of(const std::string& quantity) const {
    std::vector<std::string> out;
    for (const auto& c : coords_) {
        if (c.quantity != quantity) continue;
        if (std::find(out.begin(), out.end(), c.space_label) == out.end()) {
            out.push_back(c.space_label);
        }
    }
    return out;
}

DataSubset spatial_subset(const OutputGrid& grid, const std::string& quantity, int spatial_count) {
    const auto labels = grid.space_labels_of(quantity);
    if (spatial_count < 1 || spatial_count > static_cast<int>(labels.size())) {
        throw InvalidArgument("quantity '" + quantity + "' has " + std::to_string(labels.size()) +
                              " spatial points, cannot select " + std::to_string(spatial_count));
    }
    const std::set<std::string> selected(labels.begin(), labels.begin() + spatial_count);
    DataSubset subset;
    subset.description = quantity + ":spatial=" + std::to_string(spatial_count);
    for (int i = 0; i < grid.size(); ++i) {
        const auto& c = grid.coord(i);
        if (c.quantity == quantity && selected.count(c.space_label)) subset.indices.push_back(i);
    }
    return subset;
}

DataSubset full_subset(const OutputGrid& grid) {
    DataSubset subset;
    subset.description = "full";
    subset.indices.resize(static_cast<std::size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) subset.indices[static_cast<std::size_t>(i)] = i;
    return subset;
}

}  // namespace apcbms
