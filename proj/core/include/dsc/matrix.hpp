#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dsc {

/// Column-major feature table. Every column has rows() entries.
struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    [[nodiscard]] std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return columns.size(); }

    /// Index of the named column, or cols() when absent.
    [[nodiscard]] std::size_t index_of(const std::string& name) const noexcept
    {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) {
                return i;
            }
        }
        return cols();
    }

    /// Rows selected by `indices`, in that order.
    [[nodiscard]] FeatureMatrix take(const std::vector<std::size_t>& indices) const
    {
        FeatureMatrix out;
        out.names = names;
        out.columns.resize(columns.size());
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out.columns[c].reserve(indices.size());
            for (auto r : indices) {
                out.columns[c].push_back(columns[c][r]);
            }
        }
        return out;
    }
};

} // namespace dsc
