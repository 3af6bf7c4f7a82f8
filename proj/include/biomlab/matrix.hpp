#pragma once

#include <string>
#include <vector>

#include "biomlab/common.hpp"

namespace biomlab {

// Dense numeric table, NaN = missing. Rows are observations (participants).
struct Matrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> col_names;
    std::vector<std::vector<double>> data;

    std::size_t n_rows() const { return data.size(); }
    std::size_t n_cols() const { return col_names.size(); }

    Matrix select_rows(const std::vector<std::size_t>& indices) const {
        Matrix out;
        out.col_names = col_names;
        out.row_ids.reserve(indices.size());
        out.data.reserve(indices.size());
        for (std::size_t i : indices) {
            if (i < row_ids.size()) out.row_ids.push_back(row_ids[i]);
            out.data.push_back(data[i]);
        }
        return out;
    }
};

}  // namespace biomlab
