#include "emgpr/matrix.hpp"

#include "emgpr/error.hpp"

namespace emgpr {

void Matrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) {
        cols_ = values.size();
    }
    if (values.size() != cols_) {
        throw ShapeError("row of width " + std::to_string(values.size()) +
                         " appended to matrix of width " + std::to_string(cols_));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

} // namespace emgpr
