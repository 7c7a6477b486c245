#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace mlbm {

// Dense row-major matrix of reals.
class Matrix {
public:
	Matrix() = default;
	Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
		: rows_(rows), cols_(cols), data_(rows * cols, fill) {}
	Matrix(std::initializer_list<std::initializer_list<double>> rows);

	std::size_t rows() const { return rows_; }
	std::size_t cols() const { return cols_; }

	double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
	double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

	const std::vector<double>& data() const { return data_; }

	Matrix transposed() const;

	static Matrix identity(std::size_t n);

	friend bool operator==(const Matrix&, const Matrix&) = default;

private:
	std::size_t rows_ = 0;
	std::size_t cols_ = 0;
	std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

} // namespace mlbm
