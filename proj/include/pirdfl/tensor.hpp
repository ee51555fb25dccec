#pragma once
#include <cassert>
#include <numeric>
#include <vector>

namespace pirdfl {

/// Shaped contiguous 64-bit float buffer, row-major.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(count(shape), 0.0);
  }
  Tensor(std::vector<int> s, std::vector<double> data)
      : shape(std::move(s)), v(std::move(data)) {
    assert(static_cast<long>(v.size()) == count(shape));
  }

  static long count(const std::vector<int>& s) {
    long n = 1;
    for (int d : s) n *= d;
    return n;
  }

  long size() const { return static_cast<long>(v.size()); }
  int rows() const { return shape.size() == 2 ? shape[0] : 0; }
  int cols() const { return shape.size() == 2 ? shape[1] : 0; }

  double& operator()(int i, int j) { return v[static_cast<long>(i) * shape[1] + j]; }
  double operator()(int i, int j) const { return v[static_cast<long>(i) * shape[1] + j]; }
  double& operator[](long i) { return v[i]; }
  double operator[](long i) const { return v[i]; }

  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

}  // namespace pirdfl
