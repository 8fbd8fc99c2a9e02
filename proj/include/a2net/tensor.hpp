#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace a2net {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

// Dense row-major double tensor. A rank-0 shape holds a single scalar.
struct Tensor {
  Shape shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(Shape s, std::vector<double> v);

  static Tensor zeros(Shape s);
  static Tensor filled(Shape s, double value);
  static Tensor scalar(double value);

  std::size_t size() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }
  // Product of all leading dimensions; 1 for rank 0 and rank 1.
  std::size_t rows() const;
  // Size of the last axis; 1 for rank 0.
  std::size_t cols() const;

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  bool all_finite() const;
  void fill(double value);

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Named trainable tensor with a gradient buffer of identical shape.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string n, Tensor v);
  void zero_grad();
};

}  // namespace a2net
