#pragma once
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace umbra {

struct TensorNode;

// Value-semantic handle onto a node of a reverse-mode tape. Ops (ops.hpp)
// build fresh nodes per call; parameters are leaf nodes reused across
// graphs, so their gradients accumulate until zero_grad().
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const;
    std::size_t size() const;
    int dim(int i) const { return shape()[(std::size_t)i]; }

    std::vector<double>& value();
    const std::vector<double>& value() const;
    double item() const;  // scalar tensors only

    bool requires_grad() const;
    // Gradient buffer (zeros until a backward pass reaches this node).
    const std::vector<double>& grad() const;
    void zero_grad();

    // Reverse-mode sweep from a scalar. Seeds d(this)/d(this) = 1.
    void backward();

    std::shared_ptr<TensorNode> node() const { return node_; }
    explicit Tensor(std::shared_ptr<TensorNode> n) : node_(std::move(n)) {}

  private:
    std::shared_ptr<TensorNode> node_;
};

struct TensorNode {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;  // sized lazily
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    // Reads this node's grad and accumulates into the parents'.
    std::function<void(TensorNode&)> backprop;

    std::size_t numel() const { return value.size(); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

std::size_t shape_numel(const std::vector<int>& shape);

struct TensorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace umbra
