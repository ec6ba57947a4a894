// Copyright 2026 The dvmaf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DVMAF_TENSOR_H_
#define DVMAF_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace dvmaf {

class Tape;

// Raised when an operation is algebraically valid but numerically
// undefined for the given values (division by exact zero, blank
// reference plane, non-finite feature).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Dense 2-D plane of doubles, row-major. Copies are cheap: storage is
// shared and treated as immutable once produced by an operation. A
// Tensor may carry a tape handle (node id), in which case gradients can
// be queried from the tape after Tape::Backward.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(int rows, int cols) { return Full(rows, cols, 0.0); }
  static Tensor Full(int rows, int cols, double value);
  static Tensor FromVector(int rows, int cols, std::vector<double> values);
  static Tensor Scalar(double value) { return Full(1, 1, value); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_ ? data_->size() : 0; }
  bool empty() const { return size() == 0; }

  double At(int r, int c) const { return (*data_)[ToIndex(r, c)]; }
  double ValueAt(std::size_t i) const { return (*data_)[i]; }
  const std::vector<double>& data() const { return *data_; }

  // Value of a 1x1 tensor. Throws for any other shape.
  double ScalarValue() const;

  // Write access for fixture construction and optimizer updates.
  // Detaches from shared storage; forbidden for on-tape tensors whose
  // values are frozen history.
  std::vector<double>& MutableData();

  bool on_tape() const { return tape_ != nullptr && node_ >= 0; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }
  bool requires_grad() const { return requires_grad_; }

  bool SameShape(const Tensor& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string ShapeString() const;

  // All entries finite?
  bool AllFinite() const;

 private:
  friend class Tape;

  std::size_t ToIndex(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::shared_ptr<std::vector<double>> data_;
  Tape* tape_ = nullptr;
  int node_ = -1;
  bool requires_grad_ = false;
};

// Tape-based reverse-mode differentiation. Operations involving at
// least one on-tape tensor append a node holding the backward rule;
// Backward() walks the nodes in reverse order, which is a valid reverse
// topological order because every node is recorded after its inputs.
//
// A tape and its tensors are confined to one thread. Independent frames
// may be processed on separate tapes in parallel; accumulating their
// gradients is the caller's reduction step.
class Tape {
 public:
  using BackwardFn = std::function<void(const std::vector<double>& out_grad, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers a leaf parameter. Returns a tensor sharing `value`'s
  // storage, bound to this tape and eligible for Grad() queries.
  Tensor Parameter(const Tensor& value);

  // Records an op node producing `values` with the given backward rule.
  // Used by the op library; not part of the public modelling surface.
  Tensor Emit(int rows, int cols, std::vector<double> values, BackwardFn backward);

  // Reverse pass from a 1x1 root. Recomputes all gradients from
  // scratch; nodes unreachable from the root keep zero gradients.
  void Backward(const Tensor& root);

  // Gradient of the last Backward() root w.r.t. `t`. Zeros if `t` was
  // not reached (or Backward has not run).
  Tensor Grad(const Tensor& t) const;

  // Gradient accumulation buffer for a node, allocated and zeroed on
  // first touch. Only meaningful inside backward rules.
  std::vector<double>& GradBuffer(int node);

  void Clear();
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    int rows = 0;
    int cols = 0;
    BackwardFn backward;  // null for leaves
  };

  int AddNode(int rows, int cols, BackwardFn backward);

  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
};

}  // namespace dvmaf

#endif  // DVMAF_TENSOR_H_
