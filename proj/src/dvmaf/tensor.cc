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

#include "dvmaf/tensor.h"

#include <cmath>
#include <utility>

namespace dvmaf {

Tensor Tensor::Full(int rows, int cols, double value) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("tensor: dimensions must be positive");
  }
  Tensor t;
  t.rows_ = rows;
  t.cols_ = cols;
  t.data_ = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(rows) * cols, value);
  return t;
}

Tensor Tensor::FromVector(int rows, int cols, std::vector<double> values) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("tensor: dimensions must be positive");
  }
  if (values.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("tensor: data length must equal rows*cols");
  }
  Tensor t;
  t.rows_ = rows;
  t.cols_ = cols;
  t.data_ = std::make_shared<std::vector<double>>(std::move(values));
  return t;
}

double Tensor::ScalarValue() const {
  if (rows_ != 1 || cols_ != 1) {
    throw std::invalid_argument("tensor: ScalarValue requires a 1x1 tensor, got " +
                                ShapeString());
  }
  return (*data_)[0];
}

std::vector<double>& Tensor::MutableData() {
  if (on_tape()) {
    throw std::logic_error("tensor: cannot mutate an on-tape tensor");
  }
  if (!data_) {
    throw std::logic_error("tensor: cannot mutate an empty tensor");
  }
  if (data_.use_count() > 1) {
    data_ = std::make_shared<std::vector<double>>(*data_);
  }
  return *data_;
}

std::string Tensor::ShapeString() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Tensor::AllFinite() const {
  if (!data_) return true;
  for (double v : *data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

int Tape::AddNode(int rows, int cols, BackwardFn backward) {
  nodes_.push_back(Node{rows, cols, std::move(backward)});
  return static_cast<int>(nodes_.size()) - 1;
}

Tensor Tape::Parameter(const Tensor& value) {
  if (value.empty()) {
    throw std::invalid_argument("tape: parameter tensor is empty");
  }
  if (value.on_tape()) {
    throw std::invalid_argument("tape: tensor is already registered on a tape");
  }
  Tensor t = value;
  t.tape_ = this;
  t.node_ = AddNode(value.rows(), value.cols(), nullptr);
  t.requires_grad_ = true;
  return t;
}

Tensor Tape::Emit(int rows, int cols, std::vector<double> values, BackwardFn backward) {
  Tensor t = Tensor::FromVector(rows, cols, std::move(values));
  t.tape_ = this;
  t.node_ = AddNode(rows, cols, std::move(backward));
  return t;
}

void Tape::Backward(const Tensor& root) {
  if (!root.on_tape() || root.tape() != this) {
    throw std::logic_error("tape: backward root is not on this tape");
  }
  if (root.rows() != 1 || root.cols() != 1) {
    throw std::invalid_argument("tape: backward root must be scalar (1x1), got " +
                                root.ShapeString());
  }
  grads_.clear();
  grads_.resize(nodes_.size());
  GradBuffer(root.node())[0] = 1.0;
  for (int id = root.node(); id >= 0; --id) {
    if (grads_[id].empty()) continue;  // unreachable from root
    if (nodes_[id].backward) nodes_[id].backward(grads_[id], *this);
  }
}

Tensor Tape::Grad(const Tensor& t) const {
  if (!t.on_tape() || t.tape() != this) {
    throw std::logic_error("tape: gradient queried for a tensor not on this tape");
  }
  const int id = t.node();
  if (id < static_cast<int>(grads_.size()) && !grads_[id].empty()) {
    return Tensor::FromVector(t.rows(), t.cols(), grads_[id]);
  }
  return Tensor::Zeros(t.rows(), t.cols());
}

std::vector<double>& Tape::GradBuffer(int node) {
  auto& buf = grads_[node];
  if (buf.empty()) {
    buf.assign(static_cast<std::size_t>(nodes_[node].rows) * nodes_[node].cols, 0.0);
  }
  return buf;
}

void Tape::Clear() {
  nodes_.clear();
  grads_.clear();
}

}  // namespace dvmaf
