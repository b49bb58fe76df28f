// Copyright 2026 The sgdst Authors.
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

// Minimal tape-based reverse-mode differentiation over dense double matrices.
//
// A Tape records every operation of one forward pass. backward() walks the
// tape in reverse and accumulates gradients into the Parameters that were
// read through Tape::param(). Tapes are single-use and not thread-safe.

#ifndef SGDST_AUTOGRAD_H_
#define SGDST_AUTOGRAD_H_

#include <functional>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace sgdst {

using Matrix = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // same shape as value once zero_grad() ran
};

// Named parameters in registration order.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Matrix value);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }
  long num_scalars() const;
  void zero_grad();

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  Var constant(Matrix value);
  // Leaf bound to `p`; repeated calls within one tape share the node.
  Var param(Parameter& p);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  double scalar(Var v) const;
  bool needs_grad(Var v) const { return nodes_.at(v.id).needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 for a 1x1 `loss` and accumulates parameter
  // gradients (adds to Parameter::grad).
  void backward(Var loss);

  // Internal: records a node computed from `inputs`.
  using Backward = std::function<void(Tape&, const Matrix& grad)>;
  Var record(Matrix value, const std::vector<Var>& inputs, Backward fn);
  // Adds `g` to the gradient of `v` if it needs one.
  void accumulate(Var v, const Matrix& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
  std::unordered_map<Parameter*, int> param_nodes_;
};

// a * b
Var matmul(Tape& t, Var a, Var b);
// a * b^T
Var matmul_nt(Tape& t, Var a, Var b);
// x * W^T + b with W stored (out, in) and b as a 1 x out row.
Var linear(Tape& t, Var x, Var w, Var b);
Var add(Tape& t, Var a, Var b);
Var add_row(Tape& t, Var a, Var row);
Var scale(Tape& t, Var a, double s);
Var gelu(Tape& t, Var a);
Var softmax_rows(Tape& t, Var a);
Var layer_norm(Tape& t, Var x, Var gamma, Var beta, double eps);
Var gather_rows(Tape& t, Var a, const std::vector<int>& rows);
Var slice_cols(Tape& t, Var a, int begin, int count);
Var concat_cols(Tape& t, const std::vector<Var>& parts);
// Row-major reshape: out(r, c) = flat(r * cols + c).
Var reshape(Tape& t, Var a, int rows, int cols);
// Inverted dropout; identity when p == 0.
Var dropout(Tape& t, Var a, double p, std::mt19937_64& rng);

// Sum over rows with target >= 0 of -log softmax(logits)[target].
Var softmax_cross_entropy_sum(Tape& t, Var logits,
                              const std::vector<int>& targets);
// Sum over entries with target >= 0 of the binary cross-entropy of
// sigmoid(logit). Entries are taken column-major from `logits`.
Var sigmoid_cross_entropy_sum(Tape& t, Var logits,
                              const std::vector<int>& targets);

double gelu_value(double x);
double sigmoid(double x);

}  // namespace sgdst

#endif  // SGDST_AUTOGRAD_H_
