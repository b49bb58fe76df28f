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

#include "sgdst/autograd.h"

#include <cmath>
#include <stdexcept>

namespace sgdst {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_shape(bool ok, const char* op) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Parameter& ParameterStore::add(const std::string& name, Matrix value) {
  if (index_.count(name)) {
    throw std::invalid_argument("duplicate parameter " + name);
  }
  index_[name] = params_.size();
  params_.push_back({name, std::move(value), Matrix()});
  return params_.back();
}

Parameter& ParameterStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter " + name);
  return params_[it->second];
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter " + name);
  return params_[it->second];
}

bool ParameterStore::contains(const std::string& name) const {
  return index_.count(name) > 0;
}

long ParameterStore::num_scalars() const {
  long n = 0;
  for (const Parameter& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (Parameter& p : params_) {
    p.grad.setZero(p.value.rows(), p.value.cols());
  }
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return {it->second};
  Node n;
  n.value = p.value;
  n.needs_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_[&p] = id;
  return {id};
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.size() != 1) throw std::invalid_argument("not a scalar");
  return m(0, 0);
}

Var Tape::record(Matrix value, const std::vector<Var>& inputs, Backward fn) {
  Node n;
  n.value = std::move(value);
  for (Var v : inputs) n.needs_grad = n.needs_grad || nodes_.at(v.id).needs_grad;
  if (n.needs_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[v.id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var loss) {
  if (value(loss).size() != 1) throw std::invalid_argument("loss not scalar");
  if (!nodes_[loss.id].needs_grad) return;
  nodes_[loss.id].grad = Matrix::Ones(1, 1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.backward) {
      // Move the gradient out so the callback may grow nodes_ safely.
      Matrix g = std::move(n.grad);
      Backward fn = std::move(n.backward);
      fn(*this, g);
      nodes_[i].grad.resize(0, 0);
    } else if (n.param) {
      if (n.param->grad.size() == 0) {
        n.param->grad = n.grad;
      } else {
        n.param->grad += n.grad;
      }
    }
  }
}

Var matmul(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  check_shape(A.cols() == B.rows(), "matmul");
  return t.record(A * B, {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate(a, g * t.value(b).transpose());
    if (t.needs_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
  });
}

Var matmul_nt(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  check_shape(A.cols() == B.cols(), "matmul_nt");
  return t.record(A * B.transpose(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate(a, g * t.value(b));
    if (t.needs_grad(b)) t.accumulate(b, g.transpose() * t.value(a));
  });
}

Var linear(Tape& t, Var x, Var w, Var b) {
  const Matrix& X = t.value(x);
  const Matrix& W = t.value(w);
  const Matrix& B = t.value(b);
  check_shape(X.cols() == W.cols() && B.rows() == 1 && B.cols() == W.rows(),
              "linear");
  Matrix y = X * W.transpose();
  y.rowwise() += B.row(0);
  return t.record(std::move(y), {x, w, b}, [x, w, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(x)) t.accumulate(x, g * t.value(w));
    if (t.needs_grad(w)) t.accumulate(w, g.transpose() * t.value(x));
    if (t.needs_grad(b)) t.accumulate(b, g.colwise().sum());
  });
}

Var add(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  check_shape(A.rows() == B.rows() && A.cols() == B.cols(), "add");
  return t.record(A + B, {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var add_row(Tape& t, Var a, Var row) {
  const Matrix& A = t.value(a);
  const Matrix& R = t.value(row);
  check_shape(R.rows() == 1 && R.cols() == A.cols(), "add_row");
  Matrix y = A;
  y.rowwise() += R.row(0);
  return t.record(std::move(y), {a, row}, [a, row](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.needs_grad(row)) t.accumulate(row, g.colwise().sum());
  });
}

Var scale(Tape& t, Var a, double s) {
  return t.record(t.value(a) * s, {a},
                  [a, s](Tape& t, const Matrix& g) { t.accumulate(a, g * s); });
}

Var gelu(Tape& t, Var a) {
  Matrix y = t.value(a).unaryExpr([](double x) { return gelu_value(x); });
  return t.record(std::move(y), {a}, [a](Tape& t, const Matrix& g) {
    Matrix d = t.value(a).unaryExpr([](double x) {
      return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) +
             x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
    });
    t.accumulate(a, g.cwiseProduct(d));
  });
}

Var softmax_rows(Tape& t, Var a) {
  Matrix y = t.value(a);
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    double m = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  Matrix probs = y;
  return t.record(std::move(y), {a}, [a, probs](Tape& t, const Matrix& g) {
    Eigen::VectorXd dot = g.cwiseProduct(probs).rowwise().sum();
    Matrix d = g;
    d.colwise() -= dot;
    t.accumulate(a, probs.cwiseProduct(d));
  });
}

Var layer_norm(Tape& t, Var x, Var gamma, Var beta, double eps) {
  const Matrix& X = t.value(x);
  const Matrix& G = t.value(gamma);
  const Matrix& B = t.value(beta);
  check_shape(G.rows() == 1 && G.cols() == X.cols() && B.rows() == 1 &&
                  B.cols() == X.cols(),
              "layer_norm");
  const double n = static_cast<double>(X.cols());
  Eigen::VectorXd mean = X.rowwise().mean();
  Matrix xhat = X.colwise() - mean;
  Eigen::VectorXd inv_std(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    double var = xhat.row(r).squaredNorm() / n;
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) *= inv_std(r);
  }
  Matrix y = xhat.array().rowwise() * G.row(0).array();
  y.rowwise() += B.row(0);
  return t.record(std::move(y), {x, gamma, beta},
                  [x, gamma, beta, xhat, inv_std, n](Tape& t, const Matrix& g) {
                    if (t.needs_grad(gamma)) {
                      t.accumulate(gamma, g.cwiseProduct(xhat).colwise().sum());
                    }
                    if (t.needs_grad(beta)) t.accumulate(beta, g.colwise().sum());
                    if (!t.needs_grad(x)) return;
                    Matrix dxhat =
                        g.array().rowwise() * t.value(gamma).row(0).array();
                    Eigen::VectorXd m1 = dxhat.rowwise().sum() / n;
                    Eigen::VectorXd m2 =
                        dxhat.cwiseProduct(xhat).rowwise().sum() / n;
                    Matrix dx = dxhat;
                    dx.colwise() -= m1;
                    dx.array() -= xhat.array().colwise() * m2.array();
                    dx = dx.array().colwise() * inv_std.array();
                    t.accumulate(x, dx);
                  });
}

Var gather_rows(Tape& t, Var a, const std::vector<int>& rows) {
  const Matrix& A = t.value(a);
  Matrix y(rows.size(), A.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= A.rows()) {
      throw std::out_of_range("gather_rows: index " + std::to_string(rows[i]) +
                              " outside [0, " + std::to_string(A.rows()) + ")");
    }
    y.row(i) = A.row(rows[i]);
  }
  return t.record(std::move(y), {a}, [a, rows](Tape& t, const Matrix& g) {
    const Matrix& A = t.value(a);
    Matrix d = Matrix::Zero(A.rows(), A.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) d.row(rows[i]) += g.row(i);
    t.accumulate(a, d);
  });
}

Var slice_cols(Tape& t, Var a, int begin, int count) {
  const Matrix& A = t.value(a);
  check_shape(begin >= 0 && count >= 0 && begin + count <= A.cols(),
              "slice_cols");
  return t.record(A.middleCols(begin, count), {a},
                  [a, begin, count](Tape& t, const Matrix& g) {
                    const Matrix& A = t.value(a);
                    Matrix d = Matrix::Zero(A.rows(), A.cols());
                    d.middleCols(begin, count) = g;
                    t.accumulate(a, d);
                  });
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Eigen::Index rows = t.value(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    check_shape(t.value(p).rows() == rows, "concat_cols");
    cols += t.value(p).cols();
  }
  Matrix y(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    y.middleCols(at, t.value(p).cols()) = t.value(p);
    at += t.value(p).cols();
  }
  return t.record(std::move(y), parts, [parts](Tape& t, const Matrix& g) {
    Eigen::Index at = 0;
    for (Var p : parts) {
      Eigen::Index c = t.value(p).cols();
      if (t.needs_grad(p)) t.accumulate(p, g.middleCols(at, c));
      at += c;
    }
  });
}

Var reshape(Tape& t, Var a, int rows, int cols) {
  const Matrix& A = t.value(a);
  check_shape(A.size() == static_cast<Eigen::Index>(rows) * cols, "reshape");
  const Eigen::Index src_cols = A.cols();
  Matrix y(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Eigen::Index flat = static_cast<Eigen::Index>(r) * cols + c;
      y(r, c) = A(flat / src_cols, flat % src_cols);
    }
  }
  return t.record(std::move(y), {a},
                  [a, rows, cols, src_cols](Tape& t, const Matrix& g) {
                    const Matrix& A = t.value(a);
                    Matrix d(A.rows(), A.cols());
                    for (int r = 0; r < rows; ++r) {
                      for (int c = 0; c < cols; ++c) {
                        Eigen::Index flat =
                            static_cast<Eigen::Index>(r) * cols + c;
                        d(flat / src_cols, flat % src_cols) = g(r, c);
                      }
                    }
                    t.accumulate(a, d);
                  });
}

Var dropout(Tape& t, Var a, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return a;
  if (p >= 1.0) throw std::invalid_argument("dropout probability must be < 1");
  const Matrix& A = t.value(a);
  std::bernoulli_distribution keep(1.0 - p);
  Matrix mask(A.rows(), A.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
  }
  return t.record(A.cwiseProduct(mask), {a}, [a, mask](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(mask));
  });
}

Var softmax_cross_entropy_sum(Tape& t, Var logits,
                              const std::vector<int>& targets) {
  const Matrix& L = t.value(logits);
  check_shape(static_cast<Eigen::Index>(targets.size()) == L.rows(),
              "softmax_cross_entropy_sum");
  Matrix probs = Matrix::Zero(L.rows(), L.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < L.rows(); ++r) {
    int target = targets[r];
    if (target < 0) continue;
    if (target >= L.cols()) throw std::out_of_range("class index out of range");
    double m = L.row(r).maxCoeff();
    double z = (L.row(r).array() - m).exp().sum();
    probs.row(r) = (L.row(r).array() - m).exp() / z;
    loss += std::log(z) + m - L(r, target);
  }
  Matrix value(1, 1);
  value(0, 0) = loss;
  return t.record(std::move(value), {logits},
                  [logits, probs, targets](Tape& t, const Matrix& g) {
                    Matrix d = probs;
                    for (std::size_t r = 0; r < targets.size(); ++r) {
                      if (targets[r] >= 0) d(r, targets[r]) -= 1.0;
                    }
                    t.accumulate(logits, d * g(0, 0));
                  });
}

Var sigmoid_cross_entropy_sum(Tape& t, Var logits,
                              const std::vector<int>& targets) {
  const Matrix& L = t.value(logits);
  check_shape(static_cast<Eigen::Index>(targets.size()) == L.size(),
              "sigmoid_cross_entropy_sum");
  double loss = 0.0;
  for (Eigen::Index i = 0; i < L.size(); ++i) {
    int target = targets[i];
    if (target < 0) continue;
    double x = L.data()[i];
    loss += target ? softplus(-x) : softplus(x);
  }
  Matrix value(1, 1);
  value(0, 0) = loss;
  return t.record(std::move(value), {logits},
                  [logits, targets](Tape& t, const Matrix& g) {
                    const Matrix& L = t.value(logits);
                    Matrix d = Matrix::Zero(L.rows(), L.cols());
                    for (Eigen::Index i = 0; i < L.size(); ++i) {
                      if (targets[i] < 0) continue;
                      d.data()[i] = sigmoid(L.data()[i]) - targets[i];
                    }
                    t.accumulate(logits, d * g(0, 0));
                  });
}

}  // namespace sgdst
