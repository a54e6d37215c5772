/*
 * Copyright 2026 The tabsev Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tabsev/ops.hpp"

#include "tabsev/error.hpp"
#include "tabsev/kernels.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace tabsev {
namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kShapeMismatch,
                std::string(op) + ": " + shape_of(a) + " vs " + shape_of(b));
  }
}

void require_finite(const Matrix& m, const char* op) {
  if (!m.allFinite()) throw Error(ErrorKind::kNonFiniteInput, std::string(op) + ": non-finite input");
}

Matrix transpose_if(const Matrix& m, bool flip) { return flip ? Matrix(m.transpose()) : m; }

// Backward of a row-wise softmax given its output y.
Matrix softmax_rows_backward(const Matrix& y, const Matrix& g) {
  const Vector dots = (g.array() * y.array()).rowwise().sum();
  return (y.array() * (g.colwise() - dots).array()).matrix();
}

// Backward of a row-wise sparsemax: on the support S the Jacobian is
// I - 11^T / |S|, elsewhere zero.
Matrix sparsemax_rows_backward(const Matrix& y, const Matrix& g) {
  Matrix out = Matrix::Zero(y.rows(), y.cols());
  for (Index r = 0; r < y.rows(); ++r) {
    double total = 0.0;
    int support = 0;
    for (Index c = 0; c < y.cols(); ++c) {
      if (y(r, c) > 0.0) {
        total += g(r, c);
        ++support;
      }
    }
    const double avg = support > 0 ? total / support : 0.0;
    for (Index c = 0; c < y.cols(); ++c) {
      if (y(r, c) > 0.0) out(r, c) = g(r, c) - avg;
    }
  }
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "matmul: " + shape_of(a.value()) + " * " + shape_of(b.value()));
  }
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() == bv.rows() && av.cols() == bv.cols()) {
    return t.record(av + bv, {a, b}, [ia, ib](Tape& t, const Matrix& g) {
      t.accumulate(ia, g);
      t.accumulate(ib, g);
    });
  }
  if (bv.rows() == 1 && bv.cols() == av.cols()) {
    Matrix out = av.rowwise() + bv.row(0);
    return t.record(std::move(out), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
      t.accumulate(ia, g);
      if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
    });
  }
  throw Error(ErrorKind::kShapeMismatch, "add: " + shape_of(av) + " + " + shape_of(bv));
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    if (t.requires_grad(ib)) t.accumulate(ib, -g);
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  Matrix out = a.value().cwiseProduct(b.value());
  return t.record(std::move(out), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
    if (t.requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
  });
}

Var affine(Var a, double scale, double shift) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = (scale * a.value().array() + shift).matrix();
  return t.record(std::move(out), {a}, [ia, scale](Tape& t, const Matrix& g) { t.accumulate(ia, scale * g); });
}

Var relu(Var x) {
  Tape& t = *x.tape();
  const std::size_t ix = x.id();
  return t.record(x.value().cwiseMax(0.0), {x}, [ix](Tape& t, const Matrix& g) {
    t.accumulate(ix, (t.value(ix).array() > 0.0).select(g, 0.0));
  });
}

Var sigmoid(Var x) {
  Tape& t = *x.tape();
  const std::size_t ix = x.id();
  auto s = std::make_shared<Matrix>(kernels::sigmoid(x.value()));
  return t.record(Matrix(*s), {x}, [ix, s](Tape& t, const Matrix& g) {
    t.accumulate(ix, (g.array() * s->array() * (1.0 - s->array())).matrix());
  });
}

Var glu(Var x) {
  Tape& t = *x.tape();
  const std::size_t ix = x.id();
  const Matrix s = kernels::sigmoid(x.value());
  Matrix y = x.value().cwiseProduct(s);
  return t.record(std::move(y), {x}, [ix](Tape& t, const Matrix& g) {
    const Matrix& xv = t.value(ix);
    const Matrix s = kernels::sigmoid(xv);
    t.accumulate(ix, (g.array() * (s.array() + xv.array() * s.array() * (1.0 - s.array()))).matrix());
  });
}

Var concat(std::span<const Var> parts, int axis) {
  if (parts.empty()) throw Error(ErrorKind::kShapeMismatch, "concat: no inputs");
  if (axis != 0 && axis != 1) throw Error(ErrorKind::kShapeMismatch, "concat: axis must be 0 or 1");
  Tape& t = *parts.front().tape();
  Index rows = 0, cols = 0;
  std::vector<Index> extents;
  for (const Var& p : parts) {
    if (axis == 1) {
      if (p.rows() != parts.front().rows()) throw Error(ErrorKind::kShapeMismatch, "concat: row counts differ");
      cols += p.cols();
      extents.push_back(p.cols());
    } else {
      if (p.cols() != parts.front().cols()) throw Error(ErrorKind::kShapeMismatch, "concat: column counts differ");
      rows += p.rows();
      extents.push_back(p.rows());
    }
  }
  if (axis == 1) rows = parts.front().rows();
  else cols = parts.front().cols();

  Matrix out(rows, cols);
  Index offset = 0;
  for (const Var& p : parts) {
    if (axis == 1) out.middleCols(offset, p.cols()) = p.value();
    else out.middleRows(offset, p.rows()) = p.value();
    offset += axis == 1 ? p.cols() : p.rows();
  }
  std::vector<std::size_t> ids;
  for (const Var& p : parts) ids.push_back(p.id());
  return t.record(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                  [ids, extents, axis](Tape& t, const Matrix& g) {
                    Index offset = 0;
                    for (std::size_t i = 0; i < ids.size(); ++i) {
                      if (t.requires_grad(ids[i])) {
                        if (axis == 1) t.accumulate(ids[i], g.middleCols(offset, extents[i]));
                        else t.accumulate(ids[i], g.middleRows(offset, extents[i]));
                      }
                      offset += extents[i];
                    }
                  });
}

Var concat(std::initializer_list<Var> parts, int axis) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

Var reshape(Var x, Index rows, Index cols) {
  if (rows * cols != x.value().size()) {
    throw Error(ErrorKind::kShapeMismatch,
                "reshape: " + shape_of(x.value()) + " -> " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  Tape& t = *x.tape();
  const std::size_t ix = x.id();
  const Index in_rows = x.rows(), in_cols = x.cols();
  Matrix out = Eigen::Map<const Matrix>(x.value().data(), rows, cols);
  return t.record(std::move(out), {x}, [ix, in_rows, in_cols](Tape& t, const Matrix& g) {
    t.accumulate(ix, Eigen::Map<const Matrix>(g.data(), in_rows, in_cols));
  });
}

Var flatten(Var x, Index groups) {
  if (groups <= 0 || x.rows() % groups != 0) {
    throw Error(ErrorKind::kShapeMismatch, "flatten: " + std::to_string(x.rows()) + " rows not divisible into " +
                                               std::to_string(groups) + " groups");
  }
  return reshape(x, groups, x.value().size() / groups);
}

Var slice_cols(Var x, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > x.cols()) {
    throw Error(ErrorKind::kIndexOutOfRange, "slice_cols: [" + std::to_string(start) + ", " +
                                                 std::to_string(start + count) + ") of " + std::to_string(x.cols()));
  }
  Tape& t = *x.tape();
  const std::size_t ix = x.id();
  const Index rows = x.rows(), cols = x.cols();
  return t.record(x.value().middleCols(start, count), {x}, [ix, rows, cols, start, count](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(rows, cols);
    full.middleCols(start, count) = g;
    t.accumulate(ix, full);
  });
}

Var embedding_lookup(Var table, std::span<const int> codes) {
  const Matrix& tv = table.value();
  Matrix out(static_cast<Index>(codes.size()), tv.cols());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] < 0 || codes[i] >= tv.rows()) {
      throw Error(ErrorKind::kIndexOutOfRange,
                  "embedding_lookup: code " + std::to_string(codes[i]) + " outside table of " + std::to_string(tv.rows()));
    }
    out.row(static_cast<Index>(i)) = tv.row(codes[i]);
  }
  Tape& t = *table.tape();
  const std::size_t it = table.id();
  const Index rows = tv.rows(), cols = tv.cols();
  std::vector<int> kept(codes.begin(), codes.end());
  return t.record(std::move(out), {table}, [it, rows, cols, kept = std::move(kept)](Tape& t, const Matrix& g) {
    Matrix dt = Matrix::Zero(rows, cols);
    for (std::size_t i = 0; i < kept.size(); ++i) dt.row(kept[i]) += g.row(static_cast<Index>(i));
    t.accumulate(it, dt);
  });
}

Var softmax(Var z, int axis) {
  require_finite(z.value(), "softmax");
  const bool flip = axis == 0;
  Matrix y = transpose_if(kernels::softmax_rows(transpose_if(z.value(), flip)), flip);
  Tape& t = *z.tape();
  const std::size_t iz = z.id();
  auto y_copy = std::make_shared<Matrix>(y);
  return t.record(std::move(y), {z}, [iz, y_copy, flip](Tape& t, const Matrix& g) {
    t.accumulate(iz, transpose_if(softmax_rows_backward(transpose_if(*y_copy, flip), transpose_if(g, flip)), flip));
  });
}

Var sparsemax(Var z, int axis) {
  require_finite(z.value(), "sparsemax");
  const bool flip = axis == 0;
  Matrix y = transpose_if(kernels::sparsemax_rows(transpose_if(z.value(), flip)), flip);
  Tape& t = *z.tape();
  const std::size_t iz = z.id();
  auto y_copy = std::make_shared<Matrix>(y);
  return t.record(std::move(y), {z}, [iz, y_copy, flip](Tape& t, const Matrix& g) {
    t.accumulate(iz, transpose_if(sparsemax_rows_backward(transpose_if(*y_copy, flip), transpose_if(g, flip)), flip));
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Matrix& xv = x.value();
  const Index n = xv.cols();
  if (n < 1) throw Error(ErrorKind::kShapeMismatch, "layer_norm: empty feature axis");
  if (gamma.rows() != 1 || gamma.cols() != n || beta.rows() != 1 || beta.cols() != n) {
    throw Error(ErrorKind::kShapeMismatch, "layer_norm: gamma/beta must be 1x" + std::to_string(n));
  }
  const Vector mu = xv.rowwise().mean();
  const Matrix centered = xv.colwise() - mu;
  const Vector var = centered.array().square().rowwise().mean();
  const Vector inv = (var.array() + eps).rsqrt();
  auto xhat = std::make_shared<Matrix>(centered.array().colwise() * inv.array());
  Matrix out = (xhat->array().rowwise() * gamma.value().row(0).array()).rowwise() + beta.value().row(0).array();

  Tape& t = *x.tape();
  const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
  return t.record(std::move(out), {x, gamma, beta}, [ix, ig, ib, xhat, inv, n](Tape& t, const Matrix& g) {
    const Matrix& xh = *xhat;
    if (t.requires_grad(ig)) t.accumulate(ig, g.cwiseProduct(xh).colwise().sum());
    if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
    if (t.requires_grad(ix)) {
      const Matrix dxhat = g.array().rowwise() * t.value(ig).row(0).array();
      const Vector sum_d = dxhat.rowwise().sum();
      const Vector sum_dx = dxhat.cwiseProduct(xh).rowwise().sum();
      Matrix dx = (static_cast<double>(n) * dxhat.array() - (xh.array().colwise() * sum_dx.array())).colwise() -
                  sum_d.array();
      dx = dx.array().colwise() * (inv.array() / static_cast<double>(n));
      t.accumulate(ix, dx);
    }
  });
}

Var batch_norm(Var x, Var gamma, Var beta, NormState state, Mode mode) {
  const Matrix& xv = x.value();
  const Index d = xv.cols();
  const Index m = xv.rows();
  if (gamma.cols() != d || beta.cols() != d || state.running_mean.cols() != d || state.running_var.cols() != d) {
    throw Error(ErrorKind::kShapeMismatch, "batch_norm: parameter width differs from " + std::to_string(d));
  }
  Tape& t = *x.tape();
  const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
  const RowVector g_row = gamma.value().row(0);
  const RowVector b_row = beta.value().row(0);

  if (mode == Mode::kInfer) {
    const RowVector inv = (state.running_var.row(0).array() + state.eps).rsqrt();
    auto xhat = std::make_shared<Matrix>((xv.rowwise() - state.running_mean.row(0)).array().rowwise() * inv.array());
    Matrix out = (xhat->array().rowwise() * g_row.array()).rowwise() + b_row.array();
    return t.record(std::move(out), {x, gamma, beta}, [ix, ig, ib, xhat, inv](Tape& t, const Matrix& g) {
      if (t.requires_grad(ig)) t.accumulate(ig, g.cwiseProduct(*xhat).colwise().sum());
      if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
      if (t.requires_grad(ix)) {
        t.accumulate(ix, g.array().rowwise() * (t.value(ig).row(0).array() * inv.array()));
      }
    });
  }

  if (m < 1) throw Error(ErrorKind::kShapeMismatch, "batch_norm: empty batch");
  const RowVector mu = xv.colwise().mean();
  const Matrix centered = xv.rowwise() - mu;
  const RowVector var = centered.array().square().colwise().mean();
  const RowVector inv = (var.array() + state.eps).rsqrt();
  auto xhat = std::make_shared<Matrix>(centered.array().rowwise() * inv.array());
  Matrix out = (xhat->array().rowwise() * g_row.array()).rowwise() + b_row.array();

  state.running_mean = state.momentum * state.running_mean + (1.0 - state.momentum) * mu;
  state.running_var = state.momentum * state.running_var + (1.0 - state.momentum) * var;

  return t.record(std::move(out), {x, gamma, beta}, [ix, ig, ib, xhat, inv, m](Tape& t, const Matrix& g) {
    const Matrix& xh = *xhat;
    if (t.requires_grad(ig)) t.accumulate(ig, g.cwiseProduct(xh).colwise().sum());
    if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
    if (t.requires_grad(ix)) {
      const Matrix dxhat = g.array().rowwise() * t.value(ig).row(0).array();
      const RowVector sum_d = dxhat.colwise().sum();
      const RowVector sum_dx = dxhat.cwiseProduct(xh).colwise().sum();
      Matrix dx = (static_cast<double>(m) * dxhat.array() - (xh.array().rowwise() * sum_dx.array())).rowwise() -
                  sum_d.array();
      dx = dx.array().rowwise() * (inv.array() / static_cast<double>(m));
      t.accumulate(ix, dx);
    }
  });
}

Var dropout(Var x, double rate, Mode mode, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw Error(ErrorKind::kConfigMismatch, "dropout rate must lie in [0, 1)");
  if (mode == Mode::kInfer || rate == 0.0) return x;
  Matrix mask(x.rows(), x.cols());
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.bernoulli(1.0 - rate) ? 1.0 : 0.0;
  const double keep_scale = 1.0 / (1.0 - rate);
  Tape& t = *x.tape();
  Var m = t.constant(mask * keep_scale);
  return mul(x, m);
}

Var scaled_dot_attention(Var q, Var k, Var v, Index groups, Index heads, Matrix* weights) {
  const Matrix& qv = q.value();
  const Matrix& kv = k.value();
  const Matrix& vv = v.value();
  if (qv.rows() != kv.rows() || qv.rows() != vv.rows() || qv.cols() != kv.cols()) {
    throw Error(ErrorKind::kShapeMismatch, "attention: q " + shape_of(qv) + ", k " + shape_of(kv) + ", v " +
                                               shape_of(vv));
  }
  if (heads < 1 || qv.cols() % heads != 0 || vv.cols() % heads != 0) {
    throw Error(ErrorKind::kHeadDivisibility,
                "attention: widths " + std::to_string(qv.cols()) + "/" + std::to_string(vv.cols()) +
                    " not divisible by " + std::to_string(heads) + " heads");
  }
  if (groups < 1 || qv.rows() % groups != 0) {
    throw Error(ErrorKind::kShapeMismatch, "attention: rows not divisible into groups");
  }
  const Index n = qv.rows() / groups;
  const Index dk = qv.cols() / heads;
  const Index dv = vv.cols() / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  auto attn = std::make_shared<Matrix>(groups * heads * n, n);
  Matrix out(qv.rows(), vv.cols());
  for (Index g = 0; g < groups; ++g) {
    for (Index h = 0; h < heads; ++h) {
      const Matrix scores = (qv.block(g * n, h * dk, n, dk) * kv.block(g * n, h * dk, n, dk).transpose()) * scale;
      const Matrix a = kernels::softmax_rows(scores);
      attn->block((g * heads + h) * n, 0, n, n) = a;
      out.block(g * n, h * dv, n, dv) = a * vv.block(g * n, h * dv, n, dv);
    }
  }
  if (weights) *weights = *attn;

  Tape& t = *q.tape();
  const std::size_t iq = q.id(), ik = k.id(), iv = v.id();
  return t.record(std::move(out), {q, k, v}, [=](Tape& t, const Matrix& grad) {
    const Matrix& qv = t.value(iq);
    const Matrix& kv = t.value(ik);
    const Matrix& vv = t.value(iv);
    Matrix dq = Matrix::Zero(qv.rows(), qv.cols());
    Matrix dk_m = Matrix::Zero(kv.rows(), kv.cols());
    Matrix dv_m = Matrix::Zero(vv.rows(), vv.cols());
    for (Index g = 0; g < groups; ++g) {
      for (Index h = 0; h < heads; ++h) {
        const auto a = attn->block((g * heads + h) * n, 0, n, n);
        const auto go = grad.block(g * n, h * dv, n, dv);
        const Matrix da = go * vv.block(g * n, h * dv, n, dv).transpose();
        dv_m.block(g * n, h * dv, n, dv) += a.transpose() * go;
        const Vector dots = (da.array() * a.array()).rowwise().sum();
        const Matrix ds = (a.array() * (da.colwise() - dots).array()).matrix() * scale;
        dq.block(g * n, h * dk, n, dk) += ds * kv.block(g * n, h * dk, n, dk);
        dk_m.block(g * n, h * dk, n, dk) += ds.transpose() * qv.block(g * n, h * dk, n, dk);
      }
    }
    t.accumulate(iq, dq);
    t.accumulate(ik, dk_m);
    t.accumulate(iv, dv_m);
  });
}

Var sum(Var x) {
  Tape& t = *x.tape();
  const std::size_t ix = x.id();
  const Index r = x.rows(), c = x.cols();
  return t.record(Matrix::Constant(1, 1, x.value().sum()), {x}, [ix, r, c](Tape& t, const Matrix& g) {
    t.accumulate(ix, Matrix::Constant(r, c, g(0, 0)));
  });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  return affine(sum(x), 1.0 / n, 0.0);
}

Var binary_cross_entropy(Var p, const Matrix& y) {
  require_same_shape(p.value(), y, "binary_cross_entropy");
  const Matrix pc = p.value().cwiseMax(kProbabilityClamp).cwiseMin(1.0 - kProbabilityClamp);
  const double n = static_cast<double>(pc.size());
  const double loss =
      -(y.array() * pc.array().log() + (1.0 - y.array()) * (1.0 - pc.array()).log()).sum() / n;
  Tape& t = *p.tape();
  const std::size_t ip = p.id();
  return t.record(Matrix::Constant(1, 1, loss), {p}, [ip, pc, y, n](Tape& t, const Matrix& g) {
    Matrix dp = ((-y.array() / pc.array()) + (1.0 - y.array()) / (1.0 - pc.array())) * (g(0, 0) / n);
    t.accumulate(ip, dp);
  });
}

Var categorical_cross_entropy(Var p, const Matrix& y) {
  require_same_shape(p.value(), y, "categorical_cross_entropy");
  const Vector sums = p.value().rowwise().sum();
  for (Index r = 0; r < sums.size(); ++r) {
    if (std::abs(sums(r) - 1.0) > 1e-6) {
      throw Error(ErrorKind::kNotNormalized, "row " + std::to_string(r) + " sums to " + std::to_string(sums(r)));
    }
  }
  const Matrix pc = p.value().cwiseMax(kProbabilityClamp).cwiseMin(1.0 - kProbabilityClamp);
  const double rows = static_cast<double>(pc.rows());
  const double loss = -(y.array() * pc.array().log()).sum() / rows;
  Tape& t = *p.tape();
  const std::size_t ip = p.id();
  return t.record(Matrix::Constant(1, 1, loss), {p}, [ip, pc, y, rows](Tape& t, const Matrix& g) {
    t.accumulate(ip, (-y.array() / pc.array()) * (g(0, 0) / rows));
  });
}

Var penalty(Tape& tape, ParamStore& store, PenaltyForm form, double lambda) {
  if (lambda < 0.0) throw Error(ErrorKind::kConfigMismatch, "penalty lambda must be >= 0");
  std::vector<Var> weights;
  double value = 0.0;
  for (const auto& p : store) {
    if (p.role != ParamRole::kWeight || !p.trainable) continue;
    weights.push_back(tape.parameter(store, p.name));
    value += form == PenaltyForm::kL1 ? p.value.cwiseAbs().sum() : 0.5 * p.value.squaredNorm();
  }
  std::vector<std::size_t> ids;
  for (const Var& w : weights) ids.push_back(w.id());
  return tape.record(Matrix::Constant(1, 1, lambda * value), weights, [ids, form, lambda](Tape& t, const Matrix& g) {
    for (std::size_t id : ids) {
      const Matrix& w = t.value(id);
      if (form == PenaltyForm::kL1) {
        t.accumulate(id, w.unaryExpr([](double x) { return double((x > 0.0) - (x < 0.0)); }) * (lambda * g(0, 0)));
      } else {
        t.accumulate(id, w * (lambda * g(0, 0)));
      }
    }
  });
}

}  // namespace tabsev
