// Copyright 2026 The SGIR Authors.
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

#include "sgir/autodiff.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sgir/error.h"

namespace sgir {
namespace {

void CheckSameTape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw Error(ErrorCode::kInvalidArgument, "variables from different tapes");
  }
}

void RequireShape(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kShapeMismatch, what);
}

std::string Dims(const Tensor& t) { return ShapeString(t.shape()); }

constexpr double kSquashEps = 1e-6;

double StableSigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw Error(ErrorCode::kInvalidArgument, "empty Var");
  return tape_->value(id_);
}

Var Tape::Constant(Tensor value) { return Record(std::move(value), {}, {}); }

Var Tape::Parameter(ParamStore& store, const std::string& name) {
  if (auto it = param_nodes_.find(name); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  ParamStore::Entry& entry = store.MutableEntry(name);
  Node& node = nodes_.emplace_back();
  node.value = &entry.value;
  node.requires_grad = true;
  node.param = &entry;
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_[name] = id;
  return Var(this, id);
}

Var Tape::Record(Tensor value, std::span<const Var> parents,
                 BackwardFn backward) {
  if (consumed_) {
    throw Error(ErrorCode::kGraphConsumed, "tape already differentiated");
  }
  if (!value.AllFinite()) {
    throw Error(ErrorCode::kNonFinite,
                fmt::format("non-finite value in node {}", nodes_.size()));
  }
  bool requires_grad = false;
  for (const Var& p : parents) {
    if (p.tape() != this) {
      throw Error(ErrorCode::kInvalidArgument, "parent from another tape");
    }
    requires_grad = requires_grad || nodes_[p.id()].requires_grad;
  }
  Node& node = nodes_.emplace_back();
  node.owned = std::move(value);
  node.value = &node.owned;
  node.requires_grad = requires_grad && static_cast<bool>(backward);
  if (node.requires_grad) node.backward = std::move(backward);
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor& Tape::GradBuffer(int id) {
  Node& node = nodes_[id];
  if (node.param != nullptr) {
    node.param->has_grad = true;
    node.has_grad = true;
    return node.param->grad;
  }
  if (!node.has_grad) {
    node.grad = Tensor(node.value->shape());
    node.has_grad = true;
  }
  return node.grad;
}

void Tape::Backward(Var loss) {
  if (consumed_) {
    throw Error(ErrorCode::kGraphConsumed,
                "backward already ran on this tape; re-run the forward pass");
  }
  if (loss.tape() != this || loss.value().size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "loss must be a scalar on this tape");
  }
  consumed_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  GradBuffer(loss.id())[0] = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& node = nodes_[id];
    if (!node.has_grad || !node.backward || node.param != nullptr) continue;
    node.backward(*this, node.grad);
    node.grad = Tensor();
    node.backward = nullptr;
  }
}

Var MatMul(Var a, Var b) {
  CheckSameTape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  RequireShape(av.cols() == bv.rows(),
               fmt::format("MatMul {} x {}", Dims(av), Dims(bv)));
  Tensor out = Tensor::Matrix(av.rows(), bv.cols());
  out.matrix().noalias() = av.matrix() * bv.matrix();
  const int ia = a.id(), ib = b.id();
  return a.tape()->Record(std::move(out), {a, b},
                          [ia, ib](Tape& t, const Tensor& g) {
                            if (t.RequiresGrad(ia)) {
                              t.GradBuffer(ia).matrix().noalias() +=
                                  g.matrix() * t.value(ib).matrix().transpose();
                            }
                            if (t.RequiresGrad(ib)) {
                              t.GradBuffer(ib).matrix().noalias() +=
                                  t.value(ia).matrix().transpose() * g.matrix();
                            }
                          });
}

Var Linear(Var x, Var w, Var b) {
  CheckSameTape(x, w);
  CheckSameTape(x, b);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  RequireShape(xv.cols() == wv.rows() && bv.rows() == 1 &&
                   bv.cols() == wv.cols(),
               fmt::format("Linear x{} w{} b{}", Dims(xv), Dims(wv), Dims(bv)));
  Tensor out = Tensor::Matrix(xv.rows(), wv.cols());
  auto om = out.matrix();
  om.noalias() = xv.matrix() * wv.matrix();
  om.rowwise() += bv.matrix().row(0);
  const int ix = x.id(), iw = w.id(), ib = b.id();
  return x.tape()->Record(
      std::move(out), {x, w, b}, [ix, iw, ib](Tape& t, const Tensor& g) {
        if (t.RequiresGrad(ix)) {
          t.GradBuffer(ix).matrix().noalias() +=
              g.matrix() * t.value(iw).matrix().transpose();
        }
        if (t.RequiresGrad(iw)) {
          t.GradBuffer(iw).matrix().noalias() +=
              t.value(ix).matrix().transpose() * g.matrix();
        }
        if (t.RequiresGrad(ib)) {
          t.GradBuffer(ib).matrix().row(0) += g.matrix().colwise().sum();
        }
      });
}

Var LeakyRelu(Var x, double slope) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  auto& pattern = x.tape()->activation_pattern();
  pattern.reserve(pattern.size() + xv.size());
  for (std::int64_t i = 0; i < xv.size(); ++i) {
    const bool positive = xv[i] > 0.0;
    pattern.push_back(positive ? 1 : 0);
    out[i] = positive ? xv[i] : slope * xv[i];
  }
  const int ix = x.id();
  return x.tape()->Record(std::move(out), {x},
                          [ix, slope](Tape& t, const Tensor& g) {
                            const Tensor& in = t.value(ix);
                            Tensor& dx = t.GradBuffer(ix);
                            for (std::int64_t i = 0; i < in.size(); ++i) {
                              dx[i] += in[i] > 0.0 ? g[i] : slope * g[i];
                            }
                          });
}

Var Sigmoid(Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::int64_t i = 0; i < xv.size(); ++i) out[i] = StableSigmoid(xv[i]);
  const int ix = x.id();
  const int iy = static_cast<int>(x.tape()->num_nodes());
  return x.tape()->Record(std::move(out), {x},
                          [ix, iy](Tape& t, const Tensor& g) {
                            const Tensor& y = t.value(iy);
                            Tensor& dx = t.GradBuffer(ix);
                            for (std::int64_t i = 0; i < y.size(); ++i) {
                              dx[i] += g[i] * y[i] * (1.0 - y[i]);
                            }
                          });
}

Var GatherRows(Var table, std::span<const int> indices) {
  const Tensor& tv = table.value();
  const std::int64_t cols = tv.cols();
  Tensor out = Tensor::Matrix(static_cast<std::int64_t>(indices.size()), cols);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= tv.rows()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  fmt::format("row {} not in table of {} rows", indices[i],
                              tv.rows()));
    }
    std::copy_n(tv.raw() + indices[i] * cols, cols, out.raw() + i * cols);
  }
  const int it = table.id();
  std::vector<int> idx(indices.begin(), indices.end());
  return table.tape()->Record(
      std::move(out), {table},
      [it, idx = std::move(idx), cols](Tape& t, const Tensor& g) {
        Tensor& dt = t.GradBuffer(it);
        for (std::size_t i = 0; i < idx.size(); ++i) {
          double* dst = dt.raw() + idx[i] * cols;
          const double* src = g.raw() + i * cols;
          for (std::int64_t c = 0; c < cols; ++c) dst[c] += src[c];
        }
      });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "empty concat");
  Tape* tape = parts[0].tape();
  const std::int64_t rows = parts[0].rows();
  std::int64_t cols = 0;
  for (const Var& p : parts) {
    CheckSameTape(parts[0], p);
    RequireShape(p.rows() == rows, "ConcatCols row mismatch");
    cols += p.cols();
  }
  Tensor out = Tensor::Matrix(rows, cols);
  std::vector<int> ids;
  std::vector<std::int64_t> offsets;
  std::int64_t offset = 0;
  for (const Var& p : parts) {
    out.matrix().middleCols(offset, p.cols()) = p.value().matrix();
    ids.push_back(p.id());
    offsets.push_back(offset);
    offset += p.cols();
  }
  return tape->Record(
      std::move(out), parts, [ids, offsets](Tape& t, const Tensor& g) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!t.RequiresGrad(ids[k])) continue;
          Tensor& d = t.GradBuffer(ids[k]);
          d.matrix() += g.matrix().middleCols(offsets[k], d.cols());
        }
      });
}

Var ConcatCols(std::initializer_list<Var> parts) {
  return ConcatCols(std::span<const Var>(parts.begin(), parts.size()));
}

Var SliceCols(Var x, std::int64_t begin, std::int64_t count) {
  const Tensor& xv = x.value();
  RequireShape(begin >= 0 && count >= 0 && begin + count <= xv.cols(),
               fmt::format("SliceCols [{}, +{}) of {}", begin, count, Dims(xv)));
  Tensor out = Tensor::Matrix(xv.rows(), count);
  out.matrix() = xv.matrix().middleCols(begin, count);
  const int ix = x.id();
  return x.tape()->Record(std::move(out), {x},
                          [ix, begin, count](Tape& t, const Tensor& g) {
                            t.GradBuffer(ix).matrix().middleCols(begin, count) +=
                                g.matrix();
                          });
}

Var Reshape(Var x, std::int64_t rows, std::int64_t cols) {
  const Tensor& xv = x.value();
  RequireShape(rows * cols == xv.size(),
               fmt::format("Reshape {} to [{}, {}]", Dims(xv), rows, cols));
  const int ix = x.id();
  return x.tape()->Record(Tensor::Matrix(rows, cols, {xv.data().begin(),
                                                      xv.data().end()}),
                          {x}, [ix](Tape& t, const Tensor& g) {
                            Tensor& d = t.GradBuffer(ix);
                            for (std::int64_t i = 0; i < g.size(); ++i) {
                              d[i] += g[i];
                            }
                          });
}

Var MeanPoolObjects(Var subject_candidates, Var object_candidates,
                    std::span<const int> subject_index,
                    std::span<const int> object_index, Var previous) {
  CheckSameTape(subject_candidates, object_candidates);
  CheckSameTape(subject_candidates, previous);
  const Tensor& sc = subject_candidates.value();
  const Tensor& oc = object_candidates.value();
  const Tensor& prev = previous.value();
  const std::int64_t n_triplets = static_cast<std::int64_t>(subject_index.size());
  const std::int64_t n_objects = prev.rows();
  const std::int64_t dim = prev.cols();
  RequireShape(sc.rows() == n_triplets && oc.rows() == n_triplets &&
                   static_cast<std::int64_t>(object_index.size()) == n_triplets &&
                   sc.cols() == dim && oc.cols() == dim,
               "MeanPoolObjects shape mismatch");
  std::vector<int> counts(n_objects, 0);
  for (std::int64_t t = 0; t < n_triplets; ++t) {
    for (const int idx : {subject_index[t], object_index[t]}) {
      if (idx < 0 || idx >= n_objects) {
        throw Error(ErrorCode::kIndexOutOfRange, "pool index out of range");
      }
      ++counts[idx];
    }
  }
  Tensor out = Tensor::Matrix(n_objects, dim);
  auto om = out.matrix();
  for (std::int64_t t = 0; t < n_triplets; ++t) {
    om.row(subject_index[t]) += sc.matrix().row(t);
    om.row(object_index[t]) += oc.matrix().row(t);
  }
  for (std::int64_t n = 0; n < n_objects; ++n) {
    if (counts[n] == 0) {
      om.row(n) = prev.matrix().row(n);
    } else {
      om.row(n) /= static_cast<double>(counts[n]);
    }
  }
  const int is = subject_candidates.id(), io = object_candidates.id(),
            ip = previous.id();
  std::vector<int> s_idx(subject_index.begin(), subject_index.end());
  std::vector<int> o_idx(object_index.begin(), object_index.end());
  return subject_candidates.tape()->Record(
      std::move(out), {subject_candidates, object_candidates, previous},
      [is, io, ip, s_idx = std::move(s_idx), o_idx = std::move(o_idx),
       counts = std::move(counts)](Tape& t, const Tensor& g) {
        const auto gm = g.matrix();
        if (t.RequiresGrad(is)) {
          auto d = t.GradBuffer(is).matrix();
          for (std::size_t k = 0; k < s_idx.size(); ++k) {
            d.row(k) += gm.row(s_idx[k]) / static_cast<double>(counts[s_idx[k]]);
          }
        }
        if (t.RequiresGrad(io)) {
          auto d = t.GradBuffer(io).matrix();
          for (std::size_t k = 0; k < o_idx.size(); ++k) {
            d.row(k) += gm.row(o_idx[k]) / static_cast<double>(counts[o_idx[k]]);
          }
        }
        if (t.RequiresGrad(ip)) {
          auto d = t.GradBuffer(ip).matrix();
          for (std::size_t n = 0; n < counts.size(); ++n) {
            if (counts[n] == 0) d.row(n) += gm.row(n);
          }
        }
      });
}

Var BoxSquash(Var raw) {
  const Tensor& rv = raw.value();
  RequireShape(rv.cols() == 4, fmt::format("BoxSquash expects [N, 4], got {}",
                                           Dims(rv)));
  const std::int64_t n = rv.rows();
  // s holds the squashed activations, reused by the backward pass.
  Tensor s = Tensor::Matrix(n, 4);
  Tensor out = Tensor::Matrix(n, 4);
  for (std::int64_t r = 0; r < n; ++r) {
    for (int c = 0; c < 4; ++c) {
      s.at(r, c) = kSquashEps + (1.0 - 2.0 * kSquashEps) * StableSigmoid(rv.at(r, c));
    }
    const double x0 = s.at(r, 0), y0 = s.at(r, 1);
    out.at(r, 0) = x0;
    out.at(r, 1) = y0;
    out.at(r, 2) = x0 + s.at(r, 2) * (1.0 - x0);
    out.at(r, 3) = y0 + s.at(r, 3) * (1.0 - y0);
  }
  const int ir = raw.id();
  return raw.tape()->Record(
      std::move(out), {raw}, [ir, s = std::move(s)](Tape& t, const Tensor& g) {
        Tensor& d = t.GradBuffer(ir);
        auto deriv = [](double sv) {
          // ds/dz from s = e + (1 - 2e) * sigmoid(z).
          const double sig = (sv - kSquashEps) / (1.0 - 2.0 * kSquashEps);
          return (1.0 - 2.0 * kSquashEps) * sig * (1.0 - sig);
        };
        for (std::int64_t r = 0; r < s.rows(); ++r) {
          for (int axis = 0; axis < 2; ++axis) {
            const double lo = s.at(r, axis);
            const double ext = s.at(r, axis + 2);
            const double g_lo = g.at(r, axis);
            const double g_hi = g.at(r, axis + 2);
            d.at(r, axis) += (g_lo + g_hi * (1.0 - ext)) * deriv(lo);
            d.at(r, axis + 2) += g_hi * (1.0 - lo) * deriv(ext);
          }
        }
      });
}

Var SoftmaxCrossEntropy(Var logits, std::span<const int> targets) {
  const Tensor& lv = logits.value();
  const std::int64_t n = lv.rows();
  const std::int64_t c = lv.cols();
  RequireShape(static_cast<std::int64_t>(targets.size()) == n,
               "SoftmaxCrossEntropy target count mismatch");
  if (n == 0) throw Error(ErrorCode::kShapeMismatch, "no rows in logits");
  Tensor probs = Tensor::Matrix(n, c);
  double total = 0.0;
  for (std::int64_t r = 0; r < n; ++r) {
    if (targets[r] < 0 || targets[r] >= c) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  fmt::format("target {} not in [0, {})", targets[r], c));
    }
    const double* row = lv.raw() + r * c;
    const double max = *std::max_element(row, row + c);
    double sum = 0.0;
    for (std::int64_t k = 0; k < c; ++k) {
      const double e = std::exp(row[k] - max);
      probs.at(r, k) = e;
      sum += e;
    }
    for (std::int64_t k = 0; k < c; ++k) probs.at(r, k) /= sum;
    total += -(row[targets[r]] - max - std::log(sum));
  }
  const int il = logits.id();
  std::vector<int> tgt(targets.begin(), targets.end());
  return logits.tape()->Record(
      Tensor::Scalar(total / static_cast<double>(n)), {logits},
      [il, probs = std::move(probs), tgt = std::move(tgt)](Tape& t,
                                                           const Tensor& g) {
        Tensor& d = t.GradBuffer(il);
        const double scale = g[0] / static_cast<double>(probs.rows());
        const std::int64_t cols = probs.cols();
        for (std::int64_t r = 0; r < probs.rows(); ++r) {
          double* dr = d.raw() + r * cols;
          const double* pr = probs.raw() + r * cols;
          for (std::int64_t k = 0; k < cols; ++k) dr[k] += scale * pr[k];
          dr[tgt[r]] -= scale;
        }
      });
}

Var SigmoidBinaryCrossEntropy(Var logits, const Tensor& targets) {
  const Tensor& lv = logits.value();
  RequireShape(lv.size() == targets.size() && lv.size() > 0,
               fmt::format("SigmoidBinaryCrossEntropy {} vs {}", Dims(lv),
                           Dims(targets)));
  double total = 0.0;
  for (std::int64_t i = 0; i < lv.size(); ++i) {
    const double z = lv[i];
    total += std::max(z, 0.0) - z * targets[i] + std::log1p(std::exp(-std::abs(z)));
  }
  const int il = logits.id();
  return logits.tape()->Record(
      Tensor::Scalar(total / static_cast<double>(lv.size())), {logits},
      [il, targets](Tape& t, const Tensor& g) {
        const Tensor& z = t.value(il);
        Tensor& d = t.GradBuffer(il);
        const double scale = g[0] / static_cast<double>(z.size());
        for (std::int64_t i = 0; i < z.size(); ++i) {
          d[i] += scale * (StableSigmoid(z[i]) - targets[i]);
        }
      });
}

Var MeanSquaredError(Var pred, Var target) {
  CheckSameTape(pred, target);
  const Tensor& pv = pred.value();
  const Tensor& tv = target.value();
  RequireShape(pv.size() == tv.size() && pv.rows() == tv.rows() && pv.size() > 0,
               fmt::format("MeanSquaredError {} vs {}", Dims(pv), Dims(tv)));
  double total = 0.0;
  for (std::int64_t i = 0; i < pv.size(); ++i) {
    const double diff = pv[i] - tv[i];
    total += diff * diff;
  }
  const int ip = pred.id(), it = target.id();
  return pred.tape()->Record(
      Tensor::Scalar(total / static_cast<double>(pv.size())), {pred, target},
      [ip, it](Tape& t, const Tensor& g) {
        const Tensor& p = t.value(ip);
        const Tensor& q = t.value(it);
        const double scale = 2.0 * g[0] / static_cast<double>(p.size());
        if (t.RequiresGrad(ip)) {
          Tensor& d = t.GradBuffer(ip);
          for (std::int64_t i = 0; i < p.size(); ++i) d[i] += scale * (p[i] - q[i]);
        }
        if (t.RequiresGrad(it)) {
          Tensor& d = t.GradBuffer(it);
          for (std::int64_t i = 0; i < p.size(); ++i) d[i] -= scale * (p[i] - q[i]);
        }
      });
}

Var MeanSquaredError(Var pred, const Tensor& target) {
  return MeanSquaredError(pred, pred.tape()->Constant(target));
}

Var WeightedSum(std::span<const Var> terms, std::span<const double> weights) {
  if (terms.empty() || terms.size() != weights.size()) {
    throw Error(ErrorCode::kShapeMismatch, "WeightedSum term/weight mismatch");
  }
  Tape* tape = terms[0].tape();
  double total = 0.0;
  std::vector<int> ids;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    CheckSameTape(terms[0], terms[i]);
    total += weights[i] * terms[i].value().scalar();
    ids.push_back(terms[i].id());
  }
  std::vector<double> w(weights.begin(), weights.end());
  return tape->Record(Tensor::Scalar(total), terms,
                      [ids, w = std::move(w)](Tape& t, const Tensor& g) {
                        for (std::size_t i = 0; i < ids.size(); ++i) {
                          if (t.RequiresGrad(ids[i]) && w[i] != 0.0) {
                            t.GradBuffer(ids[i])[0] += w[i] * g[0];
                          }
                        }
                      });
}

Var SumSquares(Var x) {
  const Tensor& xv = x.value();
  double total = 0.0;
  for (const double v : xv.data()) total += v * v;
  const int ix = x.id();
  return x.tape()->Record(Tensor::Scalar(total), {x},
                          [ix](Tape& t, const Tensor& g) {
                            const Tensor& v = t.value(ix);
                            Tensor& d = t.GradBuffer(ix);
                            for (std::int64_t i = 0; i < v.size(); ++i) {
                              d[i] += 2.0 * g[0] * v[i];
                            }
                          });
}

Var Sum(Var x) {
  const Tensor& xv = x.value();
  double total = 0.0;
  for (const double v : xv.data()) total += v;
  const int ix = x.id();
  return x.tape()->Record(Tensor::Scalar(total), {x},
                          [ix](Tape& t, const Tensor& g) {
                            Tensor& d = t.GradBuffer(ix);
                            for (double& v : d.data()) v += g[0];
                          });
}

}  // namespace sgir
