/* Copyright 2026 The usmae Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "usmae/diffcore/graph.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

namespace usmae::diff {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

template <typename T>
MatMap<T> as_mat(BasicTensor<T>& t) {
  return MatMap<T>(t.data(), static_cast<Eigen::Index>(t.rows()),
                   static_cast<Eigen::Index>(t.cols()));
}

template <typename T>
ConstMatMap<T> as_mat(const BasicTensor<T>& t) {
  return ConstMatMap<T>(t.data(), static_cast<Eigen::Index>(t.rows()),
                        static_cast<Eigen::Index>(t.cols()));
}

template <typename T>
VecMap<T> as_vec(BasicTensor<T>& t) {
  return VecMap<T>(t.data(), static_cast<Eigen::Index>(t.size()));
}

template <typename T>
ConstVecMap<T> as_vec(const BasicTensor<T>& t) {
  return ConstVecMap<T>(t.data(), static_cast<Eigen::Index>(t.size()));
}

void require_rank2(const Shape& s, const char* op) {
  if (s.size() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         shape_string(s));
  }
}

// A vector of extent n: shape [n] or [1,n].
void require_vector(const Shape& s, std::size_t n, const char* op) {
  const bool ok = (s.size() == 1 && s[0] == n) ||
                  (s.size() == 2 && s[0] == 1 && s[1] == n);
  if (!ok) {
    throw DimensionError(std::string(op) + ": expected vector of extent " +
                         std::to_string(n) + ", got " + shape_string(s));
  }
}

}  // namespace

template <typename T>
Var BasicGraph<T>::push(TensorT value, bool requires_grad, Backward fn) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename T>
typename BasicGraph<T>::TensorT& BasicGraph<T>::grad_ref(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = TensorT(n.value.shape());
  return n.grad;
}

template <typename T>
typename BasicGraph<T>::TensorT BasicGraph<T>::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad.empty()) return TensorT(n.value.shape());
  return n.grad;
}

template <typename T>
Var BasicGraph<T>::constant(TensorT value) {
  return push(std::move(value), false);
}

template <typename T>
Var BasicGraph<T>::param(std::string_view name) {
  if (params_ == nullptr) {
    throw InvalidArgument("graph has no parameter set bound");
  }
  const std::size_t index = params_->index_of(name);
  if (auto it = param_nodes_.find(index); it != param_nodes_.end()) {
    return Var{it->second};
  }
  Var v = push((*params_)[index].value, true, [](BasicGraph&, std::size_t) {});
  nodes_[v.id].param = static_cast<std::ptrdiff_t>(index);
  param_nodes_.emplace(index, v.id);
  return v;
}

template <typename T>
Var BasicGraph<T>::matmul(Var a, Var b) {
  const auto& A = node(a).value;
  const auto& B = node(b).value;
  require_rank2(A.shape(), "matmul");
  require_rank2(B.shape(), "matmul");
  if (A.dim(1) != B.dim(0)) {
    throw DimensionError("matmul: inner extents differ, " +
                         shape_string(A.shape()) + " x " +
                         shape_string(B.shape()));
  }
  TensorT out({A.dim(0), B.dim(1)});
  as_mat(out).noalias() = as_mat(A) * as_mat(B);
  return push(std::move(out), needs(a) || needs(b),
              [a, b](BasicGraph& g, std::size_t self) {
                const auto& dC = g.nodes_[self].grad;
                if (g.needs(a)) {
                  as_mat(g.grad_ref(a.id)).noalias() +=
                      as_mat(dC) * as_mat(g.nodes_[b.id].value).transpose();
                }
                if (g.needs(b)) {
                  as_mat(g.grad_ref(b.id)).noalias() +=
                      as_mat(g.nodes_[a.id].value).transpose() * as_mat(dC);
                }
              });
}

template <typename T>
Var BasicGraph<T>::linear(Var x, Var w, Var bias) {
  const auto& X = node(x).value;
  const auto& W = node(w).value;
  require_rank2(X.shape(), "linear");
  require_rank2(W.shape(), "linear");
  if (X.dim(1) != W.dim(0)) {
    throw DimensionError("linear: input " + shape_string(X.shape()) +
                         " does not match weight " + shape_string(W.shape()));
  }
  require_vector(node(bias).value.shape(), W.dim(1), "linear");
  TensorT out({X.dim(0), W.dim(1)});
  auto Y = as_mat(out);
  Y.noalias() = as_mat(X) * as_mat(W);
  Y.rowwise() += as_vec(node(bias).value).transpose();
  return push(std::move(out), needs(x) || needs(w) || needs(bias),
              [x, w, bias](BasicGraph& g, std::size_t self) {
                const auto& dY = g.nodes_[self].grad;
                if (g.needs(x)) {
                  as_mat(g.grad_ref(x.id)).noalias() +=
                      as_mat(dY) * as_mat(g.nodes_[w.id].value).transpose();
                }
                if (g.needs(w)) {
                  as_mat(g.grad_ref(w.id)).noalias() +=
                      as_mat(g.nodes_[x.id].value).transpose() * as_mat(dY);
                }
                if (g.needs(bias)) {
                  as_vec(g.grad_ref(bias.id)) +=
                      as_mat(dY).colwise().sum().transpose();
                }
              });
}

template <typename T>
Var BasicGraph<T>::add(Var a, Var b) {
  const auto& A = node(a).value;
  const auto& B = node(b).value;
  if (A.shape() != B.shape()) {
    throw DimensionError("add: shapes differ, " + shape_string(A.shape()) +
                         " vs " + shape_string(B.shape()));
  }
  TensorT out(A.shape());
  as_vec(out) = as_vec(A) + as_vec(B);
  return push(std::move(out), needs(a) || needs(b),
              [a, b](BasicGraph& g, std::size_t self) {
                const auto& d = g.nodes_[self].grad;
                if (g.needs(a)) as_vec(g.grad_ref(a.id)) += as_vec(d);
                if (g.needs(b)) as_vec(g.grad_ref(b.id)) += as_vec(d);
              });
}

template <typename T>
Var BasicGraph<T>::scale(Var a, T factor) {
  TensorT out(node(a).value.shape());
  as_vec(out) = as_vec(node(a).value) * factor;
  return push(std::move(out), needs(a),
              [a, factor](BasicGraph& g, std::size_t self) {
                as_vec(g.grad_ref(a.id)) += as_vec(g.nodes_[self].grad) * factor;
              });
}

template <typename T>
Var BasicGraph<T>::gelu(Var x) {
  const auto& X = node(x).value;
  TensorT out(X.shape());
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const T v = X[i];
    out[i] = T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2));
  }
  return push(std::move(out), needs(x), [x](BasicGraph& g, std::size_t self) {
    const auto& X = g.nodes_[x.id].value;
    const auto& dY = g.nodes_[self].grad;
    auto& dX = g.grad_ref(x.id);
    const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
    const T inv_sqrt2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
    for (std::size_t i = 0; i < X.size(); ++i) {
      const T v = X[i];
      const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
      const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * v * v);
      dX[i] += dY[i] * (cdf + v * pdf);
    }
  });
}

template <typename T>
Var BasicGraph<T>::dropout(Var x, T rate, Rng& rng, bool training) {
  if (!(rate >= T(0) && rate < T(1))) {
    throw InvalidArgument("dropout rate must lie in [0, 1), got " +
                          std::to_string(static_cast<double>(rate)));
  }
  if (!training || rate == T(0)) return x;
  const auto& X = node(x).value;
  auto keep = std::make_shared<std::vector<T, AlignedAllocator<T>>>(X.size());
  const T survivor_scale = T(1) / (T(1) - rate);
  TensorT out(X.shape());
  for (std::size_t i = 0; i < X.size(); ++i) {
    const T k = rng.uniform() < static_cast<double>(rate) ? T(0) : survivor_scale;
    (*keep)[i] = k;
    out[i] = X[i] * k;
  }
  return push(std::move(out), needs(x),
              [x, keep](BasicGraph& g, std::size_t self) {
                const auto& dY = g.nodes_[self].grad;
                auto& dX = g.grad_ref(x.id);
                for (std::size_t i = 0; i < dY.size(); ++i) {
                  dX[i] += dY[i] * (*keep)[i];
                }
              });
}

namespace {

// Decomposes a shape around `axis` into (outer, extent, inner) strides.
struct AxisLayout {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisLayout axis_layout(const Shape& s, std::size_t axis) {
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + shape_string(s));
  }
  AxisLayout l;
  for (std::size_t i = 0; i < axis; ++i) l.outer *= s[i];
  l.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) l.inner *= s[i];
  return l;
}

}  // namespace

template <typename T>
Var BasicGraph<T>::softmax(Var x, std::size_t axis) {
  const auto& X = node(x).value;
  const AxisLayout l = axis_layout(X.shape(), axis);
  TensorT out(X.shape());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.extent * l.inner + in;
      T mx = X[base];
      for (std::size_t e = 1; e < l.extent; ++e) {
        mx = std::max(mx, X[base + e * l.inner]);
      }
      T total = 0;
      for (std::size_t e = 0; e < l.extent; ++e) {
        const T v = std::exp(X[base + e * l.inner] - mx);
        out[base + e * l.inner] = v;
        total += v;
      }
      for (std::size_t e = 0; e < l.extent; ++e) out[base + e * l.inner] /= total;
    }
  }
  return push(std::move(out), needs(x), [x, l](BasicGraph& g, std::size_t self) {
    const auto& Y = g.nodes_[self].value;
    const auto& dY = g.nodes_[self].grad;
    auto& dX = g.grad_ref(x.id);
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t in = 0; in < l.inner; ++in) {
        const std::size_t base = o * l.extent * l.inner + in;
        T dot = 0;
        for (std::size_t e = 0; e < l.extent; ++e) {
          dot += Y[base + e * l.inner] * dY[base + e * l.inner];
        }
        for (std::size_t e = 0; e < l.extent; ++e) {
          const std::size_t i = base + e * l.inner;
          dX[i] += Y[i] * (dY[i] - dot);
        }
      }
    }
  });
}

template <typename T>
Var BasicGraph<T>::layer_norm(Var x, Var gamma, Var beta, T eps) {
  const auto& X = node(x).value;
  require_rank2(X.shape(), "layer_norm");
  const std::size_t rows = X.dim(0), d = X.dim(1);
  require_vector(node(gamma).value.shape(), d, "layer_norm");
  require_vector(node(beta).value.shape(), d, "layer_norm");
  if (!(eps > T(0))) throw InvalidArgument("layer_norm: eps must be positive");

  const auto& G = node(gamma).value;
  const auto& Bt = node(beta).value;
  auto xhat = std::make_shared<TensorT>(X.shape());
  auto rstd = std::make_shared<std::vector<T, AlignedAllocator<T>>>(rows);
  TensorT out(X.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = X.data() + r * d;
    T mean = 0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<T>(d);
    const T rs = T(1) / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    T* hr = xhat->data() + r * d;
    T* yr = out.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) {
      hr[j] = (xr[j] - mean) * rs;
      yr[j] = G[j] * hr[j] + Bt[j];
    }
  }
  return push(
      std::move(out), needs(x) || needs(gamma) || needs(beta),
      [x, gamma, beta, xhat, rstd, rows, d](BasicGraph& g, std::size_t self) {
        const auto& dY = g.nodes_[self].grad;
        const auto& G = g.nodes_[gamma.id].value;
        if (g.needs(gamma)) {
          auto& dG = g.grad_ref(gamma.id);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < d; ++j)
              dG[j] += dY[r * d + j] * (*xhat)[r * d + j];
        }
        if (g.needs(beta)) {
          auto& dB = g.grad_ref(beta.id);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < d; ++j) dB[j] += dY[r * d + j];
        }
        if (g.needs(x)) {
          auto& dX = g.grad_ref(x.id);
          const T inv_d = T(1) / static_cast<T>(d);
          for (std::size_t r = 0; r < rows; ++r) {
            const T* h = xhat->data() + r * d;
            const T* dy = dY.data() + r * d;
            T mean_dh = 0, mean_dh_h = 0;
            for (std::size_t j = 0; j < d; ++j) {
              const T dh = dy[j] * G[j];
              mean_dh += dh;
              mean_dh_h += dh * h[j];
            }
            mean_dh *= inv_d;
            mean_dh_h *= inv_d;
            T* dx = dX.data() + r * d;
            for (std::size_t j = 0; j < d; ++j) {
              dx[j] += (*rstd)[r] * (dy[j] * G[j] - mean_dh - h[j] * mean_dh_h);
            }
          }
        }
      });
}

template <typename T>
Var BasicGraph<T>::attention(Var q, Var k, Var v, std::size_t batch,
                             std::size_t heads) {
  const auto& Q = node(q).value;
  const auto& K = node(k).value;
  const auto& V = node(v).value;
  require_rank2(Q.shape(), "attention");
  if (K.shape() != Q.shape() || V.shape() != Q.shape()) {
    throw DimensionError("attention: q/k/v shapes differ: " +
                         shape_string(Q.shape()) + ", " +
                         shape_string(K.shape()) + ", " +
                         shape_string(V.shape()));
  }
  if (batch == 0 || heads == 0 || Q.dim(0) % batch != 0 ||
      Q.dim(1) % heads != 0) {
    throw DimensionError("attention: shape " + shape_string(Q.shape()) +
                         " not divisible into batch " + std::to_string(batch) +
                         " x heads " + std::to_string(heads));
  }
  const auto seq = static_cast<Eigen::Index>(Q.dim(0) / batch);
  const auto width = static_cast<Eigen::Index>(Q.dim(1));
  const auto dh = static_cast<Eigen::Index>(Q.dim(1) / heads);
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  auto probs = std::make_shared<std::vector<T, AlignedAllocator<T>>>(batch * heads * seq * seq);
  TensorT out(Q.shape());
  RowMat<T> S(seq, seq);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = b * seq * width + h * dh;
      ConstStridedMap<T> Qb(Q.data() + off, seq, dh, Eigen::OuterStride<>(width));
      ConstStridedMap<T> Kb(K.data() + off, seq, dh, Eigen::OuterStride<>(width));
      ConstStridedMap<T> Vb(V.data() + off, seq, dh, Eigen::OuterStride<>(width));
      StridedMap<T> Ob(out.data() + off, seq, dh, Eigen::OuterStride<>(width));
      MatMap<T> P(probs->data() + (b * heads + h) * seq * seq, seq, seq);
      S.noalias() = (Qb * Kb.transpose()) * scale;
      for (Eigen::Index r = 0; r < seq; ++r) {
        const T mx = S.row(r).maxCoeff();
        P.row(r) = (S.row(r).array() - mx).exp().matrix();
        P.row(r) /= P.row(r).sum();
      }
      Ob.noalias() = P * Vb;
    }
  }
  return push(
      std::move(out), needs(q) || needs(k) || needs(v),
      [q, k, v, batch, heads, seq, width, dh, scale, probs](BasicGraph& g,
                                                            std::size_t self) {
        const auto& dO = g.nodes_[self].grad;
        const auto& Q = g.nodes_[q.id].value;
        const auto& K = g.nodes_[k.id].value;
        const auto& V = g.nodes_[v.id].value;
        T* dQ = g.needs(q) ? g.grad_ref(q.id).data() : nullptr;
        T* dK = g.needs(k) ? g.grad_ref(k.id).data() : nullptr;
        T* dV = g.needs(v) ? g.grad_ref(v.id).data() : nullptr;
        RowMat<T> dP(seq, seq), dS(seq, seq);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t off = b * seq * width + h * dh;
            const Eigen::OuterStride<> st(width);
            ConstStridedMap<T> Qb(Q.data() + off, seq, dh, st);
            ConstStridedMap<T> Kb(K.data() + off, seq, dh, st);
            ConstStridedMap<T> Vb(V.data() + off, seq, dh, st);
            ConstStridedMap<T> dOb(dO.data() + off, seq, dh, st);
            ConstMatMap<T> P(probs->data() + (b * heads + h) * seq * seq, seq,
                             seq);
            if (dV != nullptr) {
              StridedMap<T>(dV + off, seq, dh, st).noalias() +=
                  P.transpose() * dOb;
            }
            if (dQ == nullptr && dK == nullptr) continue;
            dP.noalias() = dOb * Vb.transpose();
            for (Eigen::Index r = 0; r < seq; ++r) {
              const T dot = P.row(r).dot(dP.row(r));
              dS.row(r) = (P.row(r).array() * (dP.row(r).array() - dot)).matrix();
            }
            if (dQ != nullptr) {
              StridedMap<T>(dQ + off, seq, dh, st).noalias() +=
                  (dS * Kb) * scale;
            }
            if (dK != nullptr) {
              StridedMap<T>(dK + off, seq, dh, st).noalias() +=
                  (dS.transpose() * Qb) * scale;
            }
          }
        }
      });
}

template <typename T>
Var BasicGraph<T>::gather_rows(Var table, std::span<const std::size_t> indices) {
  const auto& Tb = node(table).value;
  require_rank2(Tb.shape(), "gather_rows");
  if (indices.empty()) throw DimensionError("gather_rows: no indices");
  const std::size_t d = Tb.dim(1);
  auto idx = std::make_shared<std::vector<std::size_t>>(indices.begin(),
                                                        indices.end());
  TensorT out({idx->size(), d});
  for (std::size_t i = 0; i < idx->size(); ++i) {
    if ((*idx)[i] >= Tb.dim(0)) {
      throw DimensionError("gather_rows: index " + std::to_string((*idx)[i]) +
                           " out of range for " + shape_string(Tb.shape()));
    }
    std::copy_n(Tb.data() + (*idx)[i] * d, d, out.data() + i * d);
  }
  return push(std::move(out), needs(table),
              [table, idx, d](BasicGraph& g, std::size_t self) {
                const auto& dY = g.nodes_[self].grad;
                auto& dT = g.grad_ref(table.id);
                for (std::size_t i = 0; i < idx->size(); ++i) {
                  T* dst = dT.data() + (*idx)[i] * d;
                  const T* src = dY.data() + i * d;
                  for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                }
              });
}

template <typename T>
Var BasicGraph<T>::scatter_rows(Var rows, std::span<const std::size_t> positions,
                                Var fill, std::size_t total) {
  const auto& R = node(rows).value;
  require_rank2(R.shape(), "scatter_rows");
  const std::size_t d = R.dim(1);
  require_vector(node(fill).value.shape(), d, "scatter_rows");
  if (positions.size() != R.dim(0)) {
    throw DimensionError("scatter_rows: " + std::to_string(positions.size()) +
                         " positions for " + std::to_string(R.dim(0)) + " rows");
  }
  // source[i] = row index feeding output row i, or npos for fill rows.
  auto source = std::make_shared<std::vector<std::size_t>>(total, Var::kNone);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] >= total || (*source)[positions[i]] != Var::kNone) {
      throw DimensionError("scatter_rows: position " +
                           std::to_string(positions[i]) +
                           " out of range or repeated");
    }
    (*source)[positions[i]] = i;
  }
  const auto& F = node(fill).value;
  TensorT out({total, d});
  for (std::size_t r = 0; r < total; ++r) {
    const T* src = (*source)[r] == Var::kNone ? F.data() : R.data() + (*source)[r] * d;
    std::copy_n(src, d, out.data() + r * d);
  }
  return push(std::move(out), needs(rows) || needs(fill),
              [rows, fill, source, d](BasicGraph& g, std::size_t self) {
                const auto& dY = g.nodes_[self].grad;
                T* dR = g.needs(rows) ? g.grad_ref(rows.id).data() : nullptr;
                T* dF = g.needs(fill) ? g.grad_ref(fill.id).data() : nullptr;
                for (std::size_t r = 0; r < source->size(); ++r) {
                  const T* src = dY.data() + r * d;
                  const std::size_t s = (*source)[r];
                  T* dst = s == Var::kNone ? dF : (dR ? dR + s * d : nullptr);
                  if (dst == nullptr) continue;
                  for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                }
              });
}

template <typename T>
Var BasicGraph<T>::mean_rows(Var x, std::size_t groups) {
  const auto& X = node(x).value;
  require_rank2(X.shape(), "mean_rows");
  if (groups == 0 || X.dim(0) % groups != 0) {
    throw DimensionError("mean_rows: " + shape_string(X.shape()) +
                         " not divisible into " + std::to_string(groups) +
                         " groups");
  }
  const std::size_t n = X.dim(0) / groups, d = X.dim(1);
  TensorT out({groups, d});
  const T inv_n = T(1) / static_cast<T>(n);
  for (std::size_t g = 0; g < groups; ++g) {
    T* dst = out.data() + g * d;
    for (std::size_t r = 0; r < n; ++r) {
      const T* src = X.data() + (g * n + r) * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
    for (std::size_t j = 0; j < d; ++j) dst[j] *= inv_n;
  }
  return push(std::move(out), needs(x),
              [x, n, d, groups, inv_n](BasicGraph& g, std::size_t self) {
                const auto& dY = g.nodes_[self].grad;
                auto& dX = g.grad_ref(x.id);
                for (std::size_t gi = 0; gi < groups; ++gi) {
                  const T* src = dY.data() + gi * d;
                  for (std::size_t r = 0; r < n; ++r) {
                    T* dst = dX.data() + (gi * n + r) * d;
                    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j] * inv_n;
                  }
                }
              });
}

template <typename T>
Var BasicGraph<T>::sum(Var x) {
  T total = 0;
  for (T v : node(x).value.values()) total += v;
  return push(TensorT::scalar(total), needs(x),
              [x](BasicGraph& g, std::size_t self) {
                const T d = g.nodes_[self].grad[0];
                for (T& v : g.grad_ref(x.id).values()) v += d;
              });
}

template <typename T>
Var BasicGraph<T>::masked_l1(Var pred, const TensorT& target,
                             std::span<const std::uint8_t> masked) {
  const auto& Pr = node(pred).value;
  require_rank2(Pr.shape(), "masked_l1");
  if (target.shape() != Pr.shape()) {
    throw DimensionError("masked_l1: prediction " + shape_string(Pr.shape()) +
                         " vs target " + shape_string(target.shape()));
  }
  if (masked.size() != Pr.dim(0)) {
    throw DimensionError("masked_l1: mask has " + std::to_string(masked.size()) +
                         " entries for " + std::to_string(Pr.dim(0)) + " rows");
  }
  const std::size_t cols = Pr.dim(1);
  const auto count = static_cast<std::size_t>(
      std::count_if(masked.begin(), masked.end(), [](auto m) { return m != 0; }));
  if (count == 0) throw InvalidArgument("masked_l1: no masked rows");
  const T norm = T(1) / static_cast<T>(count * cols);

  auto sign = std::make_shared<std::vector<std::int8_t>>(Pr.size(), 0);
  T total = 0;
  for (std::size_t r = 0; r < Pr.dim(0); ++r) {
    if (!masked[r]) continue;
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t i = r * cols + j;
      const T diff = Pr[i] - target[i];
      total += std::abs(diff);
      (*sign)[i] = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
    }
  }
  return push(TensorT::scalar(total * norm), needs(pred),
              [pred, sign, norm](BasicGraph& g, std::size_t self) {
                const T d = g.nodes_[self].grad[0] * norm;
                auto& dP = g.grad_ref(pred.id);
                for (std::size_t i = 0; i < sign->size(); ++i) {
                  dP[i] += d * static_cast<T>((*sign)[i]);
                }
              });
}

template <typename T>
Var BasicGraph<T>::cross_entropy(Var logits, std::span<const int> labels) {
  const auto& L = node(logits).value;
  require_rank2(L.shape(), "cross_entropy");
  const std::size_t batch = L.dim(0), classes = L.dim(1);
  if (labels.size() != batch) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(batch) + " rows");
  }
  auto probs = std::make_shared<TensorT>(L.shape());
  auto lab = std::make_shared<std::vector<int>>(labels.begin(), labels.end());
  T total = 0;
  for (std::size_t r = 0; r < batch; ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw InvalidArgument("cross_entropy: label " + std::to_string(y) +
                            " outside [0, " + std::to_string(classes) + ")");
    }
    const T* lr = L.data() + r * classes;
    const T mx = *std::max_element(lr, lr + classes);
    T z = 0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(lr[c] - mx);
    const T log_z = mx + std::log(z);
    total += log_z - lr[y];
    for (std::size_t c = 0; c < classes; ++c) {
      probs->at(r, c) = std::exp(lr[c] - log_z);
    }
  }
  const T inv_b = T(1) / static_cast<T>(batch);
  return push(TensorT::scalar(total * inv_b), needs(logits),
              [logits, probs, lab, inv_b](BasicGraph& g, std::size_t self) {
                const T d = g.nodes_[self].grad[0] * inv_b;
                auto& dL = g.grad_ref(logits.id);
                const std::size_t classes = probs->cols();
                for (std::size_t r = 0; r < lab->size(); ++r) {
                  for (std::size_t c = 0; c < classes; ++c) {
                    const T onehot = static_cast<int>(c) == (*lab)[r] ? T(1) : T(0);
                    dL.at(r, c) += d * (probs->at(r, c) - onehot);
                  }
                }
              });
}

template <typename T>
void BasicGraph<T>::backward(Var loss) {
  Node& root = nodes_.at(loss.id);
  if (root.value.size() != 1) {
    throw DimensionError("backward: target must hold a single element, got " +
                         shape_string(root.value.shape()));
  }
  root.value.require_finite("loss");
  for (auto& n : nodes_) n.grad = TensorT();
  if (!root.requires_grad) return;
  grad_ref(loss.id)[0] = T(1);
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.empty() || !n.backward) continue;
    n.backward(*this, id);
  }
  if (params_ == nullptr) return;
  for (std::size_t p = 0; p < params_->size(); ++p) {
    auto it = param_nodes_.find(p);
    if (it == param_nodes_.end()) continue;
    const auto& g = nodes_[it->second].grad;
    if (g.empty()) continue;
    auto& dst = (*params_)[p].grad;
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }
}

template class BasicGraph<float>;
template class BasicGraph<double>;

}  // namespace usmae::diff
