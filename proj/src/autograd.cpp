#include "trimod/autograd.hpp"

#include <algorithm>
#include <cmath>

namespace trimod {
namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got shape " +
                         shape_to_string(a.shape()));
  }
}

Graph& graph_of(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("operation needs at least one input");
  return parts.front().graph();
}

// Adds `src` scaled by `factor` into the gradient of `target` when it needs one.
void accumulate(Graph& g, int target, const Tensor& src, double factor = 1.0) {
  if (!g.requires_grad(target)) return;
  auto& dst = g.grad(target);
  double* d = dst.data();
  const double* s = src.data();
  const std::size_t n = src.size();
  for (std::size_t i = 0; i < n; ++i) d[i] += factor * s[i];
}

}  // namespace

// ---- Var / Graph ---------------------------------------------------------

const Tensor& Var::value() const { return graph_->value(id_); }

double Var::item() const {
  const auto& v = value();
  if (v.size() != 1) {
    throw ContractError("item() on non-scalar of shape " +
                        shape_to_string(v.shape()));
  }
  return v[0];
}

Var Graph::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Graph::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  Node node;
  node.param = &p;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size() - 1);
  param_nodes_.emplace(&p, id);
  return Var(this, id);
}

Var Graph::record(Tensor value, std::span<const Var> inputs,
                  BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  for (const auto& in : inputs) {
    if (in.graph_ != this) {
      throw ContractError("operands belong to different graphs");
    }
    node.requires_grad = node.requires_grad || nodes_[in.id_].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

const Tensor& Graph::value(int id) const {
  const auto& node = nodes_[id];
  return node.param ? node.param->value : node.value;
}

Tensor& Graph::grad(int id) {
  auto& node = nodes_[id];
  if (node.param) return node.param->grad;
  if (!node.has_grad) {
    node.grad = Tensor(node.value.shape());
    node.has_grad = true;
  }
  return node.grad;
}

void Graph::backward(Var output) {
  if (output.graph_ != this) {
    throw ContractError("backward: output belongs to another graph");
  }
  const auto& out = value(output.id_);
  if (out.size() != 1) {
    throw ContractError("backward requires a scalar output, got shape " +
                        shape_to_string(out.shape()));
  }
  for (auto& node : nodes_) {
    if (!node.param) {
      node.has_grad = false;
      node.grad = Tensor();
    }
  }
  if (!nodes_[output.id_].requires_grad) return;
  grad(output.id_)[0] += 1.0;
  for (int id = output.id_; id >= 0; --id) {
    auto& node = nodes_[id];
    if (node.param || !node.has_grad || !node.backward) continue;
    node.backward(*this, id);
  }
}

// ---- linear algebra --------------------------------------------------------

Var matmul(Var a, Var b) {
  const auto& A = a.value();
  const auto& B = b.value();
  require_rank("matmul", A, 2);
  require_rank("matmul", B, 2);
  const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
  if (B.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions disagree for " +
                         shape_to_string(A.shape()) + " x " +
                         shape_to_string(B.shape()));
  }
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A.at(i, p);
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += aip * B.at(p, j);
    }
  }
  const int ia = a.id(), ib = b.id();
  Var inputs[] = {a, b};
  return a.graph().record(std::move(out), inputs, [ia, ib, m, k, n](Graph& g, int self) {
    const auto& G = g.grad(self);
    if (g.requires_grad(ia)) {
      const auto& B = g.value(ib);
      auto& gA = g.grad(ia);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += G.at(i, j) * B.at(p, j);
          gA.at(i, p) += acc;
        }
    }
    if (g.requires_grad(ib)) {
      const auto& A = g.value(ia);
      auto& gB = g.grad(ib);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A.at(i, p);
          for (std::size_t j = 0; j < n; ++j) gB.at(p, j) += aip * G.at(i, j);
        }
    }
  });
}

namespace {

Var matvec_impl(const char* op, Var w, Var x, const Var* b) {
  const auto& W = w.value();
  const auto& X = x.value();
  require_rank(op, W, 2);
  require_rank(op, X, 1);
  const std::size_t m = W.dim(0), k = W.dim(1);
  if (X.dim(0) != k) {
    throw DimensionError(std::string(op) + ": matrix " +
                         shape_to_string(W.shape()) + " cannot multiply vector " +
                         shape_to_string(X.shape()));
  }
  Tensor out({m});
  if (b) {
    const auto& B = b->value();
    if (B.shape() != Shape{m}) {
      throw DimensionError(std::string(op) + ": bias " +
                           shape_to_string(B.shape()) + " does not match output [" +
                           std::to_string(m) + "]");
    }
    out = B;
  }
  const double* wp = W.data();
  const double* xp = X.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* wr = wp + i * k;
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += wr[j] * xp[j];
    out[i] += acc;
  }
  const int iw = w.id(), ix = x.id(), ib = b ? b->id() : -1;
  std::vector<Var> inputs{w, x};
  if (b) inputs.push_back(*b);
  return w.graph().record(std::move(out), inputs, [iw, ix, ib, m, k](Graph& g, int self) {
    const auto& G = g.grad(self);
    const double* gp = G.data();
    if (g.requires_grad(iw)) {
      const double* xp = g.value(ix).data();
      double* gw = g.grad(iw).data();
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = gp[i];
        if (gi == 0.0) continue;
        double* row = gw + i * k;
        for (std::size_t j = 0; j < k; ++j) row[j] += gi * xp[j];
      }
    }
    if (g.requires_grad(ix)) {
      const double* wp = g.value(iw).data();
      double* gx = g.grad(ix).data();
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = gp[i];
        if (gi == 0.0) continue;
        const double* row = wp + i * k;
        for (std::size_t j = 0; j < k; ++j) gx[j] += gi * row[j];
      }
    }
    if (ib >= 0) accumulate(g, ib, G);
  });
}

}  // namespace

Var matvec(Var w, Var x) { return matvec_impl("matvec", w, x, nullptr); }

Var affine(Var w, Var x, Var b) { return matvec_impl("affine", w, x, &b); }

// ---- elementwise -----------------------------------------------------------

Var add(Var a, Var b) {
  require_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  const auto& B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  const int ia = a.id(), ib = b.id();
  Var inputs[] = {a, b};
  return a.graph().record(std::move(out), inputs, [ia, ib](Graph& g, int self) {
    const auto& G = g.grad(self);
    accumulate(g, ia, G);
    accumulate(g, ib, G);
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a.value(), b.value());
  Tensor out = a.value();
  const auto& B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
  const int ia = a.id(), ib = b.id();
  Var inputs[] = {a, b};
  return a.graph().record(std::move(out), inputs, [ia, ib](Graph& g, int self) {
    const auto& G = g.grad(self);
    accumulate(g, ia, G);
    accumulate(g, ib, G, -1.0);
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a.value(), b.value());
  Tensor out = a.value();
  const auto& B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  const int ia = a.id(), ib = b.id();
  Var inputs[] = {a, b};
  return a.graph().record(std::move(out), inputs, [ia, ib](Graph& g, int self) {
    const auto& G = g.grad(self);
    if (g.requires_grad(ia)) {
      const auto& B = g.value(ib);
      auto& gA = g.grad(ia);
      for (std::size_t i = 0; i < G.size(); ++i) gA[i] += G[i] * B[i];
    }
    if (g.requires_grad(ib)) {
      const auto& A = g.value(ia);
      auto& gB = g.grad(ib);
      for (std::size_t i = 0; i < G.size(); ++i) gB[i] += G[i] * A[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (auto& v : out.values()) v *= factor;
  const int ia = a.id();
  Var inputs[] = {a};
  return a.graph().record(std::move(out), inputs, [ia, factor](Graph& g, int self) {
    accumulate(g, ia, g.grad(self), factor);
  });
}

Var one_minus(Var a) {
  Tensor out = a.value();
  for (auto& v : out.values()) v = 1.0 - v;
  const int ia = a.id();
  Var inputs[] = {a};
  return a.graph().record(std::move(out), inputs, [ia](Graph& g, int self) {
    accumulate(g, ia, g.grad(self), -1.0);
  });
}

Var tanh(Var a) {
  Tensor out = a.value();
  for (auto& v : out.values()) v = std::tanh(v);
  const int ia = a.id();
  Var inputs[] = {a};
  return a.graph().record(std::move(out), inputs, [ia](Graph& g, int self) {
    if (!g.requires_grad(ia)) return;
    const auto& G = g.grad(self);
    const auto& Y = g.value(self);
    auto& gA = g.grad(ia);
    for (std::size_t i = 0; i < G.size(); ++i) gA[i] += G[i] * (1.0 - Y[i] * Y[i]);
  });
}

Var sigmoid(Var a) {
  Tensor out = a.value();
  for (auto& v : out.values()) {
    // Split by sign so exp() never overflows.
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  const int ia = a.id();
  Var inputs[] = {a};
  return a.graph().record(std::move(out), inputs, [ia](Graph& g, int self) {
    if (!g.requires_grad(ia)) return;
    const auto& G = g.grad(self);
    const auto& Y = g.value(self);
    auto& gA = g.grad(ia);
    for (std::size_t i = 0; i < G.size(); ++i) gA[i] += G[i] * Y[i] * (1.0 - Y[i]);
  });
}

Var exp(Var a) {
  Tensor out = a.value();
  for (auto& v : out.values()) v = std::exp(v);
  const int ia = a.id();
  Var inputs[] = {a};
  return a.graph().record(std::move(out), inputs, [ia](Graph& g, int self) {
    if (!g.requires_grad(ia)) return;
    const auto& G = g.grad(self);
    const auto& Y = g.value(self);
    auto& gA = g.grad(ia);
    for (std::size_t i = 0; i < G.size(); ++i) gA[i] += G[i] * Y[i];
  });
}

Var log(Var a) {
  Tensor out = a.value();
  for (auto& v : out.values()) {
    if (!(v > 0.0)) {
      throw DomainError("log of non-positive value " + std::to_string(v));
    }
    v = std::log(v);
  }
  const int ia = a.id();
  Var inputs[] = {a};
  return a.graph().record(std::move(out), inputs, [ia](Graph& g, int self) {
    if (!g.requires_grad(ia)) return;
    const auto& G = g.grad(self);
    const auto& X = g.value(ia);
    auto& gA = g.grad(ia);
    for (std::size_t i = 0; i < G.size(); ++i) gA[i] += G[i] / X[i];
  });
}

// ---- reductions --------------------------------------------------------------

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  const int ia = a.id();
  Var inputs[] = {a};
  return a.graph().record(Tensor::scalar(total), inputs, [ia](Graph& g, int self) {
    if (!g.requires_grad(ia)) return;
    const double G = g.grad(self)[0];
    for (auto& v : g.grad(ia).values()) v += G;
  });
}

Var dot(Var a, Var b) {
  require_same_shape("dot", a.value(), b.value());
  const auto& A = a.value();
  const auto& B = b.value();
  double total = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) total += A[i] * B[i];
  const int ia = a.id(), ib = b.id();
  Var inputs[] = {a, b};
  return a.graph().record(Tensor::scalar(total), inputs, [ia, ib](Graph& g, int self) {
    const double G = g.grad(self)[0];
    accumulate(g, ia, g.value(ib), G);
    accumulate(g, ib, g.value(ia), G);
  });
}

Var pick(Var a, std::size_t index) {
  const auto& A = a.value();
  if (index >= A.size()) {
    throw DimensionError("pick: index " + std::to_string(index) +
                         " out of range for shape " + shape_to_string(A.shape()));
  }
  const int ia = a.id();
  Var inputs[] = {a};
  return a.graph().record(Tensor::scalar(A[index]), inputs,
                          [ia, index](Graph& g, int self) {
                            if (!g.requires_grad(ia)) return;
                            g.grad(ia)[index] += g.grad(self)[0];
                          });
}

Var average(std::span<const Var> parts) {
  auto& graph = graph_of(parts);
  Tensor out = parts.front().value();
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const auto& v = parts[p].value();
    require_same_shape("average", out, v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(parts.size());
  for (auto& v : out.values()) v *= inv;
  std::vector<int> ids;
  for (const auto& p : parts) ids.push_back(p.id());
  return graph.record(std::move(out), parts, [ids, inv](Graph& g, int self) {
    const auto& G = g.grad(self);
    for (int id : ids) accumulate(g, id, G, inv);
  });
}

// ---- structural ----------------------------------------------------------------

Var concat(std::span<const Var> parts, std::size_t axis) {
  auto& graph = graph_of(parts);
  if (parts.size() == 1) return parts.front();
  const auto& first = parts.front().value();
  const std::size_t rank = first.rank();
  if (axis >= rank) {
    throw DimensionError("concat: axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(rank));
  }
  Shape out_shape = first.shape();
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const auto& s = p.value().shape();
    if (s.size() != rank) {
      throw DimensionError("concat: rank mismatch " + shape_to_string(first.shape()) +
                           " vs " + shape_to_string(s));
    }
    for (std::size_t d = 0; d < rank; ++d) {
      if (d != axis && s[d] != first.shape()[d]) {
        throw DimensionError("concat: incompatible shapes " +
                             shape_to_string(first.shape()) + " and " +
                             shape_to_string(s) + " along axis " +
                             std::to_string(axis));
      }
    }
    out_shape[axis] += s[axis];
  }
  // View each tensor as [outer x (dim_axis * inner)] blocks.
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= out_shape[d];
  for (std::size_t d = axis + 1; d < rank; ++d) inner *= out_shape[d];
  const std::size_t out_stride = out_shape[axis] * inner;

  Tensor out(out_shape);
  std::vector<int> ids;
  std::vector<std::size_t> offsets, widths;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const auto& v = p.value();
    const std::size_t width = v.shape()[axis] * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(v.data() + o * width, width, out.data() + o * out_stride + offset);
    }
    ids.push_back(p.id());
    offsets.push_back(offset);
    widths.push_back(width);
    offset += width;
  }
  return graph.record(std::move(out), parts,
                      [ids, offsets, widths, outer, out_stride](Graph& g, int self) {
                        const auto& G = g.grad(self);
                        for (std::size_t p = 0; p < ids.size(); ++p) {
                          if (!g.requires_grad(ids[p])) continue;
                          auto& dst = g.grad(ids[p]);
                          for (std::size_t o = 0; o < outer; ++o) {
                            const double* src = G.data() + o * out_stride + offsets[p];
                            double* d = dst.data() + o * widths[p];
                            for (std::size_t i = 0; i < widths[p]; ++i) d[i] += src[i];
                          }
                        }
                      });
}

Var stack(std::span<const Var> rows) {
  auto& graph = graph_of(rows);
  const auto& first = rows.front().value();
  require_rank("stack", first, 1);
  const std::size_t cols = first.size();
  Tensor out({rows.size(), cols});
  std::vector<int> ids;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& v = rows[r].value();
    require_same_shape("stack", first, v);
    std::copy_n(v.data(), cols, out.data() + r * cols);
    ids.push_back(rows[r].id());
  }
  return graph.record(std::move(out), rows, [ids, cols](Graph& g, int self) {
    const auto& G = g.grad(self);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (!g.requires_grad(ids[r])) continue;
      double* dst = g.grad(ids[r]).data();
      const double* src = G.data() + r * cols;
      for (std::size_t j = 0; j < cols; ++j) dst[j] += src[j];
    }
  });
}

Var row(Var table, std::size_t index) {
  const auto& T = table.value();
  require_rank("row", T, 2);
  if (index >= T.dim(0)) {
    throw DimensionError("row: index " + std::to_string(index) +
                         " out of range for " + shape_to_string(T.shape()));
  }
  const std::size_t cols = T.dim(1);
  Tensor out({cols});
  std::copy_n(T.data() + index * cols, cols, out.data());
  const int it = table.id();
  Var inputs[] = {table};
  return table.graph().record(std::move(out), inputs,
                              [it, index, cols](Graph& g, int self) {
                                if (!g.requires_grad(it)) return;
                                const auto& G = g.grad(self);
                                double* dst = g.grad(it).data() + index * cols;
                                for (std::size_t j = 0; j < cols; ++j) dst[j] += G[j];
                              });
}

Var slice(Var a, std::size_t offset, std::size_t length) {
  const auto& A = a.value();
  require_rank("slice", A, 1);
  if (length == 0 || offset + length > A.size()) {
    throw DimensionError("slice: [" + std::to_string(offset) + ", " +
                         std::to_string(offset + length) + ") out of range for " +
                         shape_to_string(A.shape()));
  }
  Tensor out({length});
  std::copy_n(A.data() + offset, length, out.data());
  const int ia = a.id();
  Var inputs[] = {a};
  return a.graph().record(std::move(out), inputs,
                          [ia, offset, length](Graph& g, int self) {
                            if (!g.requires_grad(ia)) return;
                            const auto& G = g.grad(self);
                            double* dst = g.grad(ia).data() + offset;
                            for (std::size_t i = 0; i < length; ++i) dst[i] += G[i];
                          });
}

// ---- normalization ---------------------------------------------------------------

Var softmax(Var a) {
  const auto& A = a.value();
  require_rank("softmax", A, 1);
  Tensor out = A;
  const double mx = *std::max_element(out.values().begin(), out.values().end());
  double z = 0.0;
  for (auto& v : out.values()) {
    v = std::exp(v - mx);
    z += v;
  }
  for (auto& v : out.values()) v /= z;
  const int ia = a.id();
  Var inputs[] = {a};
  return a.graph().record(std::move(out), inputs, [ia](Graph& g, int self) {
    if (!g.requires_grad(ia)) return;
    const auto& G = g.grad(self);
    const auto& Y = g.value(self);
    double gy = 0.0;
    for (std::size_t i = 0; i < Y.size(); ++i) gy += G[i] * Y[i];
    auto& gA = g.grad(ia);
    for (std::size_t i = 0; i < Y.size(); ++i) gA[i] += Y[i] * (G[i] - gy);
  });
}

Var weighted_sum(Var weights, std::span<const Var> parts) {
  const auto& W = weights.value();
  require_rank("weighted_sum", W, 1);
  if (W.size() != parts.size()) {
    throw DimensionError("weighted_sum: " + std::to_string(W.size()) +
                         " weights for " + std::to_string(parts.size()) + " parts");
  }
  Tensor out(parts.front().value().shape());
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& v = parts[p].value();
    require_same_shape("weighted_sum", out, v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += W[p] * v[i];
  }
  std::vector<Var> inputs{weights};
  std::vector<int> ids;
  for (const auto& p : parts) {
    inputs.push_back(p);
    ids.push_back(p.id());
  }
  const int iw = weights.id();
  return weights.graph().record(std::move(out), inputs, [iw, ids](Graph& g, int self) {
    const auto& G = g.grad(self);
    const auto& W = g.value(iw);
    for (std::size_t p = 0; p < ids.size(); ++p) {
      accumulate(g, ids[p], G, W[p]);
      if (g.requires_grad(iw)) {
        const auto& v = g.value(ids[p]);
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) acc += G[i] * v[i];
        g.grad(iw)[p] += acc;
      }
    }
  });
}

Var softmax_cross_entropy(Var logits, std::size_t target) {
  const auto& A = logits.value();
  require_rank("softmax_cross_entropy", A, 1);
  if (target >= A.size()) {
    throw DimensionError("softmax_cross_entropy: target " + std::to_string(target) +
                         " out of range for " + shape_to_string(A.shape()));
  }
  const double mx = *std::max_element(A.values().begin(), A.values().end());
  double z = 0.0;
  for (double v : A.values()) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);
  const int ia = logits.id();
  Var inputs[] = {logits};
  return logits.graph().record(
      Tensor::scalar(log_z - A[target]), inputs, [ia, target, log_z](Graph& g, int self) {
        if (!g.requires_grad(ia)) return;
        const double G = g.grad(self)[0];
        const auto& A = g.value(ia);
        auto& gA = g.grad(ia);
        for (std::size_t i = 0; i < A.size(); ++i) {
          gA[i] += G * (std::exp(A[i] - log_z) - (i == target ? 1.0 : 0.0));
        }
      });
}

}  // namespace trimod
