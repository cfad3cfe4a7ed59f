#include "e2eslu/diffengine/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "e2eslu/diffengine/blas.hpp"
#include "e2eslu/errors.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

namespace {

Graph& graph_of(Var v) {
  if (!v.graph) throw ContractError("operation on an unbound Var");
  return *v.graph;
}

std::size_t last_dim(const Shape& s) { return s.empty() ? 1 : s.back(); }

std::size_t row_count(const Shape& s) { return numel(s) / last_dim(s); }

std::size_t normalize_axis(int axis, std::size_t rank) {
  const int r = static_cast<int>(rank);
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for rank " +
                         std::to_string(rank));
  }
  return static_cast<std::size_t>(a);
}

bool is_suffix(const Shape& big, const Shape& small) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

// outer x n x inner decomposition around `axis`.
struct AxisSplit {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.n = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

enum class BinaryKind { kAdd, kSub, kMul };

Var binary(Var a, Var b, BinaryKind kind, const char* name) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (!(x.shape() == y.shape() || is_suffix(x.shape(), y.shape()))) {
    throw DimensionError(std::string(name) + ": incompatible shapes " + shape_string(x.shape()) +
                         " and " + shape_string(y.shape()));
  }
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  Tensor out(x.shape());
  const Real* px = x.data();
  const Real* py = y.data();
  Real* po = out.data();
  for (std::size_t i = 0; i < n; i += m) {
    for (std::size_t j = 0; j < m; ++j) {
      switch (kind) {
        case BinaryKind::kAdd: po[i + j] = px[i + j] + py[j]; break;
        case BinaryKind::kSub: po[i + j] = px[i + j] - py[j]; break;
        case BinaryKind::kMul: po[i + j] = px[i + j] * py[j]; break;
      }
    }
  }
  return g.record(std::move(out), {a, b}, [kind, m](AdjointContext& c) {
    auto go = c.out_grad();
    const std::size_t n = go.size();
    if (c.needs(0)) {
      auto ga = c.in_grad(0);
      if (kind == BinaryKind::kMul) {
        const Real* py = c.in(1).data();
        for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * py[i % m];
      } else {
        for (std::size_t i = 0; i < n; ++i) ga[i] += go[i];
      }
    }
    if (c.needs(1)) {
      auto gb = c.in_grad(1);
      if (kind == BinaryKind::kMul) {
        const Real* px = c.in(0).data();
        for (std::size_t i = 0; i < n; ++i) gb[i % m] += go[i] * px[i];
      } else {
        const Real sign = kind == BinaryKind::kSub ? Real(-1) : Real(1);
        for (std::size_t i = 0; i < n; ++i) gb[i % m] += sign * go[i];
      }
    }
  });
}

}  // namespace

Var add(Var a, Var b) { return binary(a, b, BinaryKind::kAdd, "add"); }
Var sub(Var a, Var b) { return binary(a, b, BinaryKind::kSub, "sub"); }
Var mul(Var a, Var b) { return binary(a, b, BinaryKind::kMul, "mul"); }

Var scale(Var a, Real factor) {
  Graph& g = graph_of(a);
  Tensor out = a.value();
  out.set_requires_grad(false);
  for (auto& v : out.values()) v *= factor;
  return g.record(std::move(out), {a}, [factor](AdjointContext& c) {
    auto go = c.out_grad();
    auto ga = c.in_grad(0);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += factor * go[i];
  });
}

Var relu(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > Real(0) ? x[i] : Real(0);
  return g.record(std::move(out), {a}, [](AdjointContext& c) {
    auto go = c.out_grad();
    auto ga = c.in_grad(0);
    const Real* px = c.in(0).data();
    for (std::size_t i = 0; i < go.size(); ++i) {
      if (px[i] > Real(0)) ga[i] += go[i];
    }
  });
}

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.rank() < 2 || y.rank() != 2 || x.shape().back() != y.shape()[0]) {
    throw DimensionError("matmul: cannot multiply " + shape_string(x.shape()) + " by " +
                         shape_string(y.shape()));
  }
  const std::size_t m = row_count(x.shape());
  const std::size_t k = y.shape()[0];
  const std::size_t n = y.shape()[1];
  Shape out_shape = x.shape();
  out_shape.back() = n;
  Tensor out(out_shape);
  blas::gemm(false, false, m, n, k, Real(1), x.data(), k, y.data(), n, Real(0), out.data(), n);
  return g.record(std::move(out), {a, b}, [m, k, n](AdjointContext& c) {
    const Real* go = c.out_grad().data();
    if (c.needs(0)) {
      blas::gemm(false, true, m, k, n, Real(1), go, n, c.in(1).data(), n, Real(1),
                 c.in_grad(0).data(), k);
    }
    if (c.needs(1)) {
      blas::gemm(true, false, k, n, m, Real(1), c.in(0).data(), k, go, n, Real(1),
                 c.in_grad(1).data(), n);
    }
  });
}

Var softmax(Var x, int axis) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  const std::size_t ax = normalize_axis(axis, in.rank());
  const AxisSplit sp = split_axis(in.shape(), ax);
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (std::isnan(in[i]) || in[i] == std::numeric_limits<Real>::infinity()) {
      throw NumericError("softmax: non-finite input");
    }
  }
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t r = 0; r < sp.inner; ++r) {
      const std::size_t base = o * sp.n * sp.inner + r;
      Real mx = -std::numeric_limits<Real>::infinity();
      for (std::size_t j = 0; j < sp.n; ++j) mx = std::max(mx, in[base + j * sp.inner]);
      if (mx == -std::numeric_limits<Real>::infinity()) {
        for (std::size_t j = 0; j < sp.n; ++j) out[base + j * sp.inner] = Real(0);
        continue;
      }
      Real total = 0;
      for (std::size_t j = 0; j < sp.n; ++j) {
        const Real e = std::exp(in[base + j * sp.inner] - mx);
        out[base + j * sp.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < sp.n; ++j) out[base + j * sp.inner] /= total;
    }
  }
  return g.record(std::move(out), {x}, [sp](AdjointContext& c) {
    auto go = c.out_grad();
    auto gx = c.in_grad(0);
    const Tensor& y = c.out();
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t r = 0; r < sp.inner; ++r) {
        const std::size_t base = o * sp.n * sp.inner + r;
        Real dot = 0;
        for (std::size_t j = 0; j < sp.n; ++j) {
          dot += go[base + j * sp.inner] * y[base + j * sp.inner];
        }
        for (std::size_t j = 0; j < sp.n; ++j) {
          const std::size_t idx = base + j * sp.inner;
          gx[idx] += y[idx] * (go[idx] - dot);
        }
      }
    }
  });
}

Var cross_entropy(Var logits, std::span<const int> targets, int ignore_index) {
  Graph& g = graph_of(logits);
  const Tensor& z = logits.value();
  const std::size_t classes = last_dim(z.shape());
  const std::size_t rows = row_count(z.shape());
  if (targets.size() != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(rows) + " rows");
  }
  std::vector<Real> lse(rows, Real(0));
  double total = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const int t = targets[i];
    if (t == ignore_index) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= classes) {
      throw IndexError("cross_entropy: target " + std::to_string(t) + " outside [0," +
                       std::to_string(classes) + ")");
    }
    const Real* row = z.data() + i * classes;
    const Real mx = *std::max_element(row, row + classes);
    Real s = 0;
    for (std::size_t j = 0; j < classes; ++j) s += std::exp(row[j] - mx);
    lse[i] = mx + std::log(s);
    total += static_cast<double>(lse[i] - row[t]);
    ++count;
  }
  const Real value = count ? static_cast<Real>(total / static_cast<double>(count)) : Real(0);
  std::vector<int> tg(targets.begin(), targets.end());
  return g.record(Tensor::scalar(value), {logits},
                  [tg = std::move(tg), lse = std::move(lse), classes, count,
                   ignore_index](AdjointContext& c) {
                    if (count == 0) return;
                    const Real w = c.out_grad()[0] / static_cast<Real>(count);
                    auto gz = c.in_grad(0);
                    const Real* z = c.in(0).data();
                    for (std::size_t i = 0; i < tg.size(); ++i) {
                      if (tg[i] == ignore_index) continue;
                      const std::size_t base = i * classes;
                      for (std::size_t j = 0; j < classes; ++j) {
                        gz[base + j] += w * std::exp(z[base + j] - lse[i]);
                      }
                      gz[base + static_cast<std::size_t>(tg[i])] -= w;
                    }
                  });
}

Var layer_norm(Var x, Var gain, Var bias, Real eps) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  const std::size_t d = last_dim(in.shape());
  if (gain.value().size() != d || bias.value().size() != d) {
    throw DimensionError("layer_norm: gain/bias must have " + std::to_string(d) + " elements");
  }
  const std::size_t rows = row_count(in.shape());
  Tensor out(in.shape());
  std::vector<Real> mean(rows), rstd(rows);
  const Real* pg = gain.value().data();
  const Real* pb = bias.value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* row = in.data() + r * d;
    Real mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<Real>(d);
    Real var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<Real>(d);
    const Real rs = Real(1) / std::sqrt(var + eps);
    mean[r] = mu;
    rstd[r] = rs;
    Real* o = out.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) o[j] = (row[j] - mu) * rs * pg[j] + pb[j];
  }
  return g.record(std::move(out), {x, gain, bias},
                  [mean = std::move(mean), rstd = std::move(rstd), d, rows](AdjointContext& c) {
                    auto go = c.out_grad();
                    const Real* px = c.in(0).data();
                    const Real* pg = c.in(1).data();
                    auto gx = c.in_grad(0);
                    auto gg = c.in_grad(1);
                    auto gb = c.in_grad(2);
                    std::vector<Real> xhat(d), dxhat(d);
                    for (std::size_t r = 0; r < rows; ++r) {
                      const Real* row = px + r * d;
                      const Real* grow = go.data() + r * d;
                      Real s1 = 0, s2 = 0;
                      for (std::size_t j = 0; j < d; ++j) {
                        xhat[j] = (row[j] - mean[r]) * rstd[r];
                        dxhat[j] = grow[j] * pg[j];
                        s1 += dxhat[j];
                        s2 += dxhat[j] * xhat[j];
                        if (!gg.empty()) gg[j] += grow[j] * xhat[j];
                        if (!gb.empty()) gb[j] += grow[j];
                      }
                      if (gx.empty()) continue;
                      const Real inv_d = Real(1) / static_cast<Real>(d);
                      for (std::size_t j = 0; j < d; ++j) {
                        gx[r * d + j] += rstd[r] * (dxhat[j] - s1 * inv_d - xhat[j] * s2 * inv_d);
                      }
                    }
                  });
}

Var embedding_rows(Var table, std::span<const int> ids) {
  Graph& g = graph_of(table);
  const Tensor& t = table.value();
  if (t.rank() != 2) throw DimensionError("embedding_rows: table must be rank 2");
  const std::size_t vocab = t.shape()[0];
  const std::size_t d = t.shape()[1];
  if (ids.empty()) throw DimensionError("embedding_rows: empty id list");
  Tensor out(Shape{ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw IndexError("embedding_rows: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(vocab) + " rows");
    }
    std::copy_n(t.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return g.record(std::move(out), {table}, [idv = std::move(idv), d](AdjointContext& c) {
    auto go = c.out_grad();
    auto gt = c.in_grad(0);
    for (std::size_t i = 0; i < idv.size(); ++i) {
      Real* dst = gt.data() + static_cast<std::size_t>(idv[i]) * d;
      const Real* src = go.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

std::size_t conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride) {
  if (stride == 0 || kernel == 0) throw ConfigError("conv1d: kernel and stride must be positive");
  if (length < kernel) return 0;
  return (length - kernel) / stride + 1;
}

Var conv1d(Var x, Var kernel, std::size_t stride) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  const Tensor& w = kernel.value();
  if ((in.rank() != 2 && in.rank() != 3) || w.rank() != 3 || in.shape().back() != w.shape()[1]) {
    throw DimensionError("conv1d: input " + shape_string(in.shape()) + " incompatible with kernel " +
                         shape_string(w.shape()));
  }
  const std::size_t batch = in.rank() == 3 ? in.shape()[0] : 1;
  const std::size_t length = in.shape()[in.rank() - 2];
  const std::size_t cin = w.shape()[1];
  const std::size_t width = w.shape()[0];
  const std::size_t cout = w.shape()[2];
  const std::size_t out_len = conv_output_length(length, width, stride);
  if (out_len == 0) {
    throw DimensionError("conv1d: input length " + std::to_string(length) +
                         " shorter than kernel " + std::to_string(width));
  }
  const std::size_t row = width * cin;
  auto cols = std::make_shared<std::vector<Real>>(batch * out_len * row);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < out_len; ++t) {
      std::copy_n(in.data() + (b * length + t * stride) * cin, row,
                  cols->data() + (b * out_len + t) * row);
    }
  }
  Shape out_shape = in.rank() == 3 ? Shape{batch, out_len, cout} : Shape{out_len, cout};
  Tensor out(out_shape);
  blas::gemm(false, false, batch * out_len, cout, row, Real(1), cols->data(), row, w.data(), cout,
             Real(0), out.data(), cout);
  return g.record(std::move(out), {x, kernel},
                  [cols, batch, length, out_len, row, cin, cout, stride](AdjointContext& c) {
                    const Real* go = c.out_grad().data();
                    const std::size_t m = batch * out_len;
                    if (c.needs(1)) {
                      blas::gemm(true, false, row, cout, m, Real(1), cols->data(), row, go, cout,
                                 Real(1), c.in_grad(1).data(), cout);
                    }
                    if (c.needs(0)) {
                      std::vector<Real> dcols(m * row);
                      blas::gemm(false, true, m, row, cout, Real(1), go, cout, c.in(1).data(),
                                 cout, Real(0), dcols.data(), row);
                      auto gx = c.in_grad(0);
                      for (std::size_t b = 0; b < batch; ++b) {
                        for (std::size_t t = 0; t < out_len; ++t) {
                          Real* dst = gx.data() + (b * length + t * stride) * cin;
                          const Real* src = dcols.data() + (b * out_len + t) * row;
                          for (std::size_t j = 0; j < row; ++j) dst[j] += src[j];
                        }
                      }
                    }
                  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  Graph& g = graph_of(parts[0]);
  const Shape& first = parts[0].shape();
  const std::size_t rows = row_count(first);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size() || !std::equal(s.begin(), s.end() - 1, first.begin())) {
      throw DimensionError("concat: leading shapes differ: " + shape_string(first) + " vs " +
                           shape_string(s));
    }
    widths.push_back(last_dim(s));
    total += widths.back();
  }
  Shape out_shape = first;
  out_shape.back() = total;
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Real* src = parts[p].value().data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(src + r * widths[p], widths[p], out.data() + r * total + offset);
    }
    offset += widths[p];
  }
  return g.record(std::move(out), parts, [widths, rows, total](AdjointContext& c) {
    auto go = c.out_grad();
    std::size_t offset = 0;
    for (std::size_t p = 0; p < widths.size(); ++p) {
      if (c.needs(p)) {
        auto gp = c.in_grad(p);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < widths[p]; ++j) {
            gp[r * widths[p] + j] += go[r * total + offset + j];
          }
        }
      }
      offset += widths[p];
    }
  });
}

Var mean_axis(Var x, int axis) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  const std::size_t ax = normalize_axis(axis, in.rank());
  const AxisSplit sp = split_axis(in.shape(), ax);
  Shape out_shape = in.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
  Tensor out(out_shape);
  const Real inv = Real(1) / static_cast<Real>(sp.n);
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t j = 0; j < sp.n; ++j) {
      for (std::size_t r = 0; r < sp.inner; ++r) {
        out[o * sp.inner + r] += in[(o * sp.n + j) * sp.inner + r] * inv;
      }
    }
  }
  return g.record(std::move(out), {x}, [sp, inv](AdjointContext& c) {
    auto go = c.out_grad();
    auto gx = c.in_grad(0);
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t j = 0; j < sp.n; ++j) {
        for (std::size_t r = 0; r < sp.inner; ++r) {
          gx[(o * sp.n + j) * sp.inner + r] += go[o * sp.inner + r] * inv;
        }
      }
    }
  });
}

Var transpose(Var x) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  if (in.rank() < 2) throw DimensionError("transpose: rank must be at least 2");
  const std::size_t rows = in.shape()[in.rank() - 2];
  const std::size_t cols = in.shape().back();
  const std::size_t batch = in.size() / (rows * cols);
  Shape out_shape = in.shape();
  std::swap(out_shape[in.rank() - 2], out_shape[in.rank() - 1]);
  Tensor out(out_shape);
  for (std::size_t b = 0; b < batch; ++b) {
    const Real* src = in.data() + b * rows * cols;
    Real* dst = out.data() + b * rows * cols;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
    }
  }
  return g.record(std::move(out), {x}, [batch, rows, cols](AdjointContext& c) {
    auto go = c.out_grad();
    auto gx = c.in_grad(0);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = b * rows * cols;
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) gx[off + i * cols + j] += go[off + j * rows + i];
      }
    }
  });
}

Var slice(Var x, int axis, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  const std::size_t ax = normalize_axis(axis, in.rank());
  const AxisSplit sp = split_axis(in.shape(), ax);
  if (begin >= end || end > sp.n) {
    throw DimensionError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") invalid for extent " + std::to_string(sp.n));
  }
  const std::size_t len = end - begin;
  Shape out_shape = in.shape();
  out_shape[ax] = len;
  Tensor out(out_shape);
  for (std::size_t o = 0; o < sp.outer; ++o) {
    std::copy_n(in.data() + (o * sp.n + begin) * sp.inner, len * sp.inner,
                out.data() + o * len * sp.inner);
  }
  return g.record(std::move(out), {x}, [sp, begin, len](AdjointContext& c) {
    auto go = c.out_grad();
    auto gx = c.in_grad(0);
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t i = 0; i < len * sp.inner; ++i) {
        gx[(o * sp.n + begin) * sp.inner + i] += go[o * len * sp.inner + i];
      }
    }
  });
}

Var masked_fill(Var x, std::span<const std::uint8_t> mask, Real fill) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  if (mask.size() != in.size()) throw DimensionError("masked_fill: mask size mismatch");
  Tensor out = in;
  out.set_requires_grad(false);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (mask[i]) out[i] = fill;
  }
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  return g.record(std::move(out), {x}, [m = std::move(m)](AdjointContext& c) {
    auto go = c.out_grad();
    auto gx = c.in_grad(0);
    for (std::size_t i = 0; i < go.size(); ++i) {
      if (!m[i]) gx[i] += go[i];
    }
  });
}

Var reshape(Var x, Shape shape) {
  Graph& g = graph_of(x);
  Tensor out = x.value().reshaped(std::move(shape));
  return g.record(std::move(out), {x}, [](AdjointContext& c) {
    auto go = c.out_grad();
    auto gx = c.in_grad(0);
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
  });
}

Var sum(Var x) {
  Graph& g = graph_of(x);
  Real s = 0;
  for (Real v : x.value().values()) s += v;
  return g.record(Tensor::scalar(s), {x}, [](AdjointContext& c) {
    const Real go = c.out_grad()[0];
    for (auto& v : c.in_grad(0)) v += go;
  });
}

Var mean(Var x) { return scale(sum(x), Real(1) / static_cast<Real>(x.size())); }

Var masked_mean(Var x, std::span<const std::uint8_t> mask) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  if (in.rank() != 3) throw DimensionError("masked_mean: expected [B, L, d] input");
  const std::size_t batch = in.shape()[0];
  const std::size_t len = in.shape()[1];
  const std::size_t d = in.shape()[2];
  if (mask.size() != batch * len) throw DimensionError("masked_mean: mask must be [B, L]");
  std::vector<Real> inv(batch);
  Tensor out(Shape{batch, d});
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t count = 0;
    for (std::size_t t = 0; t < len; ++t) count += mask[b * len + t] ? 1 : 0;
    if (count == 0) throw ContractError("masked_mean: sequence with no unmasked position");
    inv[b] = Real(1) / static_cast<Real>(count);
    for (std::size_t t = 0; t < len; ++t) {
      if (!mask[b * len + t]) continue;
      const Real* src = in.data() + (b * len + t) * d;
      for (std::size_t j = 0; j < d; ++j) out[b * d + j] += src[j] * inv[b];
    }
  }
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  return g.record(std::move(out), {x}, [m = std::move(m), inv = std::move(inv), batch, len,
                                        d](AdjointContext& c) {
    auto go = c.out_grad();
    auto gx = c.in_grad(0);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t t = 0; t < len; ++t) {
        if (!m[b * len + t]) continue;
        for (std::size_t j = 0; j < d; ++j) gx[(b * len + t) * d + j] += go[b * d + j] * inv[b];
      }
    }
  });
}

Var attention(Var q, Var k, Var v, std::size_t heads, std::span<const std::uint8_t> key_mask,
              bool causal) {
  Graph& g = graph_of(q);
  const Tensor& tq = q.value();
  const Tensor& tk = k.value();
  const Tensor& tv = v.value();
  if (tq.rank() != 3 || tk.rank() != 3 || tk.shape() != tv.shape() ||
      tq.shape()[0] != tk.shape()[0] || tq.shape()[2] != tk.shape()[2]) {
    throw DimensionError("attention: incompatible q " + shape_string(tq.shape()) + ", k " +
                         shape_string(tk.shape()) + ", v " + shape_string(tv.shape()));
  }
  const std::size_t batch = tq.shape()[0];
  const std::size_t lq = tq.shape()[1];
  const std::size_t lk = tk.shape()[1];
  const std::size_t d = tq.shape()[2];
  if (heads == 0 || d % heads != 0) throw ConfigError("attention: model dim not divisible by heads");
  if (!key_mask.empty() && key_mask.size() != batch * lk) {
    throw DimensionError("attention: key mask must be [B, Lk]");
  }
  const std::size_t dh = d / heads;
  const Real sc = Real(1) / std::sqrt(static_cast<Real>(dh));
  auto probs = std::make_shared<std::vector<Real>>(batch * heads * lq * lk);
  Tensor out(tq.shape());
  const Real neg_inf = -std::numeric_limits<Real>::infinity();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      Real* s = probs->data() + (b * heads + h) * lq * lk;
      const Real* qb = tq.data() + b * lq * d + h * dh;
      const Real* kb = tk.data() + b * lk * d + h * dh;
      const Real* vb = tv.data() + b * lk * d + h * dh;
      blas::gemm(false, true, lq, lk, dh, sc, qb, d, kb, d, Real(0), s, lk);
      for (std::size_t i = 0; i < lq; ++i) {
        Real* row = s + i * lk;
        Real mx = neg_inf;
        for (std::size_t j = 0; j < lk; ++j) {
          const bool masked = (!key_mask.empty() && !key_mask[b * lk + j]) || (causal && j > i);
          if (masked) row[j] = neg_inf;
          mx = std::max(mx, row[j]);
        }
        if (mx == neg_inf) {
          std::fill(row, row + lk, Real(0));
          continue;
        }
        Real total = 0;
        for (std::size_t j = 0; j < lk; ++j) {
          row[j] = row[j] == neg_inf ? Real(0) : std::exp(row[j] - mx);
          total += row[j];
        }
        for (std::size_t j = 0; j < lk; ++j) row[j] /= total;
      }
      blas::gemm(false, false, lq, dh, lk, Real(1), s, lk, vb, d, Real(0),
                 out.data() + b * lq * d + h * dh, d);
    }
  }
  return g.record(std::move(out), {q, k, v},
                  [probs, batch, heads, lq, lk, d, dh, sc](AdjointContext& c) {
                    const Real* go = c.out_grad().data();
                    const Real* pq = c.in(0).data();
                    const Real* pk = c.in(1).data();
                    const Real* pv = c.in(2).data();
                    Real* gq = c.needs(0) ? c.in_grad(0).data() : nullptr;
                    Real* gk = c.needs(1) ? c.in_grad(1).data() : nullptr;
                    Real* gv = c.needs(2) ? c.in_grad(2).data() : nullptr;
                    std::vector<Real> dp(lq * lk);
                    for (std::size_t b = 0; b < batch; ++b) {
                      for (std::size_t h = 0; h < heads; ++h) {
                        const Real* p = probs->data() + (b * heads + h) * lq * lk;
                        const std::size_t qo = b * lq * d + h * dh;
                        const std::size_t ko = b * lk * d + h * dh;
                        blas::gemm(false, true, lq, lk, dh, Real(1), go + qo, d, pv + ko, d,
                                   Real(0), dp.data(), lk);
                        if (gv) {
                          blas::gemm(true, false, lk, dh, lq, Real(1), p, lk, go + qo, d, Real(1),
                                     gv + ko, d);
                        }
                        for (std::size_t i = 0; i < lq; ++i) {
                          Real dot = 0;
                          for (std::size_t j = 0; j < lk; ++j) dot += dp[i * lk + j] * p[i * lk + j];
                          for (std::size_t j = 0; j < lk; ++j) {
                            dp[i * lk + j] = p[i * lk + j] * (dp[i * lk + j] - dot);
                          }
                        }
                        if (gq) {
                          blas::gemm(false, false, lq, dh, lk, sc, dp.data(), lk, pk + ko, d,
                                     Real(1), gq + qo, d);
                        }
                        if (gk) {
                          blas::gemm(true, false, lk, dh, lq, sc, dp.data(), lk, pq + qo, d,
                                     Real(1), gk + ko, d);
                        }
                      }
                    }
                  });
}

Var dropout(Var x, Real p, Rng& rng) {
  if (p <= Real(0)) return x;
  if (p >= Real(1)) throw ConfigError("dropout probability must be below 1");
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  const Real keep_scale = Real(1) / (Real(1) - p);
  std::vector<Real> factor(in.size());
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) {
    factor[i] = rng.uniform() < static_cast<double>(p) ? Real(0) : keep_scale;
    out[i] = in[i] * factor[i];
  }
  return g.record(std::move(out), {x}, [factor = std::move(factor)](AdjointContext& c) {
    auto go = c.out_grad();
    auto gx = c.in_grad(0);
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * factor[i];
  });
}

Var gather_cols(Var x, std::span<const int> idx, std::size_t k) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  const std::size_t cols = last_dim(in.shape());
  const std::size_t rows = row_count(in.shape());
  if (idx.size() != rows * k) throw DimensionError("gather_cols: index count must be rows * k");
  Tensor out(Shape{rows, k});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      const int c = idx[r * k + j];
      if (c < 0 || static_cast<std::size_t>(c) >= cols) throw IndexError("gather_cols: bad column");
      out[r * k + j] = in[r * cols + static_cast<std::size_t>(c)];
    }
  }
  std::vector<int> iv(idx.begin(), idx.end());
  return g.record(std::move(out), {x}, [iv = std::move(iv), rows, cols, k](AdjointContext& c) {
    auto go = c.out_grad();
    auto gx = c.in_grad(0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < k; ++j) {
        gx[r * cols + static_cast<std::size_t>(iv[r * k + j])] += go[r * k + j];
      }
    }
  });
}

Var mix_rows(Var table, std::span<const int> ids, Var weights) {
  Graph& g = graph_of(table);
  const Tensor& t = table.value();
  const Tensor& w = weights.value();
  if (t.rank() != 2 || w.rank() != 2 || ids.size() != w.size()) {
    throw DimensionError("mix_rows: table " + shape_string(t.shape()) + ", weights " +
                         shape_string(w.shape()) + ", " + std::to_string(ids.size()) + " ids");
  }
  const std::size_t vocab = t.shape()[0];
  const std::size_t d = t.shape()[1];
  const std::size_t n = w.shape()[0];
  const std::size_t k = w.shape()[1];
  Tensor out(Shape{n, d});
  for (std::size_t i = 0; i < n; ++i) {
    Real* o = out.data() + i * d;
    for (std::size_t j = 0; j < k; ++j) {
      const int id = ids[i * k + j];
      if (id < 0 || static_cast<std::size_t>(id) >= vocab) throw IndexError("mix_rows: bad row id");
      const Real wt = w[i * k + j];
      const Real* row = t.data() + static_cast<std::size_t>(id) * d;
      for (std::size_t c = 0; c < d; ++c) o[c] += wt * row[c];
    }
  }
  std::vector<int> iv(ids.begin(), ids.end());
  return g.record(std::move(out), {table, weights},
                  [iv = std::move(iv), n, k, d](AdjointContext& c) {
                    auto go = c.out_grad();
                    const Real* pt = c.in(0).data();
                    const Real* pw = c.in(1).data();
                    auto gt = c.in_grad(0);
                    auto gw = c.in_grad(1);
                    for (std::size_t i = 0; i < n; ++i) {
                      const Real* gi = go.data() + i * d;
                      for (std::size_t j = 0; j < k; ++j) {
                        const std::size_t id = static_cast<std::size_t>(iv[i * k + j]);
                        if (!gw.empty()) {
                          Real dot = 0;
                          for (std::size_t c2 = 0; c2 < d; ++c2) dot += gi[c2] * pt[id * d + c2];
                          gw[i * k + j] += dot;
                        }
                        if (!gt.empty()) {
                          const Real wt = pw[i * k + j];
                          for (std::size_t c2 = 0; c2 < d; ++c2) gt[id * d + c2] += wt * gi[c2];
                        }
                      }
                    }
                  });
}

Var straight_through(Var soft, Tensor hard) {
  Graph& g = graph_of(soft);
  if (hard.shape() != soft.shape()) {
    throw DimensionError("straight_through: hard " + shape_string(hard.shape()) +
                         " vs soft " + shape_string(soft.shape()));
  }
  hard.set_requires_grad(false);
  return g.record(std::move(hard), {soft}, [](AdjointContext& c) {
    auto go = c.out_grad();
    auto gs = c.in_grad(0);
    for (std::size_t i = 0; i < go.size(); ++i) gs[i] += go[i];
  });
}

std::vector<int> argmax_rows(const Tensor& x) {
  const std::size_t cols = last_dim(x.shape());
  const std::size_t rows = row_count(x.shape());
  std::vector<int> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* row = x.data() + r * cols;
    out[r] = static_cast<int>(std::max_element(row, row + cols) - row);
  }
  return out;
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
