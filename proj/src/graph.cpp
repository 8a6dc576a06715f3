#include "semgan/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "semgan/kernels.hpp"

namespace semgan {
namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

// Unfolds one sample (C x H x W) into a (C*k*k) x (Ho*Wo) matrix.
template <typename T>
void im2col(const T* x, int channels, int height, int width, int k, int stride,
            int pad, int out_h, int out_w, T* col) {
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    const T* xc = x + static_cast<std::size_t>(c) * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = col + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          T* dst = row + static_cast<std::size_t>(oy) * out_w;
          if (iy < 0 || iy >= height) {
            std::fill(dst, dst + out_w, T{0});
            continue;
          }
          const T* src = xc + static_cast<std::size_t>(iy) * width;
          if (stride == 1) {
            const int ox_lo = std::max(0, pad - kx);
            const int ox_hi = std::min(out_w, width + pad - kx);
            for (int ox = 0; ox < ox_lo && ox < out_w; ++ox) dst[ox] = T{0};
            for (int ox = ox_lo; ox < ox_hi; ++ox) dst[ox] = src[ox - pad + kx];
            for (int ox = std::max(ox_hi, 0); ox < out_w; ++ox) dst[ox] = T{0};
          } else {
            for (int ox = 0; ox < out_w; ++ox) {
              const int ix = ox * stride - pad + kx;
              dst[ox] = (ix >= 0 && ix < width) ? src[ix] : T{0};
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, int channels, int height, int width, int k,
            int stride, int pad, int out_h, int out_w, T* dx) {
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    T* xc = dx + static_cast<std::size_t>(c) * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row =
            col + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= height) continue;
          T* dst = xc + static_cast<std::size_t>(iy) * width;
          const T* src = row + static_cast<std::size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < width) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
T clamp_prob(T p, T eps) {
  return std::min(std::max(p, eps), T{1} - eps);
}

}  // namespace

template <typename T>
Var Graph<T>::push(Tensor<T> value, std::vector<int> inputs,
                   std::function<void(int)> backward) {
  Node node;
  node.value = std::move(value);
  node.inputs = std::move(inputs);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Tensor<T>* Graph<T>::grad_sink(int id) {
  if (!relevant_[id]) return nullptr;
  Node& node = nodes_[id];
  if (node.grad.shape() != node.value.shape()) {
    node.grad = Tensor<T>(node.value.shape());
  }
  return &node.grad;
}

template <typename T>
Var Graph<T>::constant(Tensor<T> value) {
  return push(std::move(value), {}, nullptr);
}

template <typename T>
Var Graph<T>::param(Parameter<T>& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var{it->second};
  }
  Var v = push(p.value, {}, nullptr);
  nodes_[v.id].param = &p;
  param_nodes_.emplace(&p, v.id);
  return v;
}

template <typename T>
Var Graph<T>::conv2d(Var x, Var w, Var b, int stride, int pad) {
  const Shape xs = value(x).shape();
  const Shape ws = value(w).shape();
  require(ws.h == ws.w, "conv2d: kernel must be square");
  require(ws.c == xs.c, "conv2d: input channels " + std::to_string(xs.c) +
                            " != kernel channels " + std::to_string(ws.c));
  require(value(b).size() == static_cast<std::size_t>(ws.n),
          "conv2d: bias size mismatch");
  const int k = ws.h;
  const int out_h = (xs.h + 2 * pad - k) / stride + 1;
  const int out_w = (xs.w + 2 * pad - k) / stride + 1;
  require(out_h > 0 && out_w > 0, "conv2d: output would be empty");
  const int cout = ws.n;
  const int kdim = xs.c * k * k;
  const int plane = out_h * out_w;
  const bool direct = k == 1 && stride == 1 && pad == 0;

  Tensor<T> out(Shape{xs.n, cout, out_h, out_w});
  std::vector<T> col(direct ? 0 : static_cast<std::size_t>(kdim) * plane);
  const T* wdata = value(w).data();
  const T* bdata = value(b).data();
  for (int n = 0; n < xs.n; ++n) {
    const T* xn = value(x).sample(n);
    const T* src = xn;
    if (!direct) {
      im2col(xn, xs.c, xs.h, xs.w, k, stride, pad, out_h, out_w, col.data());
      src = col.data();
    }
    T* on = out.sample(n);
    kernels::GemmArgs args;
    args.m = cout;
    args.n = plane;
    args.k = kdim;
    args.lda = kdim;
    args.ldb = plane;
    args.ldc = plane;
    kernels::gemm(args, wdata, src, on);
    for (int c = 0; c < cout; ++c) {
      T* oc = on + static_cast<std::size_t>(c) * plane;
      const T bias = bdata[c];
      for (int i = 0; i < plane; ++i) oc[i] += bias;
    }
  }

  return push(std::move(out), {x.id, w.id, b.id},
              [this, xid = x.id, wid = w.id, bid = b.id, xs, k, stride, pad,
               out_h, out_w, cout, kdim, plane, direct](int self) {
                const Tensor<T>& dy = upstream(self);
                Tensor<T>* dx = grad_sink(xid);
                Tensor<T>* dw = grad_sink(wid);
                Tensor<T>* db = grad_sink(bid);
                std::vector<T> col(direct ? 0
                                          : static_cast<std::size_t>(kdim) * plane);
                std::vector<T> dcol(
                    dx && !direct ? static_cast<std::size_t>(kdim) * plane : 0);
                const T* wdata = nodes_[wid].value.data();
                for (int n = 0; n < xs.n; ++n) {
                  const T* dyn = dy.sample(n);
                  if (db) {
                    for (int c = 0; c < cout; ++c) {
                      const T* row = dyn + static_cast<std::size_t>(c) * plane;
                      T acc{0};
                      for (int i = 0; i < plane; ++i) acc += row[i];
                      (*db)[c] += acc;
                    }
                  }
                  if (dw) {
                    const T* xn = nodes_[xid].value.sample(n);
                    const T* src = xn;
                    if (!direct) {
                      im2col(xn, xs.c, xs.h, xs.w, k, stride, pad, out_h, out_w,
                             col.data());
                      src = col.data();
                    }
                    kernels::GemmArgs args;
                    args.trans_b = kernels::Trans::kYes;
                    args.m = cout;
                    args.n = kdim;
                    args.k = plane;
                    args.lda = plane;
                    args.ldb = plane;
                    args.ldc = kdim;
                    args.accumulate = true;
                    kernels::gemm(args, dyn, src, dw->data());
                  }
                  if (dx) {
                    kernels::GemmArgs args;
                    args.trans_a = kernels::Trans::kYes;
                    args.m = kdim;
                    args.n = plane;
                    args.k = cout;
                    args.lda = kdim;
                    args.ldb = plane;
                    args.ldc = plane;
                    if (direct) {
                      args.accumulate = true;
                      kernels::gemm(args, wdata, dyn, dx->sample(n));
                    } else {
                      kernels::gemm(args, wdata, dyn, dcol.data());
                      col2im(dcol.data(), xs.c, xs.h, xs.w, k, stride, pad,
                             out_h, out_w, dx->sample(n));
                    }
                  }
                }
              });
}

template <typename T>
Var Graph<T>::upsample2x(Var x) {
  const Shape xs = value(x).shape();
  Tensor<T> out(Shape{xs.n, xs.c, xs.h * 2, xs.w * 2});
  const Tensor<T>& in = value(x);
  for (int n = 0; n < xs.n; ++n)
    for (int c = 0; c < xs.c; ++c)
      for (int y = 0; y < xs.h * 2; ++y)
        for (int xx = 0; xx < xs.w * 2; ++xx)
          out.at(n, c, y, xx) = in.at(n, c, y / 2, xx / 2);
  return push(std::move(out), {x.id}, [this, xid = x.id, xs](int self) {
    Tensor<T>* dx = grad_sink(xid);
    if (!dx) return;
    const Tensor<T>& dy = upstream(self);
    for (int n = 0; n < xs.n; ++n)
      for (int c = 0; c < xs.c; ++c)
        for (int y = 0; y < xs.h * 2; ++y)
          for (int xx = 0; xx < xs.w * 2; ++xx)
            dx->at(n, c, y / 2, xx / 2) += dy.at(n, c, y, xx);
  });
}

template <typename T>
Var Graph<T>::concat_channels(Var a, Var b) {
  const Shape as = value(a).shape();
  const Shape bs = value(b).shape();
  require(as.n == bs.n && as.h == bs.h && as.w == bs.w,
          "concat_channels: shape mismatch " + as.str() + " vs " + bs.str());
  Tensor<T> out(Shape{as.n, as.c + bs.c, as.h, as.w});
  const std::size_t asz = static_cast<std::size_t>(as.c) * as.plane();
  const std::size_t bsz = static_cast<std::size_t>(bs.c) * bs.plane();
  for (int n = 0; n < as.n; ++n) {
    std::copy_n(value(a).sample(n), asz, out.sample(n));
    std::copy_n(value(b).sample(n), bsz, out.sample(n) + asz);
  }
  return push(std::move(out), {a.id, b.id},
              [this, aid = a.id, bid = b.id, n_ = as.n, asz, bsz](int self) {
                const Tensor<T>& dy = upstream(self);
                Tensor<T>* da = grad_sink(aid);
                Tensor<T>* db = grad_sink(bid);
                for (int n = 0; n < n_; ++n) {
                  const T* src = dy.sample(n);
                  if (da) {
                    T* dst = da->sample(n);
                    for (std::size_t i = 0; i < asz; ++i) dst[i] += src[i];
                  }
                  if (db) {
                    T* dst = db->sample(n);
                    for (std::size_t i = 0; i < bsz; ++i) dst[i] += src[asz + i];
                  }
                }
              });
}

template <typename T>
Var Graph<T>::instance_norm(Var x, T eps) {
  const Shape xs = value(x).shape();
  const std::size_t plane = xs.plane();
  const std::size_t planes = static_cast<std::size_t>(xs.n) * xs.c;
  Tensor<T> out(xs);
  std::vector<T> inv_std(planes);
  const T* in = value(x).data();
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = in + p * plane;
    T mean{0};
    for (std::size_t i = 0; i < plane; ++i) mean += src[i];
    mean /= static_cast<T>(plane);
    T var{0};
    for (std::size_t i = 0; i < plane; ++i) {
      const T d = src[i] - mean;
      var += d * d;
    }
    var /= static_cast<T>(plane);
    const T inv = T{1} / std::sqrt(var + eps);
    inv_std[p] = inv;
    T* dst = out.data() + p * plane;
    for (std::size_t i = 0; i < plane; ++i) dst[i] = (src[i] - mean) * inv;
  }
  return push(std::move(out), {x.id},
              [this, xid = x.id, plane, planes,
               inv_std = std::move(inv_std)](int self) {
                Tensor<T>* dx = grad_sink(xid);
                if (!dx) return;
                const T* dy = upstream(self).data();
                const T* y = nodes_[self].value.data();
                const T count = static_cast<T>(plane);
                for (std::size_t p = 0; p < planes; ++p) {
                  const T* dyp = dy + p * plane;
                  const T* yp = y + p * plane;
                  T sum_dy{0};
                  T sum_dy_y{0};
                  for (std::size_t i = 0; i < plane; ++i) {
                    sum_dy += dyp[i];
                    sum_dy_y += dyp[i] * yp[i];
                  }
                  const T scale = inv_std[p] / count;
                  T* dxp = dx->data() + p * plane;
                  for (std::size_t i = 0; i < plane; ++i) {
                    dxp[i] += scale * (count * dyp[i] - sum_dy - yp[i] * sum_dy_y);
                  }
                }
              });
}

template <typename T>
Var Graph<T>::leaky_relu(Var x, T slope) {
  Tensor<T> out = value(x);
  for (T& v : out.values()) v = v > T{0} ? v : v * slope;
  return push(std::move(out), {x.id}, [this, xid = x.id, slope](int self) {
    Tensor<T>* dx = grad_sink(xid);
    if (!dx) return;
    const Tensor<T>& dy = upstream(self);
    const Tensor<T>& in = nodes_[xid].value;
    for (std::size_t i = 0; i < in.size(); ++i) {
      (*dx)[i] += in[i] > T{0} ? dy[i] : dy[i] * slope;
    }
  });
}

template <typename T>
Var Graph<T>::tanh(Var x) {
  Tensor<T> out = value(x);
  for (T& v : out.values()) v = std::tanh(v);
  return push(std::move(out), {x.id}, [this, xid = x.id](int self) {
    Tensor<T>* dx = grad_sink(xid);
    if (!dx) return;
    const Tensor<T>& dy = upstream(self);
    const Tensor<T>& y = nodes_[self].value;
    for (std::size_t i = 0; i < y.size(); ++i) {
      (*dx)[i] += dy[i] * (T{1} - y[i] * y[i]);
    }
  });
}

template <typename T>
Var Graph<T>::sigmoid(Var x) {
  Tensor<T> out = value(x);
  for (T& v : out.values()) {
    if (v >= T{0}) {
      v = T{1} / (T{1} + std::exp(-v));
    } else {
      const T e = std::exp(v);
      v = e / (T{1} + e);
    }
  }
  return push(std::move(out), {x.id}, [this, xid = x.id](int self) {
    Tensor<T>* dx = grad_sink(xid);
    if (!dx) return;
    const Tensor<T>& dy = upstream(self);
    const Tensor<T>& y = nodes_[self].value;
    for (std::size_t i = 0; i < y.size(); ++i) {
      (*dx)[i] += dy[i] * y[i] * (T{1} - y[i]);
    }
  });
}

template <typename T>
Var Graph<T>::atanh(Var x, T bound) {
  Tensor<T> out = value(x);
  for (T& v : out.values()) v = std::atanh(std::clamp(v, -bound, bound));
  return push(std::move(out), {x.id}, [this, xid = x.id, bound](int self) {
    Tensor<T>* dx = grad_sink(xid);
    if (!dx) return;
    const Tensor<T>& dy = upstream(self);
    const Tensor<T>& in = nodes_[xid].value;
    for (std::size_t i = 0; i < in.size(); ++i) {
      const T v = in[i];
      if (v > -bound && v < bound) (*dx)[i] += dy[i] / (T{1} - v * v);
    }
  });
}

template <typename T>
Var Graph<T>::add(Var a, Var b) {
  require(value(a).shape() == value(b).shape(),
          "add: shape mismatch " + value(a).shape().str() + " vs " +
              value(b).shape().str());
  Tensor<T> out = value(a);
  const Tensor<T>& bv = value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return push(std::move(out), {a.id, b.id},
              [this, aid = a.id, bid = b.id](int self) {
                const Tensor<T>& dy = upstream(self);
                for (int id : {aid, bid}) {
                  if (Tensor<T>* d = grad_sink(id)) {
                    for (std::size_t i = 0; i < dy.size(); ++i) (*d)[i] += dy[i];
                  }
                }
              });
}

template <typename T>
Var Graph<T>::scale(Var x, Var s) {
  require(value(s).size() == 1, "scale: factor must be a single element");
  const T factor = value(s)[0];
  Tensor<T> out = value(x);
  for (T& v : out.values()) v *= factor;
  return push(std::move(out), {x.id, s.id},
              [this, xid = x.id, sid = s.id](int self) {
                const Tensor<T>& dy = upstream(self);
                if (Tensor<T>* dx = grad_sink(xid)) {
                  const T factor = nodes_[sid].value[0];
                  for (std::size_t i = 0; i < dy.size(); ++i)
                    (*dx)[i] += dy[i] * factor;
                }
                if (Tensor<T>* ds = grad_sink(sid)) {
                  const Tensor<T>& in = nodes_[xid].value;
                  T acc{0};
                  for (std::size_t i = 0; i < dy.size(); ++i) acc += dy[i] * in[i];
                  (*ds)[0] += acc;
                }
              });
}

template <typename T>
Var Graph<T>::mean_log(Var p, bool complement, T eps) {
  const Tensor<T>& pv = value(p);
  require(!pv.empty(), "mean_log: empty input");
  T acc{0};
  for (T v : pv.values()) {
    const T q = clamp_prob(v, eps);
    acc += std::log(complement ? T{1} - q : q);
  }
  Tensor<T> out(Shape::scalar(), acc / static_cast<T>(pv.size()));
  return push(std::move(out), {p.id},
              [this, pid = p.id, complement, eps](int self) {
                Tensor<T>* dp = grad_sink(pid);
                if (!dp) return;
                const T g = upstream(self)[0];
                const Tensor<T>& in = nodes_[pid].value;
                const T scale = g / static_cast<T>(in.size());
                for (std::size_t i = 0; i < in.size(); ++i) {
                  const T v = in[i];
                  if (v < eps || v > T{1} - eps) continue;
                  (*dp)[i] += complement ? -scale / (T{1} - v) : scale / v;
                }
              });
}

template <typename T>
Var Graph<T>::softmax_cross_entropy(Var logits, const LabelBatch& labels) {
  const Shape ls = value(logits).shape();
  require(labels.n == ls.n && labels.h == ls.h && labels.w == ls.w,
          "softmax_cross_entropy: labels " + std::to_string(labels.n) + "x" +
              std::to_string(labels.h) + "x" + std::to_string(labels.w) +
              " do not match logits " + ls.str());
  const std::size_t plane = ls.plane();
  const Tensor<T>& lv = value(logits);
  T total{0};
  for (int n = 0; n < ls.n; ++n) {
    for (std::size_t i = 0; i < plane; ++i) {
      const int label = labels.ids[static_cast<std::size_t>(n) * plane + i];
      require(label >= 0 && label < ls.c,
              "softmax_cross_entropy: label " + std::to_string(label) +
                  " outside [0," + std::to_string(ls.c) + ")");
      T mx = lv[lv.offset(n, 0, 0, 0) + i];
      for (int c = 1; c < ls.c; ++c)
        mx = std::max(mx, lv[lv.offset(n, c, 0, 0) + i]);
      T sum{0};
      for (int c = 0; c < ls.c; ++c)
        sum += std::exp(lv[lv.offset(n, c, 0, 0) + i] - mx);
      total += std::log(sum) + mx - lv[lv.offset(n, label, 0, 0) + i];
    }
  }
  const T count = static_cast<T>(static_cast<std::size_t>(ls.n) * plane);
  Tensor<T> out(Shape::scalar(), total / count);
  return push(std::move(out), {logits.id},
              [this, lid = logits.id, ls, plane, count,
               ids = labels.ids](int self) {
                Tensor<T>* dl = grad_sink(lid);
                if (!dl) return;
                const T g = upstream(self)[0] / count;
                const Tensor<T>& lv = nodes_[lid].value;
                std::vector<T> probs(ls.c);
                for (int n = 0; n < ls.n; ++n) {
                  for (std::size_t i = 0; i < plane; ++i) {
                    T mx = lv[lv.offset(n, 0, 0, 0) + i];
                    for (int c = 1; c < ls.c; ++c)
                      mx = std::max(mx, lv[lv.offset(n, c, 0, 0) + i]);
                    T sum{0};
                    for (int c = 0; c < ls.c; ++c) {
                      probs[c] = std::exp(lv[lv.offset(n, c, 0, 0) + i] - mx);
                      sum += probs[c];
                    }
                    const int label = ids[static_cast<std::size_t>(n) * plane + i];
                    for (int c = 0; c < ls.c; ++c) {
                      const T target = c == label ? T{1} : T{0};
                      (*dl)[lv.offset(n, c, 0, 0) + i] += g * (probs[c] / sum - target);
                    }
                  }
                }
              });
}

template <typename T>
Var Graph<T>::weighted_l1(Var a, Var b, const Tensor<T>* mask) {
  const Shape as = value(a).shape();
  require(as == value(b).shape(), "weighted_l1: shape mismatch " + as.str() +
                                      " vs " + value(b).shape().str());
  std::vector<T> weights;
  if (mask) {
    const Shape ms = mask->shape();
    require(ms.n == as.n && ms.c == 1 && ms.h == as.h && ms.w == as.w,
            "weighted_l1: mask " + ms.str() + " does not match " + as.str());
    weights.assign(mask->values().begin(), mask->values().end());
  }
  const std::size_t plane = as.plane();
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  T total{0};
  for (int n = 0; n < as.n; ++n) {
    for (int c = 0; c < as.c; ++c) {
      const std::size_t base = av.offset(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        const T m = mask ? weights[static_cast<std::size_t>(n) * plane + i] : T{1};
        total += m * std::abs(av[base + i] - bv[base + i]);
      }
    }
  }
  const T count = static_cast<T>(as.numel());
  Tensor<T> out(Shape::scalar(), total / count);
  return push(std::move(out), {a.id, b.id},
              [this, aid = a.id, bid = b.id, as, plane, count,
               weights = std::move(weights)](int self) {
                Tensor<T>* da = grad_sink(aid);
                Tensor<T>* db = grad_sink(bid);
                if (!da && !db) return;
                const T g = upstream(self)[0] / count;
                const Tensor<T>& av = nodes_[aid].value;
                const Tensor<T>& bv = nodes_[bid].value;
                for (int n = 0; n < as.n; ++n) {
                  for (int c = 0; c < as.c; ++c) {
                    const std::size_t base = av.offset(n, c, 0, 0);
                    for (std::size_t i = 0; i < plane; ++i) {
                      const T m = weights.empty()
                                      ? T{1}
                                      : weights[static_cast<std::size_t>(n) * plane + i];
                      const T diff = av[base + i] - bv[base + i];
                      const T s = diff > T{0} ? T{1} : (diff < T{0} ? T{-1} : T{0});
                      if (da) (*da)[base + i] += g * m * s;
                      if (db) (*db)[base + i] -= g * m * s;
                    }
                  }
                }
              });
}

template <typename T>
Var Graph<T>::weighted_sum(std::span<const Var> terms, std::span<const T> coefs) {
  require(terms.size() == coefs.size(), "weighted_sum: size mismatch");
  T total{0};
  std::vector<int> ids;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    require(value(terms[i]).size() == 1, "weighted_sum: terms must be scalars");
    total += coefs[i] * value(terms[i])[0];
    ids.push_back(terms[i].id);
  }
  std::vector<T> cs(coefs.begin(), coefs.end());
  return push(Tensor<T>(Shape::scalar(), total), ids,
              [this, ids, cs = std::move(cs)](int self) {
                const T g = upstream(self)[0];
                for (std::size_t i = 0; i < ids.size(); ++i) {
                  if (Tensor<T>* d = grad_sink(ids[i])) (*d)[0] += g * cs[i];
                }
              });
}

template <typename T>
void Graph<T>::backward(Var loss, std::span<Parameter<T>* const> wrt) {
  require(value(loss).size() == 1, "backward: loss must be a scalar");
  relevant_.assign(nodes_.size(), 0);
  for (Parameter<T>* p : wrt) {
    if (auto it = param_nodes_.find(p); it != param_nodes_.end()) {
      relevant_[it->second] = 1;
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    nodes_[i].grad = Tensor<T>();
    if (relevant_[i]) continue;
    for (int in : nodes_[i].inputs) {
      if (relevant_[in]) {
        relevant_[i] = 1;
        break;
      }
    }
  }
  if (!relevant_[loss.id]) return;
  nodes_[loss.id].grad = Tensor<T>(Shape::scalar(), T{1});
  for (int id = loss.id; id >= 0; --id) {
    Node& node = nodes_[id];
    if (!relevant_[id] || node.grad.empty()) continue;
    if (node.backward) node.backward(id);
    if (node.param) {
      Tensor<T>& pg = node.param->grad;
      for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += node.grad[i];
    }
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace semgan
