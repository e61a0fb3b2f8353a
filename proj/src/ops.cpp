#include "umbra/ops.hpp"

#include <cmath>

#include "umbra/kernels.hpp"

namespace umbra::ops {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

std::shared_ptr<TensorNode> new_node(std::vector<int> shape,
                                     std::vector<std::shared_ptr<TensorNode>> parents) {
    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    node->value.resize(shape_numel(node->shape));
    node->parents = std::move(parents);
    for (const auto& p : node->parents)
        if (p->requires_grad) node->requires_grad = true;
    return node;
}

// Grad buffer of a parent, or nullptr when no gradient is wanted there.
double* grad_of(TensorNode& p) {
    if (!p.requires_grad) return nullptr;
    p.ensure_grad();
    return p.grad.data();
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) throw TensorError(std::string(op) + ": shape mismatch");
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    auto node = new_node(a.shape(), {a.node(), b.node()});
    kernels::add(a.value().data(), b.value().data(), node->value.data(), node->numel());
    node->backprop = [](TensorNode& self) {
        for (int i = 0; i < 2; ++i)
            if (double* g = grad_of(*self.parents[i]))
                kernels::axpy(1.0, self.grad.data(), g, self.numel());
    };
    return Tensor(node);
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    auto node = new_node(a.shape(), {a.node(), b.node()});
    kernels::mul(a.value().data(), b.value().data(), node->value.data(), node->numel());
    node->backprop = [](TensorNode& self) {
        TensorNode& a = *self.parents[0];
        TensorNode& b = *self.parents[1];
        if (double* g = grad_of(a))
            for (std::size_t i = 0; i < self.numel(); ++i) g[i] += self.grad[i] * b.value[i];
        if (double* g = grad_of(b))
            for (std::size_t i = 0; i < self.numel(); ++i) g[i] += self.grad[i] * a.value[i];
    };
    return Tensor(node);
}

Tensor affine(const Tensor& x, double scale, double shift) {
    auto node = new_node(x.shape(), {x.node()});
    kernels::affine(scale, shift, x.value().data(), node->value.data(), node->numel());
    node->backprop = [scale](TensorNode& self) {
        if (double* g = grad_of(*self.parents[0]))
            kernels::axpy(scale, self.grad.data(), g, self.numel());
    };
    return Tensor(node);
}

Tensor signed_normalize(const Tensor& x) {
    auto node = new_node(x.shape(), {x.node()});
    // Evaluated literally so 0 -> -1, 127.5 -> 0, 255 -> +1 are exact and the
    // result matches the image-level normalize_signed bit for bit.
    const double* in = x.value().data();
    for (std::size_t i = 0; i < node->numel(); ++i)
        node->value[i] = (in[i] / 255.0) * 2.0 - 1.0;
    node->backprop = [](TensorNode& self) {
        if (double* g = grad_of(*self.parents[0]))
            kernels::axpy(2.0 / 255.0, self.grad.data(), g, self.numel());
    };
    return Tensor(node);
}

Tensor gelu(const Tensor& x) {
    auto node = new_node(x.shape(), {x.node()});
    const double* in = x.value().data();
    for (std::size_t i = 0; i < node->numel(); ++i) {
        const double v = in[i];
        node->value[i] = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
    }
    node->backprop = [](TensorNode& self) {
        if (double* g = grad_of(*self.parents[0])) {
            const double* in = self.parents[0]->value.data();
            for (std::size_t i = 0; i < self.numel(); ++i) {
                const double v = in[i];
                const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
                const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
                g[i] += self.grad[i] * (cdf + v * pdf);
            }
        }
    };
    return Tensor(node);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.dim(1) != b.dim(0))
        throw TensorError("matmul: incompatible shapes");
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    auto node = new_node({m, n}, {a.node(), b.node()});
    kernels::gemm_nn(a.value().data(), b.value().data(), node->value.data(), m, k, n);
    node->backprop = [m, k, n](TensorNode& self) {
        TensorNode& a = *self.parents[0];
        TensorNode& b = *self.parents[1];
        if (double* g = grad_of(a))  // dA = dC * B^T
            kernels::gemm_nt(self.grad.data(), b.value.data(), g, m, n, k, true);
        if (double* g = grad_of(b))  // dB = A^T * dC
            kernels::gemm_tn(a.value.data(), self.grad.data(), g, k, m, n, true);
    };
    return Tensor(node);
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.dim(1) != b.dim(1))
        throw TensorError("matmul_nt: incompatible shapes");
    const int m = a.dim(0), k = a.dim(1), n = b.dim(0);
    auto node = new_node({m, n}, {a.node(), b.node()});
    kernels::gemm_nt(a.value().data(), b.value().data(), node->value.data(), m, k, n);
    node->backprop = [m, k, n](TensorNode& self) {
        TensorNode& a = *self.parents[0];
        TensorNode& b = *self.parents[1];
        if (double* g = grad_of(a))  // dA = dC * B
            kernels::gemm_nn(self.grad.data(), b.value.data(), g, m, n, k, true);
        if (double* g = grad_of(b))  // dB = dC^T * A
            kernels::gemm_tn(self.grad.data(), a.value.data(), g, n, m, k, true);
    };
    return Tensor(node);
}

Tensor add_rowvec(const Tensor& x, const Tensor& bias) {
    if (x.shape().size() != 2 || bias.shape().size() != 1 || x.dim(1) != bias.dim(0))
        throw TensorError("add_rowvec: incompatible shapes");
    const int m = x.dim(0), n = x.dim(1);
    auto node = new_node({m, n}, {x.node(), bias.node()});
    for (int i = 0; i < m; ++i)
        kernels::add(x.value().data() + (std::size_t)i * n, bias.value().data(),
                     node->value.data() + (std::size_t)i * n, (std::size_t)n);
    node->backprop = [m, n](TensorNode& self) {
        if (double* g = grad_of(*self.parents[0]))
            kernels::axpy(1.0, self.grad.data(), g, self.numel());
        if (double* g = grad_of(*self.parents[1]))
            for (int i = 0; i < m; ++i)
                kernels::axpy(1.0, self.grad.data() + (std::size_t)i * n, g, (std::size_t)n);
    };
    return Tensor(node);
}

Tensor softmax_rows(const Tensor& x) {
    if (x.shape().size() != 2) throw TensorError("softmax_rows: expected 2-d input");
    const int m = x.dim(0), n = x.dim(1);
    auto node = new_node({m, n}, {x.node()});
    for (int i = 0; i < m; ++i) {
        const double* row = x.value().data() + (std::size_t)i * n;
        double* out = node->value.data() + (std::size_t)i * n;
        double mx = row[0];
        for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double sum = 0;
        for (int j = 0; j < n; ++j) {
            out[j] = std::exp(row[j] - mx);
            sum += out[j];
        }
        for (int j = 0; j < n; ++j) out[j] /= sum;
    }
    node->backprop = [m, n](TensorNode& self) {
        if (double* g = grad_of(*self.parents[0])) {
            for (int i = 0; i < m; ++i) {
                const double* y = self.value.data() + (std::size_t)i * n;
                const double* dy = self.grad.data() + (std::size_t)i * n;
                const double dot = kernels::dot(y, dy, (std::size_t)n);
                double* gr = g + (std::size_t)i * n;
                for (int j = 0; j < n; ++j) gr[j] += y[j] * (dy[j] - dot);
            }
        }
    };
    return Tensor(node);
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    if (x.shape().size() != 2) throw TensorError("layer_norm: expected 2-d input");
    const int m = x.dim(0), n = x.dim(1);
    if (gamma.shape() != std::vector<int>{n} || beta.shape() != std::vector<int>{n})
        throw TensorError("layer_norm: gamma/beta shape mismatch");

    auto node = new_node({m, n}, {x.node(), gamma.node(), beta.node()});
    std::vector<double> xhat((std::size_t)m * n);
    std::vector<double> inv_std(m);
    for (int i = 0; i < m; ++i) {
        const double* row = x.value().data() + (std::size_t)i * n;
        double mean = kernels::reduce_sum(row, (std::size_t)n) / n;
        double var = 0;
        for (int j = 0; j < n; ++j) {
            const double d = row[j] - mean;
            var += d * d;
        }
        var /= n;
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_std[i] = inv;
        double* xh = xhat.data() + (std::size_t)i * n;
        double* out = node->value.data() + (std::size_t)i * n;
        for (int j = 0; j < n; ++j) {
            xh[j] = (row[j] - mean) * inv;
            out[j] = gamma.value()[j] * xh[j] + beta.value()[j];
        }
    }
    node->backprop = [m, n, xhat = std::move(xhat),
                      inv_std = std::move(inv_std)](TensorNode& self) {
        TensorNode& x = *self.parents[0];
        TensorNode& gamma = *self.parents[1];
        double* gx = grad_of(x);
        double* gg = grad_of(gamma);
        double* gb = grad_of(*self.parents[2]);
        for (int i = 0; i < m; ++i) {
            const double* dy = self.grad.data() + (std::size_t)i * n;
            const double* xh = xhat.data() + (std::size_t)i * n;
            if (gg)
                for (int j = 0; j < n; ++j) gg[j] += dy[j] * xh[j];
            if (gb)
                for (int j = 0; j < n; ++j) gb[j] += dy[j];
            if (gx) {
                double mean_dxhat = 0, mean_dxhat_xhat = 0;
                for (int j = 0; j < n; ++j) {
                    const double dxh = dy[j] * gamma.value[j];
                    mean_dxhat += dxh;
                    mean_dxhat_xhat += dxh * xh[j];
                }
                mean_dxhat /= n;
                mean_dxhat_xhat /= n;
                double* gr = gx + (std::size_t)i * n;
                for (int j = 0; j < n; ++j) {
                    const double dxh = dy[j] * gamma.value[j];
                    gr[j] += inv_std[i] * (dxh - mean_dxhat - xh[j] * mean_dxhat_xhat);
                }
            }
        }
    };
    return Tensor(node);
}

Tensor reshape(const Tensor& x, std::vector<int> shape) {
    if (shape_numel(shape) != x.size()) throw TensorError("reshape: element count mismatch");
    auto node = new_node(std::move(shape), {x.node()});
    node->value = x.value();
    node->backprop = [](TensorNode& self) {
        if (double* g = grad_of(*self.parents[0]))
            kernels::axpy(1.0, self.grad.data(), g, self.numel());
    };
    return Tensor(node);
}

Tensor slice_cols(const Tensor& x, int c0, int c1) {
    if (x.shape().size() != 2 || c0 < 0 || c1 > x.dim(1) || c0 >= c1)
        throw TensorError("slice_cols: bad column range");
    const int m = x.dim(0), n = x.dim(1), w = c1 - c0;
    auto node = new_node({m, w}, {x.node()});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < w; ++j)
            node->value[(std::size_t)i * w + j] = x.value()[(std::size_t)i * n + c0 + j];
    node->backprop = [m, n, w, c0](TensorNode& self) {
        if (double* g = grad_of(*self.parents[0]))
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < w; ++j)
                    g[(std::size_t)i * n + c0 + j] += self.grad[(std::size_t)i * w + j];
    };
    return Tensor(node);
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw TensorError("concat_cols: empty input");
    const int m = parts[0].dim(0);
    int n = 0;
    std::vector<std::shared_ptr<TensorNode>> parents;
    for (const Tensor& p : parts) {
        if (p.shape().size() != 2 || p.dim(0) != m)
            throw TensorError("concat_cols: row count mismatch");
        n += p.dim(1);
        parents.push_back(p.node());
    }
    auto node = new_node({m, n}, std::move(parents));
    int off = 0;
    for (const Tensor& p : parts) {
        const int w = p.dim(1);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < w; ++j)
                node->value[(std::size_t)i * n + off + j] = p.value()[(std::size_t)i * w + j];
        off += w;
    }
    node->backprop = [m, n](TensorNode& self) {
        int off = 0;
        for (auto& parent : self.parents) {
            const int w = parent->shape[1];
            if (double* g = grad_of(*parent))
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < w; ++j)
                        g[(std::size_t)i * w + j] += self.grad[(std::size_t)i * n + off + j];
            off += w;
        }
    };
    return Tensor(node);
}

Tensor chw_to_tokens(const Tensor& x) {
    if (x.shape().size() != 3) throw TensorError("chw_to_tokens: expected [C,H,W]");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int t = h * w;
    auto node = new_node({t, c}, {x.node()});
    for (int ci = 0; ci < c; ++ci)
        for (int p = 0; p < t; ++p)
            node->value[(std::size_t)p * c + ci] = x.value()[(std::size_t)ci * t + p];
    node->backprop = [c, t](TensorNode& self) {
        if (double* g = grad_of(*self.parents[0]))
            for (int ci = 0; ci < c; ++ci)
                for (int p = 0; p < t; ++p)
                    g[(std::size_t)ci * t + p] += self.grad[(std::size_t)p * c + ci];
    };
    return Tensor(node);
}

Tensor fold_tokens(const Tensor& x, int patch, int grid_h, int grid_w, int channels) {
    const int t = grid_h * grid_w;
    const int d = channels * patch * patch;
    if (x.shape().size() != 2 || x.dim(0) != t || x.dim(1) != d)
        throw TensorError("fold_tokens: shape mismatch");
    const int out_h = grid_h * patch, out_w = grid_w * patch;
    auto node = new_node({channels, out_h, out_w}, {x.node()});
    auto out_index = [=](int c, int y, int xx) {
        return ((std::size_t)c * out_h + y) * out_w + xx;
    };
    for (int gy = 0; gy < grid_h; ++gy)
        for (int gx = 0; gx < grid_w; ++gx) {
            const std::size_t tok = (std::size_t)(gy * grid_w + gx) * d;
            for (int c = 0; c < channels; ++c)
                for (int dy = 0; dy < patch; ++dy)
                    for (int dx = 0; dx < patch; ++dx)
                        node->value[out_index(c, gy * patch + dy, gx * patch + dx)] =
                            x.value()[tok + ((std::size_t)c * patch + dy) * patch + dx];
        }
    node->backprop = [=](TensorNode& self) {
        if (double* g = grad_of(*self.parents[0]))
            for (int gy = 0; gy < grid_h; ++gy)
                for (int gx = 0; gx < grid_w; ++gx) {
                    const std::size_t tok = (std::size_t)(gy * grid_w + gx) * d;
                    for (int c = 0; c < channels; ++c)
                        for (int dy = 0; dy < patch; ++dy)
                            for (int dx = 0; dx < patch; ++dx)
                                g[tok + ((std::size_t)c * patch + dy) * patch + dx] +=
                                    self.grad[out_index(c, gy * patch + dy, gx * patch + dx)];
                }
    };
    return Tensor(node);
}

Tensor mul_plane(const Tensor& x, const std::vector<double>& plane) {
    if (x.shape().size() != 3 || (std::size_t)x.dim(1) * x.dim(2) != plane.size())
        throw TensorError("mul_plane: plane size mismatch");
    const int c = x.dim(0);
    const std::size_t hw = plane.size();
    auto node = new_node(x.shape(), {x.node()});
    for (int ci = 0; ci < c; ++ci)
        kernels::mul(x.value().data() + ci * hw, plane.data(), node->value.data() + ci * hw, hw);
    node->backprop = [c, hw, plane](TensorNode& self) {
        if (double* g = grad_of(*self.parents[0]))
            for (int ci = 0; ci < c; ++ci)
                for (std::size_t p = 0; p < hw; ++p)
                    g[ci * hw + p] += self.grad[ci * hw + p] * plane[p];
    };
    return Tensor(node);
}

Tensor region_reweight(const Tensor& x, const UnitMask& ms, const Tensor& w1,
                       const Tensor& w2) {
    if (x.shape().size() != 3 || x.dim(1) != ms.height || x.dim(2) != ms.width)
        throw TensorError("region_reweight: mask dimension mismatch");
    if (w1.size() != 1 || w2.size() != 1)
        throw TensorError("region_reweight: w1/w2 must be scalars");
    const int c = x.dim(0);
    const std::size_t hw = ms.size();
    const double a = w1.item(), b = w2.item();

    auto node = new_node(x.shape(), {x.node(), w1.node(), w2.node()});
    std::vector<double> plane(hw);
    for (std::size_t p = 0; p < hw; ++p)
        plane[p] = a * ms.data[p] + b * (1.0 - ms.data[p]);
    for (int ci = 0; ci < c; ++ci)
        kernels::mul(x.value().data() + ci * hw, plane.data(), node->value.data() + ci * hw, hw);

    node->backprop = [c, hw, plane = std::move(plane), mask = ms.data](TensorNode& self) {
        TensorNode& x = *self.parents[0];
        if (double* g = grad_of(x))
            for (int ci = 0; ci < c; ++ci)
                for (std::size_t p = 0; p < hw; ++p)
                    g[ci * hw + p] += self.grad[ci * hw + p] * plane[p];
        double* g1 = grad_of(*self.parents[1]);
        double* g2 = grad_of(*self.parents[2]);
        if (g1 || g2) {
            double d1 = 0, d2 = 0;
            for (int ci = 0; ci < c; ++ci)
                for (std::size_t p = 0; p < hw; ++p) {
                    const double gx = self.grad[ci * hw + p] * x.value[ci * hw + p];
                    if (mask[p] == 1.0) d1 += gx;
                    else d2 += gx;
                }
            if (g1) g1[0] += d1;
            if (g2) g2[0] += d2;
        }
    };
    return Tensor(node);
}

Tensor conv2d(const Tensor& x, const Tensor& kernel, const Tensor& bias, int stride,
              int pad) {
    if (x.shape().size() != 3 || kernel.shape().size() != 4)
        throw TensorError("conv2d: expected x[C,H,W], kernel[Cout,Cin,kh,kw]");
    const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int cout = kernel.dim(0), kh = kernel.dim(2), kw = kernel.dim(3);
    if (kernel.dim(1) != cin) throw TensorError("conv2d: channel mismatch");
    if (bias.shape() != std::vector<int>{cout}) throw TensorError("conv2d: bias shape");
    const int oh = (h + 2 * pad - kh) / stride + 1;
    const int ow = (w + 2 * pad - kw) / stride + 1;
    const int t = oh * ow;
    const int krows = cin * kh * kw;

    // im2col: cols[(ci*kh+ky)*kw+kx, oy*ow+ox] = x[ci, oy*s+ky-pad, ox*s+kx-pad]
    std::vector<double> cols((std::size_t)krows * t, 0.0);
    for (int ci = 0; ci < cin; ++ci)
        for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
                double* crow = cols.data() + ((std::size_t)(ci * kh + ky) * kw + kx) * t;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= h) continue;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        if (ix < 0 || ix >= w) continue;
                        crow[oy * ow + ox] = x.value()[((std::size_t)ci * h + iy) * w + ix];
                    }
                }
            }

    auto node = new_node({cout, oh, ow}, {x.node(), kernel.node(), bias.node()});
    kernels::gemm_nn(kernel.value().data(), cols.data(), node->value.data(), cout, krows, t);
    for (int co = 0; co < cout; ++co) {
        const double b = bias.value()[co];
        double* out = node->value.data() + (std::size_t)co * t;
        for (int i = 0; i < t; ++i) out[i] += b;
    }

    node->backprop = [=, cols = std::move(cols)](TensorNode& self) {
        TensorNode& x = *self.parents[0];
        if (double* g = grad_of(*self.parents[1]))  // dK = dOut * cols^T
            kernels::gemm_nt(self.grad.data(), cols.data(), g, cout, t, krows, true);
        if (double* g = grad_of(*self.parents[2]))  // db = row sums of dOut
            for (int co = 0; co < cout; ++co)
                g[co] += kernels::reduce_sum(self.grad.data() + (std::size_t)co * t,
                                             (std::size_t)t);
        if (double* g = grad_of(x)) {  // dcols = K^T * dOut, then col2im
            std::vector<double> dcols((std::size_t)krows * t);
            kernels::gemm_tn(self.parents[1]->value.data(), self.grad.data(), dcols.data(),
                             krows, cout, t);
            for (int ci = 0; ci < cin; ++ci)
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx) {
                        const double* crow =
                            dcols.data() + ((std::size_t)(ci * kh + ky) * kw + kx) * t;
                        for (int oy = 0; oy < oh; ++oy) {
                            const int iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= h) continue;
                            for (int ox = 0; ox < ow; ++ox) {
                                const int ix = ox * stride + kx - pad;
                                if (ix < 0 || ix >= w) continue;
                                g[((std::size_t)ci * h + iy) * w + ix] += crow[oy * ow + ox];
                            }
                        }
                    }
        }
    };
    return Tensor(node);
}

Tensor l1_loss(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "l1_loss");
    const std::size_t n = a.size();
    auto node = new_node({1}, {a.node(), b.node()});
    node->value[0] = kernels::reduce_abs_diff(a.value().data(), b.value().data(), n) / (double)n;
    node->backprop = [n](TensorNode& self) {
        TensorNode& a = *self.parents[0];
        TensorNode& b = *self.parents[1];
        const double scale = self.grad[0] / (double)n;
        double* ga = grad_of(a);
        double* gb = grad_of(b);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = a.value[i] - b.value[i];
            const double s = d > 0 ? scale : (d < 0 ? -scale : 0.0);
            if (ga) ga[i] += s;
            if (gb) gb[i] -= s;
        }
    };
    return Tensor(node);
}

Tensor image_to_chw(const FloatImage& img, bool requires_grad) {
    Tensor t = Tensor::zeros({img.channels, img.height, img.width}, requires_grad);
    const std::size_t hw = img.pixel_count();
    for (int c = 0; c < img.channels; ++c)
        for (std::size_t p = 0; p < hw; ++p)
            t.value()[(std::size_t)c * hw + p] = img.data[p * img.channels + c];
    return t;
}

FloatImage chw_to_image(const Tensor& x, Range range) {
    if (x.shape().size() != 3) throw TensorError("chw_to_image: expected [C,H,W]");
    FloatImage img(x.dim(1), x.dim(2), x.dim(0), range);
    const std::size_t hw = img.pixel_count();
    for (int c = 0; c < img.channels; ++c)
        for (std::size_t p = 0; p < hw; ++p)
            img.data[p * img.channels + c] = x.value()[(std::size_t)c * hw + p];
    return img;
}

}  // namespace umbra::ops
