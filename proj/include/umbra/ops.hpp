#pragma once
#include "umbra/image.hpp"
#include "umbra/masks.hpp"
#include "umbra/tensor.hpp"

// Differentiable ops. Inputs stay immutable; each call appends one node to
// the tape. Heavy loops route through the dispatched kernels.

namespace umbra::ops {

// --- elementwise / affine ---
Tensor add(const Tensor& a, const Tensor& b);                 // same shape
Tensor mul(const Tensor& a, const Tensor& b);                 // same shape
Tensor affine(const Tensor& x, double scale, double shift);   // scale*x + shift
Tensor signed_normalize(const Tensor& x);                     // (x/255)*2 - 1
Tensor gelu(const Tensor& x);                                 // exact erf form

// --- linear algebra ---
Tensor matmul(const Tensor& a, const Tensor& b);              // [m,k]x[k,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);           // [m,k]x[n,k]^T
Tensor add_rowvec(const Tensor& x, const Tensor& bias);       // [m,n] + [n]
Tensor softmax_rows(const Tensor& x);                         // per-row softmax
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);                          // over last dim

// --- shape moves ---
Tensor reshape(const Tensor& x, std::vector<int> shape);      // same numel
Tensor slice_cols(const Tensor& x, int c0, int c1);           // [m, c1-c0]
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor chw_to_tokens(const Tensor& x);                        // [C,H,W] -> [H*W, C]
// [T, p*p*C] -> [C, grid_h*p, grid_w*p]; token t = gy*grid_w+gx, feature
// d = (c*p+dy)*p+dx.
Tensor fold_tokens(const Tensor& x, int patch, int grid_h, int grid_w, int channels);

// --- mask-conditioned elementwise ---
// y[c,hw] = x[c,hw] * plane[hw]; plane is a constant broadcast over channels.
Tensor mul_plane(const Tensor& x, const std::vector<double>& plane);
// y = (w1*Ms + w2*(1-Ms)) .* x with Ms broadcast over channels; w1/w2 are
// scalar tensors (constants or trainable).
Tensor region_reweight(const Tensor& x, const UnitMask& ms, const Tensor& w1,
                       const Tensor& w2);

// --- convolution ---
// x [Cin,H,W], kernel [Cout,Cin,kh,kw], bias [Cout]; zero padding.
Tensor conv2d(const Tensor& x, const Tensor& kernel, const Tensor& bias, int stride,
              int pad);

// --- losses ---
Tensor l1_loss(const Tensor& a, const Tensor& b);             // scalar, mean |a-b|

// --- image bridging (leaves) ---
Tensor image_to_chw(const FloatImage& img, bool requires_grad = false);
FloatImage chw_to_image(const Tensor& x, Range range);

}  // namespace umbra::ops
