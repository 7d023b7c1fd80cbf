#pragma once

#include <cstddef>
#include <vector>

#include "neuromix/tape.hpp"
#include "neuromix/tensor.hpp"

namespace neuromix {

// Differentiable operations. Each records its result on the tape of its
// first Var argument; all Var arguments must share a tape.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

// Scalar reductions; the result has shape (1).
Var sum(Var a);
Var mean(Var a);
// sum_k weights[k] * a[k] with `weights` held constant.
Var weighted_sum(const Tensor& weights, Var a);

Var relu(Var a);
Var sigmoid(Var a);
// log(sigmoid(a)) evaluated as -softplus(-a).
Var log_sigmoid(Var a);
Var softmax_rows(Var a);
Var log_softmax_rows(Var a);

// x: (n, in), weight: (in, out), bias: (out) -> (n, out)
Var dense(Var x, Var weight, Var bias);
// x: (n, c, h, w), weight: (out, c, k, k), bias: (out) -> (n, out, h, w).
// Stride 1, zero "same" padding; k must be odd.
Var conv2d(Var x, Var weight, Var bias);
// Non-overlapping window x window max pooling on (n, c, h, w). Ragged edges
// are padded with -inf, so the output is ceil(h/window) x ceil(w/window).
Var maxpool2d(Var x, std::size_t window);
// (n, ...) -> (n, prod(...))
Var flatten(Var x);
// Copy of the value with no gradient path back to `a`.
Var detach(Var a);

struct ColumnMoments {
    std::vector<double> mean;
    std::vector<double> std;  // population std, floored at eps
};

// Population mean and std of each column of an (n, k) tensor, std floored at eps.
ColumnMoments column_moments(const Tensor& a, double eps);

// (a - mean_j) / std_j using the batch's own column statistics. Gradients
// flow through the statistics as in batch normalization; a column whose std
// hits the eps floor treats the std as a constant.
Var standardize_columns(Var a, double eps, ColumnMoments* moments = nullptr);

// (a - mean_j) / std_j with caller-supplied constant statistics.
Var shift_scale_columns(Var a, const std::vector<double>& mean, const std::vector<double>& std);

// Plain value versions used outside of a tape.
Tensor sigmoid(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);
double log_sigmoid(double z);

}  // namespace neuromix
