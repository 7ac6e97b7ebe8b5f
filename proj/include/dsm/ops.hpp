#pragma once

// Dense layer primitives with hand-derived backward passes. Every operation
// treats activations as [N, C, T, X] row-major tensors (X = graph positions,
// nodes or edges). The inner products are delegated to Eigen; the chain rule
// wiring lives here and is validated against central finite differences in
// the test suite.
//
// Reproducibility contract: with a fixed thread count, every reduction over
// batch chunks is combined in chunk order, so repeated runs are bitwise
// identical.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dsm/parallel.hpp"
#include "dsm/rng.hpp"
#include "dsm/tensor.hpp"

namespace dsm::nn {

template <class Real>
using MatMap =
    Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <class Real>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

inline void serial_or_pool(ParallelPool* pool, std::int64_t n,
                           const std::function<void(int, std::int64_t, std::int64_t)>& fn) {
    if (pool) {
        pool->for_chunks(n, fn);
    } else if (n > 0) {
        fn(0, 0, n);
    }
}

inline int chunk_count(ParallelPool* pool) { return pool ? pool->threads() : 1; }

// ---------------------------------------------------------------------------
// Channel-mixing affine map (1x1 convolution over the channel axis).
//
// Accepts one or more input tensors whose channel counts partition the weight
// columns, which lets graph blocks mix [self, incoming, outgoing] streams
// without materializing the concatenation.
// ---------------------------------------------------------------------------

template <class Real>
void linear1x1_forward(std::span<const TensorT<Real>* const> ins, const TensorT<Real>& w,
                       const TensorT<Real>& b, TensorT<Real>& out, ParallelPool* pool) {
    DSM_CHECK(!ins.empty() && ins[0]->rank() == 4, "linear1x1: rank-4 inputs required");
    const std::int64_t n = ins[0]->dim(0), t = ins[0]->dim(2), x = ins[0]->dim(3);
    const std::int64_t tx = t * x;
    std::int64_t c_total = 0;
    for (const auto* in : ins) {
        DSM_CHECK(in->rank() == 4 && in->dim(0) == n && in->dim(2) == t && in->dim(3) == x,
                  "linear1x1: inputs disagree on batch/time/position dims");
        c_total += in->dim(1);
    }
    const std::int64_t c_out = w.dim(0);
    DSM_CHECK(w.rank() == 2 && w.dim(1) == c_total, "linear1x1: weight shape mismatch");
    DSM_CHECK(b.rank() == 1 && b.dim(0) == c_out, "linear1x1: bias shape mismatch");
    out.resize({n, c_out, t, x});

    ConstMatMap<Real> wm(w.ptr(), c_out, c_total);
    Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, 1>> bv(b.ptr(), c_out);

    serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            MatMap<Real> om(out.ptr() + i * c_out * tx, c_out, tx);
            std::int64_t col = 0;
            for (const auto* in : ins) {
                const std::int64_t c_in = in->dim(1);
                ConstMatMap<Real> im(in->ptr() + i * c_in * tx, c_in, tx);
                if (col == 0)
                    om.noalias() = wm.middleCols(0, c_in) * im;
                else
                    om.noalias() += wm.middleCols(col, c_in) * im;
                col += c_in;
            }
            om.colwise() += bv;
        }
    });
}

template <class Real>
void linear1x1_forward(const TensorT<Real>& in, const TensorT<Real>& w, const TensorT<Real>& b,
                       TensorT<Real>& out, ParallelPool* pool = nullptr) {
    const TensorT<Real>* ins[1] = {&in};
    linear1x1_forward(std::span<const TensorT<Real>* const>(ins, 1), w, b, out, pool);
}

/// Backward. `gins[j]`, when non-null, receives the gradient for input j
/// (accumulated with =, not +=). Weight/bias gradients are accumulated into
/// gw/gb in chunk order.
inline void linear1x1_backward(std::span<const Tensor* const> ins, const Tensor& w,
                               const Tensor& gout, std::span<Tensor* const> gins, Tensor& gw,
                               Tensor& gb, ParallelPool* pool) {
    const std::int64_t n = ins[0]->dim(0), t = ins[0]->dim(2), x = ins[0]->dim(3);
    const std::int64_t tx = t * x;
    const std::int64_t c_out = w.dim(0), c_total = w.dim(1);
    DSM_CHECK(gout.dim(0) == n && gout.dim(1) == c_out && gout.dim(2) == t && gout.dim(3) == x,
              "linear1x1 backward: gout shape mismatch");

    for (std::size_t j = 0; j < ins.size(); ++j)
        if (gins[j]) gins[j]->resize(ins[j]->shape);

    const int chunks = chunk_count(pool);
    std::vector<Tensor> gw_part(static_cast<std::size_t>(chunks));
    std::vector<Tensor> gb_part(static_cast<std::size_t>(chunks));
    for (int c = 0; c < chunks; ++c) {
        gw_part[static_cast<std::size_t>(c)].resize(w.shape);
        gb_part[static_cast<std::size_t>(c)].resize({c_out});
    }

    ConstMatMap<double> wm(w.ptr(), c_out, c_total);
    serial_or_pool(pool, n, [&](int chunk, std::int64_t lo, std::int64_t hi) {
        MatMap<double> gwm(gw_part[static_cast<std::size_t>(chunk)].ptr(), c_out, c_total);
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 1>> gbv(
            gb_part[static_cast<std::size_t>(chunk)].ptr(), c_out);
        for (std::int64_t i = lo; i < hi; ++i) {
            ConstMatMap<double> gom(gout.ptr() + i * c_out * tx, c_out, tx);
            gbv += gom.rowwise().sum();
            std::int64_t col = 0;
            for (std::size_t j = 0; j < ins.size(); ++j) {
                const std::int64_t c_in = ins[j]->dim(1);
                ConstMatMap<double> im(ins[j]->ptr() + i * c_in * tx, c_in, tx);
                gwm.middleCols(col, c_in).noalias() += gom * im.transpose();
                if (gins[j]) {
                    MatMap<double> gim(gins[j]->ptr() + i * c_in * tx, c_in, tx);
                    gim.noalias() = wm.middleCols(col, c_in).transpose() * gom;
                }
                col += c_in;
            }
        }
    });
    for (int c = 0; c < chunks; ++c) {
        for (std::int64_t i = 0; i < gw.numel(); ++i)
            gw[static_cast<std::size_t>(i)] += gw_part[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
        for (std::int64_t i = 0; i < gb.numel(); ++i)
            gb[static_cast<std::size_t>(i)] += gb_part[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
    }
}

inline void linear1x1_backward(const Tensor& in, const Tensor& w, const Tensor& gout,
                               Tensor* gin, Tensor& gw, Tensor& gb,
                               ParallelPool* pool = nullptr) {
    const Tensor* ins[1] = {&in};
    Tensor* gins[1] = {gin};
    linear1x1_backward(std::span<const Tensor* const>(ins, 1), w, gout,
                       std::span<Tensor* const>(gins, 1), gw, gb, pool);
}

// ---------------------------------------------------------------------------
// Temporal convolution along T, independent per position X.
// weight [C_out, C_in, K], odd K, output length floor((T + 2p - K)/s) + 1.
// Implemented as per-sample im2col + GEMM.
// ---------------------------------------------------------------------------

inline std::int64_t conv_out_len(std::int64_t t, std::int64_t k, std::int64_t stride,
                                 std::int64_t pad) {
    return (t + 2 * pad - k) / stride + 1;
}

namespace detail {
template <class Real>
std::vector<Real>& tls_buffer(int which) {
    static thread_local std::vector<Real> bufs[4];
    return bufs[which];
}

// cols[(c*K + k), (to*X + x)] = in[c, to*s + k - p, x], zero outside [0, T)
template <class Real>
void im2col(const Real* in, std::int64_t c_in, std::int64_t t, std::int64_t x, std::int64_t k,
            std::int64_t stride, std::int64_t pad, std::int64_t t_out, Real* cols) {
    for (std::int64_t c = 0; c < c_in; ++c) {
        for (std::int64_t kk = 0; kk < k; ++kk) {
            Real* row = cols + (c * k + kk) * t_out * x;
            for (std::int64_t to = 0; to < t_out; ++to) {
                const std::int64_t ti = to * stride + kk - pad;
                if (ti < 0 || ti >= t) {
                    std::fill(row + to * x, row + (to + 1) * x, Real(0));
                } else {
                    const Real* src = in + (c * t + ti) * x;
                    std::copy(src, src + x, row + to * x);
                }
            }
        }
    }
}
}  // namespace detail

template <class Real>
void temporal_conv_forward(const TensorT<Real>& in, const TensorT<Real>& w,
                           const TensorT<Real>& b, std::int64_t stride, std::int64_t pad,
                           TensorT<Real>& out, ParallelPool* pool = nullptr) {
    DSM_CHECK(in.rank() == 4 && w.rank() == 3, "temporal_conv: bad ranks");
    const std::int64_t n = in.dim(0), c_in = in.dim(1), t = in.dim(2), x = in.dim(3);
    const std::int64_t c_out = w.dim(0), k = w.dim(2);
    DSM_CHECK(w.dim(1) == c_in, "temporal_conv: channel mismatch");
    DSM_CHECK(k % 2 == 1, "temporal_conv: kernel length must be odd");
    DSM_CHECK(stride >= 1 && pad >= 0, "temporal_conv: bad stride/pad");
    const std::int64_t t_out = conv_out_len(t, k, stride, pad);
    DSM_CHECK(t_out >= 1, "temporal_conv: output length < 1");
    out.resize({n, c_out, t_out, x});

    ConstMatMap<Real> wm(w.ptr(), c_out, c_in * k);
    Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, 1>> bv(b.ptr(), c_out);

    serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
        auto& cols = detail::tls_buffer<Real>(0);
        cols.resize(static_cast<std::size_t>(c_in * k * t_out * x));
        for (std::int64_t i = lo; i < hi; ++i) {
            detail::im2col(in.ptr() + i * c_in * t * x, c_in, t, x, k, stride, pad, t_out,
                           cols.data());
            ConstMatMap<Real> cm(cols.data(), c_in * k, t_out * x);
            MatMap<Real> om(out.ptr() + i * c_out * t_out * x, c_out, t_out * x);
            om.noalias() = wm * cm;
            om.colwise() += bv;
        }
    });
}

inline void temporal_conv_backward(const Tensor& in, const Tensor& w, const Tensor& gout,
                                   std::int64_t stride, std::int64_t pad, Tensor* gin,
                                   Tensor& gw, Tensor& gb, ParallelPool* pool = nullptr) {
    const std::int64_t n = in.dim(0), c_in = in.dim(1), t = in.dim(2), x = in.dim(3);
    const std::int64_t c_out = w.dim(0), k = w.dim(2);
    const std::int64_t t_out = gout.dim(2);
    if (gin) gin->resize(in.shape);

    const int chunks = chunk_count(pool);
    std::vector<Tensor> gw_part(static_cast<std::size_t>(chunks));
    std::vector<Tensor> gb_part(static_cast<std::size_t>(chunks));
    for (int c = 0; c < chunks; ++c) {
        gw_part[static_cast<std::size_t>(c)].resize(w.shape);
        gb_part[static_cast<std::size_t>(c)].resize({c_out});
    }

    ConstMatMap<double> wm(w.ptr(), c_out, c_in * k);
    serial_or_pool(pool, n, [&](int chunk, std::int64_t lo, std::int64_t hi) {
        auto& cols = detail::tls_buffer<double>(0);
        auto& gcols = detail::tls_buffer<double>(1);
        cols.resize(static_cast<std::size_t>(c_in * k * t_out * x));
        gcols.resize(static_cast<std::size_t>(c_in * k * t_out * x));
        MatMap<double> gwm(gw_part[static_cast<std::size_t>(chunk)].ptr(), c_out, c_in * k);
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 1>> gbv(
            gb_part[static_cast<std::size_t>(chunk)].ptr(), c_out);
        for (std::int64_t i = lo; i < hi; ++i) {
            ConstMatMap<double> gom(gout.ptr() + i * c_out * t_out * x, c_out, t_out * x);
            gbv += gom.rowwise().sum();
            detail::im2col(in.ptr() + i * c_in * t * x, c_in, t, x, k, stride, pad, t_out,
                           cols.data());
            ConstMatMap<double> cm(cols.data(), c_in * k, t_out * x);
            gwm.noalias() += gom * cm.transpose();
            if (gin) {
                MatMap<double> gcm(gcols.data(), c_in * k, t_out * x);
                gcm.noalias() = wm.transpose() * gom;
                // col2im scatter
                double* g = gin->ptr() + i * c_in * t * x;
                for (std::int64_t c = 0; c < c_in; ++c)
                    for (std::int64_t kk = 0; kk < k; ++kk) {
                        const double* row = gcols.data() + (c * k + kk) * t_out * x;
                        for (std::int64_t to = 0; to < t_out; ++to) {
                            const std::int64_t ti = to * stride + kk - pad;
                            if (ti < 0 || ti >= t) continue;
                            double* dst = g + (c * t + ti) * x;
                            const double* src = row + to * x;
                            for (std::int64_t xx = 0; xx < x; ++xx) dst[xx] += src[xx];
                        }
                    }
            }
        }
    });
    for (int c = 0; c < chunks; ++c) {
        for (std::int64_t i = 0; i < gw.numel(); ++i)
            gw[static_cast<std::size_t>(i)] += gw_part[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
        for (std::int64_t i = 0; i < gb.numel(); ++i)
            gb[static_cast<std::size_t>(i)] += gb_part[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
    }
}

// ---------------------------------------------------------------------------
// Batch normalization over (N, T, X) per channel.
// ---------------------------------------------------------------------------

enum class Mode { Train, Eval };

/// Batch statistics cached by the forward pass for the backward pass.
struct BatchNormCache {
    Tensor mean;    // [C]
    Tensor invstd;  // [C]
};

struct BatchNorm {
    Parameter gamma;
    Parameter beta;
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.1;
    double eps = 1e-5;

    BatchNorm() = default;
    BatchNorm(const std::string& name, std::int64_t channels)
        : gamma(name + ".gamma", {channels}),
          beta(name + ".beta", {channels}),
          running_mean({channels}),
          running_var({channels}) {
        for (auto& v : gamma.value.data) v = 1.0;
        for (auto& v : running_var.data) v = 1.0;
    }

    std::int64_t channels() const { return gamma.value.dim(0); }
};

inline void batch_norm_forward(const Tensor& in, BatchNorm& bn, Mode mode, BatchNormCache& cache,
                               Tensor& out, ParallelPool* pool = nullptr) {
    DSM_CHECK(in.rank() == 4 && in.dim(1) == bn.channels(), "batch_norm: channel mismatch");
    const std::int64_t n = in.dim(0), c = in.dim(1), t = in.dim(2), x = in.dim(3);
    const std::int64_t tx = t * x;
    const std::int64_t m = n * tx;  // elements per channel
    out.resize(in.shape);

    if (mode == Mode::Train) {
        if (m < 2) throw ContractError("batch_norm: train mode needs >= 2 elements per channel");
        const int chunks = chunk_count(pool);
        std::vector<std::vector<double>> sums(static_cast<std::size_t>(chunks)),
            sqs(static_cast<std::size_t>(chunks));
        for (auto& v : sums) v.assign(static_cast<std::size_t>(c), 0.0);
        for (auto& v : sqs) v.assign(static_cast<std::size_t>(c), 0.0);
        serial_or_pool(pool, n, [&](int chunk, std::int64_t lo, std::int64_t hi) {
            auto& s = sums[static_cast<std::size_t>(chunk)];
            auto& q = sqs[static_cast<std::size_t>(chunk)];
            for (std::int64_t i = lo; i < hi; ++i)
                for (std::int64_t cc = 0; cc < c; ++cc) {
                    const double* p = in.ptr() + (i * c + cc) * tx;
                    double sv = 0.0, qv = 0.0;
                    for (std::int64_t j = 0; j < tx; ++j) {
                        sv += p[j];
                        qv += p[j] * p[j];
                    }
                    s[static_cast<std::size_t>(cc)] += sv;
                    q[static_cast<std::size_t>(cc)] += qv;
                }
        });
        cache.mean.resize({c});
        cache.invstd.resize({c});
        for (std::int64_t cc = 0; cc < c; ++cc) {
            double s = 0.0, q = 0.0;
            for (int ch = 0; ch < chunks; ++ch) {
                s += sums[static_cast<std::size_t>(ch)][static_cast<std::size_t>(cc)];
                q += sqs[static_cast<std::size_t>(ch)][static_cast<std::size_t>(cc)];
            }
            const double mean = s / static_cast<double>(m);
            double var = q / static_cast<double>(m) - mean * mean;
            if (var < 0.0) var = 0.0;
            cache.mean[static_cast<std::size_t>(cc)] = mean;
            cache.invstd[static_cast<std::size_t>(cc)] = 1.0 / std::sqrt(var + bn.eps);
            const double unbiased = var * static_cast<double>(m) / static_cast<double>(m - 1);
            bn.running_mean[static_cast<std::size_t>(cc)] =
                (1.0 - bn.momentum) * bn.running_mean[static_cast<std::size_t>(cc)] +
                bn.momentum * mean;
            bn.running_var[static_cast<std::size_t>(cc)] =
                (1.0 - bn.momentum) * bn.running_var[static_cast<std::size_t>(cc)] +
                bn.momentum * unbiased;
        }
        serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i)
                for (std::int64_t cc = 0; cc < c; ++cc) {
                    const double mu = cache.mean[static_cast<std::size_t>(cc)];
                    const double is = cache.invstd[static_cast<std::size_t>(cc)];
                    const double g = bn.gamma.value[static_cast<std::size_t>(cc)];
                    const double bb = bn.beta.value[static_cast<std::size_t>(cc)];
                    const double* p = in.ptr() + (i * c + cc) * tx;
                    double* o = out.ptr() + (i * c + cc) * tx;
                    for (std::int64_t j = 0; j < tx; ++j) o[j] = (p[j] - mu) * is * g + bb;
                }
        });
    } else {
        serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i)
                for (std::int64_t cc = 0; cc < c; ++cc) {
                    const double is =
                        1.0 / std::sqrt(bn.running_var[static_cast<std::size_t>(cc)] + bn.eps);
                    const double scale = bn.gamma.value[static_cast<std::size_t>(cc)] * is;
                    const double shift = bn.beta.value[static_cast<std::size_t>(cc)] -
                                         bn.running_mean[static_cast<std::size_t>(cc)] * scale;
                    const double* p = in.ptr() + (i * c + cc) * tx;
                    double* o = out.ptr() + (i * c + cc) * tx;
                    for (std::int64_t j = 0; j < tx; ++j) o[j] = p[j] * scale + shift;
                }
        });
    }
}

inline void batch_norm_backward(const Tensor& in, BatchNorm& bn, const BatchNormCache& cache,
                                const Tensor& gout, Tensor& gin, ParallelPool* pool = nullptr) {
    const std::int64_t n = in.dim(0), c = in.dim(1), tx = in.dim(2) * in.dim(3);
    const double m = static_cast<double>(n * tx);
    gin.resize(in.shape);

    const int chunks = chunk_count(pool);
    // per-channel sums of gy and gy * xhat
    std::vector<std::vector<double>> sg(static_cast<std::size_t>(chunks)),
        sgx(static_cast<std::size_t>(chunks));
    for (auto& v : sg) v.assign(static_cast<std::size_t>(c), 0.0);
    for (auto& v : sgx) v.assign(static_cast<std::size_t>(c), 0.0);
    serial_or_pool(pool, n, [&](int chunk, std::int64_t lo, std::int64_t hi) {
        auto& s = sg[static_cast<std::size_t>(chunk)];
        auto& q = sgx[static_cast<std::size_t>(chunk)];
        for (std::int64_t i = lo; i < hi; ++i)
            for (std::int64_t cc = 0; cc < c; ++cc) {
                const double mu = cache.mean[static_cast<std::size_t>(cc)];
                const double is = cache.invstd[static_cast<std::size_t>(cc)];
                const double* p = in.ptr() + (i * c + cc) * tx;
                const double* g = gout.ptr() + (i * c + cc) * tx;
                double sv = 0.0, qv = 0.0;
                for (std::int64_t j = 0; j < tx; ++j) {
                    sv += g[j];
                    qv += g[j] * (p[j] - mu) * is;
                }
                s[static_cast<std::size_t>(cc)] += sv;
                q[static_cast<std::size_t>(cc)] += qv;
            }
    });
    std::vector<double> sum_g(static_cast<std::size_t>(c), 0.0),
        sum_gx(static_cast<std::size_t>(c), 0.0);
    for (std::int64_t cc = 0; cc < c; ++cc) {
        for (int ch = 0; ch < chunks; ++ch) {
            sum_g[static_cast<std::size_t>(cc)] += sg[static_cast<std::size_t>(ch)][static_cast<std::size_t>(cc)];
            sum_gx[static_cast<std::size_t>(cc)] += sgx[static_cast<std::size_t>(ch)][static_cast<std::size_t>(cc)];
        }
        bn.beta.grad[static_cast<std::size_t>(cc)] += sum_g[static_cast<std::size_t>(cc)];
        bn.gamma.grad[static_cast<std::size_t>(cc)] += sum_gx[static_cast<std::size_t>(cc)];
    }
    serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i)
            for (std::int64_t cc = 0; cc < c; ++cc) {
                const double mu = cache.mean[static_cast<std::size_t>(cc)];
                const double is = cache.invstd[static_cast<std::size_t>(cc)];
                const double g = bn.gamma.value[static_cast<std::size_t>(cc)];
                const double a = sum_g[static_cast<std::size_t>(cc)] / m;
                const double bq = sum_gx[static_cast<std::size_t>(cc)] / m;
                const double* p = in.ptr() + (i * c + cc) * tx;
                const double* go = gout.ptr() + (i * c + cc) * tx;
                double* gi = gin.ptr() + (i * c + cc) * tx;
                for (std::int64_t j = 0; j < tx; ++j) {
                    const double xh = (p[j] - mu) * is;
                    gi[j] = g * is * (go[j] - a - xh * bq);
                }
            }
    });
}

// ---------------------------------------------------------------------------
// LeakyReLU. Backward reads the sign of the *output*, which matches the sign
// of the input (slope > 0), so the pre-activation does not need to be kept.
// ---------------------------------------------------------------------------

template <class Real>
void leaky_relu_forward(TensorT<Real>& inout, double slope) {
    const Real s = static_cast<Real>(slope);
    for (auto& v : inout.data) v = v >= Real(0) ? v : s * v;
}

inline void leaky_relu_backward(const Tensor& out, const Tensor& gout, Tensor& gin,
                                double slope) {
    gin.resize(out.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        gin[i] = out[i] >= 0.0 ? gout[i] : slope * gout[i];
}

// ---------------------------------------------------------------------------
// Inverted dropout. Masks are derived from (seed, step, sample) counters, so
// they are independent of thread scheduling; survivors are scaled by
// 1/(1 - p) so the inference path is scale-free.
// ---------------------------------------------------------------------------

struct DropoutMask {
    std::vector<std::uint64_t> bits;
    double keep = 1.0;

    bool kept(std::int64_t i) const {
        return (bits[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1ULL;
    }
};

inline void dropout_forward(Tensor& inout, double p, Mode mode, std::uint64_t seed,
                            std::uint64_t step, DropoutMask& mask, ParallelPool* pool = nullptr) {
    DSM_CHECK(p >= 0.0 && p < 1.0, "dropout: p must be in [0, 1)");
    if (mode == Mode::Eval || p == 0.0) {
        mask.bits.clear();
        mask.keep = 1.0;
        return;
    }
    const std::int64_t n = inout.dim(0);
    const std::int64_t per = inout.numel() / n;
    const double keep = 1.0 - p;
    const double scale = 1.0 / keep;
    // threshold on raw 64-bit draws
    const std::uint64_t thr = static_cast<std::uint64_t>(
        keep * 18446744073709551616.0 /* 2^64 */);
    mask.keep = keep;
    mask.bits.assign(static_cast<std::size_t>((inout.numel() + 63) / 64), 0);

    serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            SplitMix64 g(derive_seed(seed, "dropout", step * 0x10001ULL + static_cast<std::uint64_t>(i)));
            double* v = inout.ptr() + i * per;
            const std::int64_t base = i * per;
            for (std::int64_t j = 0; j < per; ++j) {
                if (g.next() < thr) {
                    mask.bits[static_cast<std::size_t>((base + j) >> 6)] |=
                        1ULL << ((base + j) & 63);
                    v[j] *= scale;
                } else {
                    v[j] = 0.0;
                }
            }
        }
    });
}

inline void dropout_backward(const DropoutMask& mask, Tensor& ginout, ParallelPool* pool = nullptr) {
    if (mask.bits.empty()) return;  // eval or p == 0: identity
    const double scale = 1.0 / mask.keep;
    const std::int64_t n = ginout.dim(0);
    const std::int64_t per = ginout.numel() / n;
    serial_or_pool(pool, n, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            double* v = ginout.ptr() + i * per;
            const std::int64_t base = i * per;
            for (std::int64_t j = 0; j < per; ++j)
                v[j] = mask.kept(base + j) ? v[j] * scale : 0.0;
        }
    });
}

// ---------------------------------------------------------------------------
// Global average pooling over (T, X): [N, C, T, X] -> [N, C].
// ---------------------------------------------------------------------------

template <class Real>
void global_avg_pool_forward(const TensorT<Real>& in, TensorT<Real>& out) {
    const std::int64_t n = in.dim(0), c = in.dim(1), tx = in.dim(2) * in.dim(3);
    out.resize({n, c});
    const Real inv = Real(1) / static_cast<Real>(tx);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t cc = 0; cc < c; ++cc) {
            const Real* p = in.ptr() + (i * c + cc) * tx;
            Real s = Real(0);
            for (std::int64_t j = 0; j < tx; ++j) s += p[j];
            out[static_cast<std::size_t>(i * c + cc)] = s * inv;
        }
}

inline void global_avg_pool_backward(const std::vector<std::int64_t>& in_shape,
                                     const Tensor& gout, Tensor& gin) {
    gin.resize(in_shape);
    const std::int64_t n = in_shape[0], c = in_shape[1], tx = in_shape[2] * in_shape[3];
    const double inv = 1.0 / static_cast<double>(tx);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t cc = 0; cc < c; ++cc) {
            const double g = gout[static_cast<std::size_t>(i * c + cc)] * inv;
            double* p = gin.ptr() + (i * c + cc) * tx;
            for (std::int64_t j = 0; j < tx; ++j) p[j] = g;
        }
}

// ---------------------------------------------------------------------------
// Fully connected head: [N, F] x [K, F]^T + b -> [N, K].
// ---------------------------------------------------------------------------

template <class Real>
void fc_forward(const TensorT<Real>& in, const TensorT<Real>& w, const TensorT<Real>& b,
                TensorT<Real>& out) {
    const std::int64_t n = in.dim(0), f = in.dim(1), k = w.dim(0);
    DSM_CHECK(w.dim(1) == f && b.dim(0) == k, "fc: shape mismatch");
    out.resize({n, k});
    ConstMatMap<Real> im(in.ptr(), n, f);
    ConstMatMap<Real> wm(w.ptr(), k, f);
    MatMap<Real> om(out.ptr(), n, k);
    om.noalias() = im * wm.transpose();
    Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>> bv(b.ptr(), k);
    om.rowwise() += bv;
}

inline void fc_backward(const Tensor& in, const Tensor& w, const Tensor& gout, Tensor& gin,
                        Tensor& gw, Tensor& gb) {
    const std::int64_t n = in.dim(0), f = in.dim(1), k = w.dim(0);
    gin.resize(in.shape);
    ConstMatMap<double> im(in.ptr(), n, f);
    ConstMatMap<double> wm(w.ptr(), k, f);
    ConstMatMap<double> gom(gout.ptr(), n, k);
    MatMap<double> gim(gin.ptr(), n, f);
    gim.noalias() = gom * wm;
    MatMap<double> gwm(gw.ptr(), k, f);
    gwm.noalias() += gom.transpose() * im;
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < k; ++j)
            gb[static_cast<std::size_t>(j)] += gout[static_cast<std::size_t>(i * k + j)];
}

// ---------------------------------------------------------------------------
// Label-smoothing cross entropy with stable log-softmax.
// Smoothed target: (1 - eps) * onehot + eps / K over all classes.
// ---------------------------------------------------------------------------

struct LossResult {
    double loss = 0.0;
    Tensor dlogits;  // [N, K], gradient of the mean loss
};

inline LossResult label_smoothing_loss(const Tensor& logits, const std::vector<int>& labels,
                                       double eps) {
    DSM_CHECK(logits.rank() == 2, "label_smoothing_loss: logits must be [N, K]");
    const std::int64_t n = logits.dim(0), k = logits.dim(1);
    DSM_CHECK(k >= 2, "label_smoothing_loss: need at least two classes");
    DSM_CHECK(eps >= 0.0 && eps < 1.0, "label_smoothing_loss: eps in [0, 1)");
    DSM_CHECK(static_cast<std::int64_t>(labels.size()) == n,
              "label_smoothing_loss: label count mismatch");

    LossResult res;
    res.dlogits.resize(logits.shape);
    const double off = eps / static_cast<double>(k);
    const double on = 1.0 - eps + off;
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double* l = logits.ptr() + i * k;
        double mx = l[0];
        for (std::int64_t j = 1; j < k; ++j) mx = std::max(mx, l[j]);
        double se = 0.0;
        for (std::int64_t j = 0; j < k; ++j) se += std::exp(l[j] - mx);
        const double lse = mx + std::log(se);
        const int y = labels[static_cast<std::size_t>(i)];
        DSM_CHECK(y >= 0 && y < k, "label_smoothing_loss: label out of range");
        double sample_loss = 0.0;
        double* d = res.dlogits.ptr() + i * k;
        for (std::int64_t j = 0; j < k; ++j) {
            const double target = (j == y) ? on : off;
            const double logp = l[j] - lse;
            sample_loss -= target * logp;
            d[j] = (std::exp(logp) - target) / static_cast<double>(n);
        }
        total += sample_loss;
    }
    res.loss = total / static_cast<double>(n);
    return res;
}

// ---------------------------------------------------------------------------
// Adam with bias correction.
// ---------------------------------------------------------------------------

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

inline void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
    for (Parameter* p : params) {
        p->step_count += 1;
        const double t = static_cast<double>(p->step_count);
        const double bc1 = 1.0 - std::pow(cfg.beta1, t);
        const double bc2 = 1.0 - std::pow(cfg.beta2, t);
        for (std::size_t i = 0; i < p->value.data.size(); ++i) {
            const double g = p->grad[i];
            p->adam_m[i] = cfg.beta1 * p->adam_m[i] + (1.0 - cfg.beta1) * g;
            p->adam_v[i] = cfg.beta2 * p->adam_v[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = p->adam_m[i] / bc1;
            const double vhat = p->adam_v[i] / bc2;
            p->value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

inline void adam_step(std::vector<Parameter*>& params, const AdamConfig& cfg) {
    adam_step(std::span<Parameter* const>(params.data(), params.size()), cfg);
}

}  // namespace dsm::nn
