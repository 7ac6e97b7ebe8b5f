#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dsm/common.hpp"

namespace dsm {

/// Dense row-major tensor. Training runs on TensorT<double>; the float
/// instantiation exists for the reduced-precision inference path.
template <class Real>
struct TensorT {
    std::vector<std::int64_t> shape;
    std::vector<Real> data;

    TensorT() = default;

    explicit TensorT(std::vector<std::int64_t> s) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(numel_of(shape)), Real(0));
    }

    TensorT(std::initializer_list<std::int64_t> s)
        : TensorT(std::vector<std::int64_t>(s)) {}

    static std::int64_t numel_of(const std::vector<std::int64_t>& s) {
        std::int64_t n = 1;
        for (auto d : s) {
            DSM_CHECK(d >= 0, "tensor dimensions must be non-negative");
            n *= d;
        }
        return n;
    }

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    std::int64_t dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int rank() const { return static_cast<int>(shape.size()); }

    Real* ptr() { return data.data(); }
    const Real* ptr() const { return data.data(); }

    Real& operator[](std::size_t i) { return data[i]; }
    Real operator[](std::size_t i) const { return data[i]; }

    void zero() { std::fill(data.begin(), data.end(), Real(0)); }

    void resize(std::vector<std::int64_t> s) {
        shape = std::move(s);
        data.assign(static_cast<std::size_t>(numel_of(shape)), Real(0));
    }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < shape.size(); ++i)
            os << (i ? "," : "") << shape[i];
        os << "]";
        return os.str();
    }

    template <class Other>
    TensorT<Other> cast() const {
        TensorT<Other> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            out.data[i] = static_cast<Other>(data[i]);
        return out;
    }
};

using Tensor = TensorT<double>;

/// Trainable tensor with its gradient and Adam moment buffers.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor adam_m;
    Tensor adam_v;
    std::int64_t step_count = 0;

    Parameter() = default;
    Parameter(std::string n, std::vector<std::int64_t> shape)
        : name(std::move(n)), value(shape), grad(shape), adam_m(shape), adam_v(shape) {}

    void zero_grad() { grad.zero(); }
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw ContractError(std::string(what) + ": shape mismatch " + a.shape_str() +
                            " vs " + b.shape_str());
}

}  // namespace dsm
