#pragma once

// Central finite-difference comparison for analytic gradients. Lives in the
// library (not only in tests) so new blocks can be validated from a REPL or a
// quick tool without rebuilding the suite.

#include <functional>
#include <string>
#include <vector>

#include "dsm/tensor.hpp"

namespace dsm::nn {

struct GradCheckInput {
    std::string name;
    Tensor* value = nullptr;      // perturbed in place
    const Tensor* grad = nullptr; // analytic gradient w.r.t. value
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst;  // "name[i]"
    bool ok = true;
};

/// `loss` must be a pure function of the current contents of every
/// GradCheckInput::value. The analytic gradients must already be populated
/// (one backward pass at the unperturbed point).
inline GradCheckReport grad_check(const std::function<double()>& loss,
                                  std::vector<GradCheckInput> inputs, double tol,
                                  double h = 1e-5) {
    GradCheckReport rep;
    for (auto& in : inputs) {
        DSM_CHECK(in.value && in.grad, "grad_check: null tensor");
        DSM_CHECK(in.value->same_shape(*in.grad), "grad_check: grad shape mismatch");
        for (std::size_t i = 0; i < in.value->data.size(); ++i) {
            const double orig = (*in.value)[i];
            (*in.value)[i] = orig + h;
            const double fp = loss();
            (*in.value)[i] = orig - h;
            const double fm = loss();
            (*in.value)[i] = orig;
            const double fd = (fp - fm) / (2.0 * h);
            const double an = (*in.grad)[i];
            const double denom = std::max({std::abs(fd), std::abs(an), 1e-3});
            const double rel = std::abs(fd - an) / denom;
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst = in.name + "[" + std::to_string(i) + "]";
            }
        }
    }
    rep.ok = rep.max_rel_err < tol;
    return rep;
}

}  // namespace dsm::nn
