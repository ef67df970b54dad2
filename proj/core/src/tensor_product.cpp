#include "qdyn/tensor_product.hpp"

#include <algorithm>

namespace qdyn {

namespace {

// Factor list of one constituent: its own product dims if present, else the
// bare dimension.
void append_factors(std::vector<int>& into, const std::vector<int>& product_dims, int dims) {
    if (product_dims.empty()) {
        into.push_back(dims);
    } else {
        into.insert(into.end(), product_dims.begin(), product_dims.end());
    }
}

}  // namespace

QuantumState tensor_product_states(std::span<const QuantumState> states) {
    if (states.size() < 2) throw ArgumentError("tensor_product_states: need at least two states");
    ComplexMatrix acc = states[0].amplitudes();
    std::vector<int> factors;
    append_factors(factors, states[0].product_dims(), states[0].dims());
    for (std::size_t i = 1; i < states.size(); ++i) {
        acc = linalg::kron(acc, states[i].amplitudes());
        append_factors(factors, states[i].product_dims(), states[i].dims());
    }
    return QuantumState(std::move(acc), std::move(factors));
}

Operator tensor_product_ops(std::span<const Operator> ops) {
    if (ops.size() < 2) throw ArgumentError("tensor_product_ops: need at least two operators");
    ComplexMatrix acc = ops[0].matrix();
    std::vector<int> factors;
    append_factors(factors, ops[0].product_dims(), ops[0].dims());
    for (std::size_t i = 1; i < ops.size(); ++i) {
        acc = linalg::kron(acc, ops[i].matrix());
        append_factors(factors, ops[i].product_dims(), ops[i].dims());
    }
    return Operator(std::move(acc), std::move(factors));
}

DensityMatrix tensor_product_dms(std::span<const DensityMatrix> dms) {
    if (dms.size() < 2) throw ArgumentError("tensor_product_dms: need at least two states");
    ComplexMatrix acc = dms[0].matrix();
    std::vector<int> factors;
    append_factors(factors, dms[0].product_dims(), dms[0].dims());
    for (std::size_t i = 1; i < dms.size(); ++i) {
        acc = linalg::kron(acc, dms[i].matrix());
        append_factors(factors, dms[i].product_dims(), dms[i].dims());
    }
    return DensityMatrix(std::move(acc), std::move(factors));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& trace_out) {
    if (rho.product_dims().empty()) {
        throw ArgumentError("partial_trace: density matrix has no product dimensions");
    }
    ComplexMatrix reduced = linalg::partial_trace_raw(rho.matrix(), rho.product_dims(), trace_out);

    std::vector<int> remaining;
    for (int f = 0; f < static_cast<int>(rho.product_dims().size()); ++f) {
        if (std::find(trace_out.begin(), trace_out.end(), f) == trace_out.end()) {
            remaining.push_back(rho.product_dims()[f]);
        }
    }
    if (remaining.size() == 1) remaining.clear();  // a single factor needs no annotation
    return DensityMatrix(std::move(reduced), std::move(remaining));
}

}  // namespace qdyn
