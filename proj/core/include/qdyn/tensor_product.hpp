#pragma once

#include <span>
#include <vector>

#include "qdyn/operators.hpp"
#include "qdyn/states.hpp"

namespace qdyn {

/// Kronecker product of states in argument order; the result records the
/// concatenated factor dimensions.
QuantumState tensor_product_states(std::span<const QuantumState> states);

template <typename... Rest>
QuantumState tensor_product_states(const QuantumState& first, const QuantumState& second,
                                   const Rest&... rest) {
    const QuantumState arr[] = {first, second, rest...};
    return tensor_product_states(std::span<const QuantumState>(arr, 2 + sizeof...(rest)));
}

Operator tensor_product_ops(std::span<const Operator> ops);

template <typename... Rest>
Operator tensor_product_ops(const Operator& first, const Operator& second, const Rest&... rest) {
    const Operator arr[] = {first, second, rest...};
    return tensor_product_ops(std::span<const Operator>(arr, 2 + sizeof...(rest)));
}

DensityMatrix tensor_product_dms(std::span<const DensityMatrix> dms);

template <typename... Rest>
DensityMatrix tensor_product_dms(const DensityMatrix& first, const DensityMatrix& second,
                                 const Rest&... rest) {
    const DensityMatrix arr[] = {first, second, rest...};
    return tensor_product_dms(std::span<const DensityMatrix>(arr, 2 + sizeof...(rest)));
}

/// Traces out the listed factors of a composite density matrix. The input
/// must carry product dimensions; the result keeps the remaining factors in
/// their original order.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& trace_out);

}  // namespace qdyn
