#pragma once

#include <variant>
#include <vector>

#include "contactkit/linalg.hpp"

namespace contactkit {

// Dense multilinear map with one output slot and 1..3 input slots, entries
// indexed (output, in1, in2, ...) row-major. Houses D2f (m,n,n), D3f
// (m,n,n,n), DN (n,m,n), D2N (n,m,n,n).
class MultilinearMap {
  public:
    MultilinearMap() = default;
    MultilinearMap(int output_dim, std::vector<int> input_dims);

    int arity() const { return 1 + static_cast<int>(input_dims_.size()); }
    int output_dim() const { return output_dim_; }
    const std::vector<int>& input_dims() const { return input_dims_; }

    double& at(const std::vector<int>& idx);
    double at(const std::vector<int>& idx) const;

    std::vector<double>& data() { return a_; }
    const std::vector<double>& data() const { return a_; }

    // Contracts one input slot (0-based among inputs) against a vector,
    // returning a map of arity one less.
    MultilinearMap contract_slot(int slot, const Vec& v) const;

    // Contracts every input slot against the given vectors.
    Vec apply(const std::vector<const Vec*>& ins) const;

    // Contracts all input slots except `open_slot`; column j of the result
    // uses the unit vector e_j in the open slot.
    Matrix apply_open(int open_slot, const std::vector<const Vec*>& ins) const;

    double max_abs() const;

  private:
    size_t offset(const std::vector<int>& idx) const;

    int output_dim_ = 0;
    std::vector<int> input_dims_;
    std::vector<int> strides_;  // per input slot; output stride is product of input dims
    std::vector<double> a_;
};

// Marker for an input slot left open during contraction.
struct IdentitySlot {};

using SlotValue = std::variant<Vec, IdentitySlot>;
using ContractionResult = std::variant<MultilinearMap, Matrix, Vec>;

// Contracts the listed slots (0-based input-slot indices). Vector slots are
// consumed; Identity slots (and unlisted slots) remain open. Result shape
// depends on how many input slots remain: none -> Vec, one -> DenseMatrix
// (output_dim x open_dim), more -> MultilinearMap.
ContractionResult contract(const MultilinearMap& map,
                           const std::vector<std::pair<int, SlotValue>>& slots);

}  // namespace contactkit
