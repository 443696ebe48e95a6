#include "contactkit/multilinear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace contactkit {

MultilinearMap::MultilinearMap(int output_dim, std::vector<int> input_dims)
    : output_dim_(output_dim), input_dims_(std::move(input_dims)) {
    if (output_dim_ < 1 || input_dims_.empty() || input_dims_.size() > 3)
        throw DimensionError("multilinear map needs output dim >= 1 and 1..3 input slots");
    for (int d : input_dims_)
        if (d < 1) throw DimensionError("multilinear input dims must be >= 1");
    strides_.assign(input_dims_.size(), 1);
    for (int s = static_cast<int>(input_dims_.size()) - 2; s >= 0; --s)
        strides_[s] = strides_[s + 1] * input_dims_[s + 1];
    const size_t per_out = static_cast<size_t>(strides_[0]) * input_dims_[0];
    a_.assign(per_out * output_dim_, 0.0);
}

size_t MultilinearMap::offset(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != arity())
        throw DimensionError("index arity mismatch");
    const size_t per_out = a_.size() / output_dim_;
    size_t off = static_cast<size_t>(idx[0]) * per_out;
    for (size_t s = 0; s < input_dims_.size(); ++s)
        off += static_cast<size_t>(idx[s + 1]) * strides_[s];
    return off;
}

double& MultilinearMap::at(const std::vector<int>& idx) { return a_[offset(idx)]; }

double MultilinearMap::at(const std::vector<int>& idx) const { return a_[offset(idx)]; }

MultilinearMap MultilinearMap::contract_slot(int slot, const Vec& v) const {
    const int p = static_cast<int>(input_dims_.size());
    if (slot < 0 || slot >= p) throw DimensionError("contraction slot out of range");
    if (static_cast<int>(v.size()) != input_dims_[slot])
        throw DimensionError("contraction vector length mismatch");
    if (p == 1) throw DimensionError("use apply for the last slot");
    std::vector<int> rest;
    for (int s = 0; s < p; ++s)
        if (s != slot) rest.push_back(input_dims_[s]);
    MultilinearMap out(output_dim_, rest);
    std::vector<int> idx(static_cast<size_t>(p) + 1, 0);
    std::vector<int> oidx(static_cast<size_t>(p), 0);
    // Walk all entries of the result and sum over the contracted slot.
    const auto walk = [&](auto&& self, int depth) -> void {
        if (depth == p) {
            double s = 0;
            std::vector<int> full(static_cast<size_t>(p) + 1);
            full[0] = oidx[0];
            int r = 1;
            for (int si = 0; si < p; ++si)
                if (si != slot) full[si + 1] = oidx[r++];
            for (int kv = 0; kv < input_dims_[slot]; ++kv) {
                full[slot + 1] = kv;
                s += at(full) * v[kv];
            }
            out.at(oidx) = s;
            return;
        }
        const int lim = (depth == 0) ? output_dim_ : rest[depth - 1];
        for (int i = 0; i < lim; ++i) {
            oidx[depth] = i;
            self(self, depth + 1);
        }
    };
    oidx.resize(static_cast<size_t>(p));  // output + (p-1) input indices
    walk(walk, 0);
    return out;
}

Vec MultilinearMap::apply(const std::vector<const Vec*>& ins) const {
    const int p = static_cast<int>(input_dims_.size());
    if (static_cast<int>(ins.size()) != p)
        throw DimensionError("apply needs one vector per input slot");
    for (int s = 0; s < p; ++s)
        if (static_cast<int>(ins[s]->size()) != input_dims_[s])
            throw DimensionError("apply vector length mismatch");
    Vec out(output_dim_, 0.0);
    const size_t per_out = a_.size() / output_dim_;
    std::vector<int> idx(static_cast<size_t>(p), 0);
    for (int o = 0; o < output_dim_; ++o) {
        const double* base = a_.data() + static_cast<size_t>(o) * per_out;
        std::fill(idx.begin(), idx.end(), 0);
        double acc = 0;
        for (size_t flat = 0; flat < per_out; ++flat) {
            double w = 1;
            size_t rem = flat;
            for (int s = 0; s < p; ++s) {
                const int i = static_cast<int>(rem / strides_[s]);
                rem %= strides_[s];
                w *= (*ins[s])[i];
            }
            acc += base[flat] * w;
        }
        out[o] = acc;
    }
    return out;
}

Matrix MultilinearMap::apply_open(int open_slot, const std::vector<const Vec*>& ins) const {
    const int p = static_cast<int>(input_dims_.size());
    if (open_slot < 0 || open_slot >= p) throw DimensionError("open slot out of range");
    if (static_cast<int>(ins.size()) != p - 1)
        throw DimensionError("apply_open needs one vector per closed slot");
    const int open_dim = input_dims_[open_slot];
    Matrix out(output_dim_, open_dim);
    Vec ej(open_dim, 0.0);
    std::vector<const Vec*> full(static_cast<size_t>(p));
    int r = 0;
    for (int s = 0; s < p; ++s) full[s] = (s == open_slot) ? &ej : ins[r++];
    for (int j = 0; j < open_dim; ++j) {
        ej[j] = 1.0;
        const Vec col = apply(full);
        ej[j] = 0.0;
        for (int i = 0; i < output_dim_; ++i) out(i, j) = col[i];
    }
    return out;
}

double MultilinearMap::max_abs() const {
    double m = 0;
    for (double v : a_) m = std::max(m, std::fabs(v));
    return m;
}

ContractionResult contract(const MultilinearMap& map,
                           const std::vector<std::pair<int, SlotValue>>& slots) {
    const int p = static_cast<int>(map.input_dims().size());
    std::vector<const Vec*> supplied(static_cast<size_t>(p), nullptr);
    for (const auto& [slot, value] : slots) {
        if (slot < 0 || slot >= p) throw DimensionError("contraction slot out of range");
        if (std::holds_alternative<Vec>(value))
            supplied[slot] = &std::get<Vec>(value);
    }
    std::vector<int> open;
    for (int s = 0; s < p; ++s)
        if (!supplied[s]) open.push_back(s);

    if (open.empty()) {
        std::vector<const Vec*> ins(supplied.begin(), supplied.end());
        return map.apply(ins);
    }
    if (open.size() == 1) {
        std::vector<const Vec*> ins;
        for (int s = 0; s < p; ++s)
            if (supplied[s]) ins.push_back(supplied[s]);
        return map.apply_open(open[0], ins);
    }
    // More than one open slot: contract supplied slots one at a time,
    // highest slot first so earlier indices stay valid.
    MultilinearMap cur = map;
    for (int s = p - 1; s >= 0; --s)
        if (supplied[s]) cur = cur.contract_slot(s, *supplied[s]);
    return cur;
}

}  // namespace contactkit
