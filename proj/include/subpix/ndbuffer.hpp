#ifndef SUBPIX_NDBUFFER_HPP
#define SUBPIX_NDBUFFER_HPP

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace subpix {

/// Dense n-dimensional buffer, row-major flat storage.
/// Out-of-bounds indexing is a contract violation (asserted), not wraparound.
template <typename T>
class NdBuffer {
public:
    NdBuffer() = default;

    explicit NdBuffer(std::vector<int> shape, T fill = T{}) :
        shape_(std::move(shape))
    {
        std::size_t n = 1;
        for (int s : shape_) {
            if (s <= 0) {
                throw std::invalid_argument("NdBuffer: non-positive dimension");
            }
            n *= static_cast<std::size_t>(s);
        }
        data_.assign(n, fill);
        computeStrides();
    }

    int rank() const { return static_cast<int>(shape_.size()); }
    std::vector<int> const& shape() const { return shape_; }

    int dim(int i) const {
        assert(i >= 0 && i < rank());
        return shape_[static_cast<std::size_t>(i)];
    }

    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    T const* data() const { return data_.data(); }

    std::vector<T>& raw() { return data_; }
    std::vector<T> const& raw() const { return data_; }

    std::size_t offset(std::span<const int> idx) const {
        assert(static_cast<int>(idx.size()) == rank());
        std::size_t o = 0;
        for (int i = 0; i < rank(); i++) {
            assert(idx[static_cast<std::size_t>(i)] >= 0 &&
                   idx[static_cast<std::size_t>(i)] < shape_[static_cast<std::size_t>(i)]);
            o += static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]) *
                 strides_[static_cast<std::size_t>(i)];
        }
        return o;
    }

    bool inBounds(std::span<const int> idx) const {
        if (static_cast<int>(idx.size()) != rank()) {
            return false;
        }
        for (int i = 0; i < rank(); i++) {
            if (idx[static_cast<std::size_t>(i)] < 0 ||
                idx[static_cast<std::size_t>(i)] >= shape_[static_cast<std::size_t>(i)]) {
                return false;
            }
        }
        return true;
    }

    template <typename... Is>
    T& operator()(Is... is) {
        int idx[] = {static_cast<int>(is)...};
        return data_[offset(std::span<const int>(idx, sizeof...(Is)))];
    }

    template <typename... Is>
    T const& operator()(Is... is) const {
        int idx[] = {static_cast<int>(is)...};
        return data_[offset(std::span<const int>(idx, sizeof...(Is)))];
    }

    T& at(std::span<const int> idx) { return data_[offset(idx)]; }
    T const& at(std::span<const int> idx) const { return data_[offset(idx)]; }

    T& flat(std::size_t i) {
        assert(i < data_.size());
        return data_[i];
    }
    T const& flat(std::size_t i) const {
        assert(i < data_.size());
        return data_[i];
    }

    bool operator==(NdBuffer const& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    void computeStrides() {
        strides_.assign(shape_.size(), 1);
        for (int i = rank() - 2; i >= 0; i--) {
            strides_[static_cast<std::size_t>(i)] =
                strides_[static_cast<std::size_t>(i) + 1] *
                static_cast<std::size_t>(shape_[static_cast<std::size_t>(i) + 1]);
        }
    }

    std::vector<int> shape_;
    std::vector<std::size_t> strides_;
    std::vector<T> data_;
};

using NdBufferF = NdBuffer<float>;
using NdBufferD = NdBuffer<double>;
using MaskBuffer = NdBuffer<std::uint8_t>;

} // namespace subpix

#endif
