#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace neuromix {

using Shape = std::vector<std::size_t>;

// Cache-line aligned storage. Vectorized kernels pick their code path from
// the address alignment, so unaligned buffers would make results depend on
// heap layout in the last bits.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlignment{64};

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

    template <typename U>
    friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
        return true;
    }
};

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles. Shapes have positive dimensions and the
// element count always equals the product of the shape.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, const std::vector<double>& data);

    // Rank-2 tensor from nested rows, mostly for tests and small fixtures.
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor vector(std::initializer_list<double> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double* raw() noexcept { return data_.data(); }
    const double* raw() const noexcept { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Rank-2 element access; unchecked beyond an assert.
    double& at(std::size_t row, std::size_t col);
    double at(std::size_t row, std::size_t col) const;

    // Sample `i` along the leading axis, as a view.
    std::span<double> row(std::size_t i);
    std::span<const double> row(std::size_t i) const;

    // False if any element is NaN or infinite.
    bool all_finite() const noexcept;

    // Same data under a new shape with the same element count.
    Tensor reshaped(Shape shape) const;
    void reshape(Shape shape);

    void fill(double value);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double, AlignedAllocator<double>> data_;
};

// A trainable tensor and the gradient accumulated into it by backward passes.
struct Parameter {
    Tensor value;
    Tensor grad;

    Parameter() = default;
    explicit Parameter(Tensor v) : value(std::move(v)), grad(value.shape()) {}

    void zero_grad() { grad.fill(0.0); }
};

}  // namespace neuromix
