#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace drivegym {

// Small fixed-capacity vector for ODE states and per-channel voltages.
// Every motor state has at most four entries and every converter at most
// three channels, so the integrators never allocate.
class StateVec {
public:
    static constexpr std::size_t kCapacity = 4;

    StateVec() = default;
    explicit StateVec(std::size_t n) : size_(n) { assert(n <= kCapacity); }
    StateVec(std::initializer_list<double> values) : size_(values.size())
    {
        assert(values.size() <= kCapacity);
        std::copy(values.begin(), values.end(), data_.begin());
    }
    explicit StateVec(std::span<const double> values) : size_(values.size())
    {
        assert(values.size() <= kCapacity);
        std::copy(values.begin(), values.end(), data_.begin());
    }

    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] bool empty() const { return size_ == 0; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double* begin() { return data_.data(); }
    double* end() { return data_.data() + size_; }
    [[nodiscard]] const double* begin() const { return data_.data(); }
    [[nodiscard]] const double* end() const { return data_.data() + size_; }

    [[nodiscard]] std::span<const double> span() const { return {data_.data(), size_}; }
    std::span<double> span() { return {data_.data(), size_}; }

    [[nodiscard]] bool all_finite() const
    {
        return std::all_of(begin(), end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const StateVec& a, const StateVec& b)
    {
        return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
    }

private:
    std::array<double, kCapacity> data_{};
    std::size_t size_{0};
};

/// y = x + h * k, element-wise.
inline StateVec axpy(const StateVec& x, double h, const StateVec& k)
{
    StateVec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + h * k[i];
    return y;
}

}  // namespace drivegym
