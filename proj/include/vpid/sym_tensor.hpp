#pragma once

//! \file sym_tensor.hpp
//! \brief Symmetric second-order tensor stored by its six unique components.

#include <array>
#include <cmath>
#include <cstddef>

namespace vpid {

//! \brief Symmetric 3x3 tensor with components ordered [t11, t22, t33, t12, t13, t23]
class SymTensor2 {
  public:
    static constexpr std::size_t size = 6;

    constexpr SymTensor2() = default;
    constexpr explicit SymTensor2(const std::array<double, 6>& c) : c_(c) {}
    constexpr SymTensor2(double t11, double t22, double t33, double t12, double t13, double t23)
        : c_{t11, t22, t33, t12, t13, t23} {}

    static constexpr SymTensor2 identity() { return {1.0, 1.0, 1.0, 0.0, 0.0, 0.0}; }
    static constexpr SymTensor2 diag(double a, double b, double c) { return {a, b, c, 0.0, 0.0, 0.0}; }

    constexpr double& operator[](std::size_t i) { return c_[i]; }
    constexpr double operator[](std::size_t i) const { return c_[i]; }

    //! Full-matrix access, (i, j) in 0..2.
    constexpr double operator()(int i, int j) const {
        if (i == j) return c_[i];
        const int s = i + j;  // 1 -> 12, 2 -> 13, 3 -> 23
        return c_[2 + s];
    }

    constexpr const std::array<double, 6>& components() const { return c_; }

    constexpr double trace() const { return c_[0] + c_[1] + c_[2]; }

    constexpr SymTensor2& operator+=(const SymTensor2& o) {
        for (std::size_t i = 0; i < size; ++i) c_[i] += o.c_[i];
        return *this;
    }
    constexpr SymTensor2& operator-=(const SymTensor2& o) {
        for (std::size_t i = 0; i < size; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    constexpr SymTensor2& operator*=(double s) {
        for (auto& v : c_) v *= s;
        return *this;
    }

    friend constexpr SymTensor2 operator+(SymTensor2 a, const SymTensor2& b) { return a += b; }
    friend constexpr SymTensor2 operator-(SymTensor2 a, const SymTensor2& b) { return a -= b; }
    friend constexpr SymTensor2 operator-(SymTensor2 a) { return a *= -1.0; }
    friend constexpr SymTensor2 operator*(SymTensor2 a, double s) { return a *= s; }
    friend constexpr SymTensor2 operator*(double s, SymTensor2 a) { return a *= s; }
    friend constexpr SymTensor2 operator/(SymTensor2 a, double s) { return a *= (1.0 / s); }
    friend constexpr bool operator==(const SymTensor2&, const SymTensor2&) = default;

  private:
    std::array<double, 6> c_{};
};

//! Double contraction A:B with the off-diagonal terms counted twice.
constexpr double ddot(const SymTensor2& a, const SymTensor2& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5]);
}

inline double norm(const SymTensor2& a) { return std::sqrt(ddot(a, a)); }

constexpr SymTensor2 deviator(const SymTensor2& t) {
    const double mean = t.trace() / 3.0;
    return {t[0] - mean, t[1] - mean, t[2] - mean, t[3], t[4], t[5]};
}

//! sqrt(2/3 A:A), the norm that maps a unit flow direction to 1.
inline double equivalent_strain_norm(const SymTensor2& a) { return std::sqrt(2.0 / 3.0 * ddot(a, a)); }

//! sqrt(3/2 dev(A):dev(A)), the von Mises norm of a stress-like tensor.
inline double von_mises(const SymTensor2& a) {
    const SymTensor2 d = deviator(a);
    return std::sqrt(1.5 * ddot(d, d));
}

}  // namespace vpid
