#pragma once

/**
 * @file tensor.hpp
 * @brief Dense multi-index arrays with declared index valences.
 *
 * Components are stored row-major: the first index varies slowest. The same
 * container holds plain values (Tensor) and per-component jets (JetTensor).
 */

#include "finsler/core.hpp"
#include "finsler/jet.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <type_traits>
#include <vector>

namespace finsler {

enum class Slot : std::uint8_t { up, down };
using Valence = std::vector<Slot>;

inline Valence valence(std::initializer_list<Slot> s) { return Valence(s); }
inline Valence down(int rank) { return Valence(static_cast<std::size_t>(rank), Slot::down); }

/// Up index first, then `lower` down indices.
inline Valence mixed(int lower) {
    Valence v(static_cast<std::size_t>(lower) + 1, Slot::down);
    v.front() = Slot::up;
    return v;
}

template <class T>
class BasicTensor {
public:
    BasicTensor() = default;

    BasicTensor(int dim, Valence valence, const T& fill = T{})
        : dim_(dim), valence_(std::move(valence)), comps_(count(dim, rank()), fill) {}

    int dim() const { return dim_; }
    int rank() const { return static_cast<int>(valence_.size()); }
    const Valence& valence() const { return valence_; }
    std::size_t size() const { return comps_.size(); }

    T& operator[](std::size_t flat) { return comps_[flat]; }
    const T& operator[](std::size_t flat) const { return comps_[flat]; }

    template <class... I>
        requires(std::is_integral_v<I> && ...)
    T& operator()(I... idx) {
        return comps_[offset({static_cast<int>(idx)...})];
    }

    template <class... I>
        requires(std::is_integral_v<I> && ...)
    const T& operator()(I... idx) const {
        return comps_[offset({static_cast<int>(idx)...})];
    }

    T& at(std::span<const int> idx) { return comps_[offset(idx)]; }
    const T& at(std::span<const int> idx) const { return comps_[offset(idx)]; }

    std::size_t offset(std::initializer_list<int> idx) const {
        return offset(std::span<const int>(idx.begin(), idx.size()));
    }

    std::size_t offset(std::span<const int> idx) const {
        std::size_t off = 0;
        for (int i : idx) off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
        return off;
    }

    /// Multi-index of a flat offset.
    std::vector<int> index(std::size_t flat) const {
        std::vector<int> idx(static_cast<std::size_t>(rank()));
        for (int k = rank() - 1; k >= 0; --k) {
            idx[static_cast<std::size_t>(k)] = static_cast<int>(flat % static_cast<std::size_t>(dim_));
            flat /= static_cast<std::size_t>(dim_);
        }
        return idx;
    }

    std::vector<T>& components() { return comps_; }
    const std::vector<T>& components() const { return comps_; }

    template <class F>
    auto map(F&& f) const {
        using R = std::decay_t<decltype(f(comps_.front()))>;
        BasicTensor<R> out(dim_, valence_);
        for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = f(comps_[i]);
        return out;
    }

    static std::size_t count(int dim, int rank) {
        std::size_t c = 1;
        for (int k = 0; k < rank; ++k) c *= static_cast<std::size_t>(dim);
        return c;
    }

private:
    int dim_ = 0;
    Valence valence_;
    std::vector<T> comps_;
};

using Tensor = BasicTensor<double>;
using JetTensor = BasicTensor<Jet>;

inline Tensor values(const JetTensor& t) {
    return t.map([](const Jet& j) { return j.value(); });
}

inline JetTensor jet_scalar(int dim, const Jet& j) {
    JetTensor t(dim, {});
    t[0] = j;
    return t;
}

namespace detail {

template <class D>
JetTensor append_partial(const JetTensor& t, D&& diff) {
    Valence v = t.valence();
    v.push_back(Slot::down);
    JetTensor out(t.dim(), std::move(v));
    const auto n = static_cast<std::size_t>(t.dim());
    for (std::size_t flat = 0; flat < t.size(); ++flat)
        for (std::size_t m = 0; m < n; ++m) out[flat * n + m] = diff(t[flat], static_cast<int>(m));
    return out;
}

} // namespace detail

/// Appends a down slot holding d/dy^m of every component.
inline JetTensor partial_y(const JetTensor& t) {
    return detail::append_partial(t, [](const Jet& j, int m) { return j.dy(m); });
}

/// Appends a down slot holding d/dx^m of every component.
inline JetTensor partial_x(const JetTensor& t) {
    return detail::append_partial(t, [](const Jet& j, int m) { return j.dx(m); });
}

inline Tensor scalar_tensor(int dim, double v) {
    Tensor t(dim, {});
    t[0] = v;
    return t;
}

inline Tensor identity_tensor(int dim, Valence v = {Slot::up, Slot::down}) {
    Tensor t(dim, std::move(v));
    for (int i = 0; i < dim; ++i) t(i, i) = 1.0;
    return t;
}

/// Calls f(idx) for every multi-index of the given rank over {0..dim-1}.
template <class F>
void for_each_index(int dim, int rank, F&& f) {
    std::vector<int> idx(static_cast<std::size_t>(rank), 0);
    const std::size_t total = BasicTensor<double>::count(dim, rank);
    for (std::size_t flat = 0; flat < total; ++flat) {
        f(std::span<const int>(idx));
        for (int k = rank - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < dim) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
}

/// Infinity norm (max absolute component).
inline double max_abs(const Tensor& t) {
    double m = 0.0;
    for (double v : t.components()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw Error("tensor: shape mismatch in comparison");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw Error("tensor: shape mismatch in subtraction");
    Tensor out = a;
    for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
    return out;
}

inline Tensor operator+(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw Error("tensor: shape mismatch in addition");
    Tensor out = a;
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
    return out;
}

inline Tensor operator*(double s, const Tensor& a) {
    return a.map([s](double v) { return s * v; });
}

/// Absolute floor used by every relative residual.
inline constexpr double kResidualScaleFloor = 1.0;

/// ||lhs - rhs|| / max(||lhs||, ||rhs||, floor), infinity norms throughout.
inline double relative_residual(const Tensor& lhs, const Tensor& rhs, double floor = kResidualScaleFloor) {
    return max_abs_diff(lhs, rhs) / std::max({max_abs(lhs), max_abs(rhs), floor});
}

inline double relative_residual(double lhs, double rhs, double floor = kResidualScaleFloor) {
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), floor});
}

/// Largest |t(..) - t(permuted ..)| over all permutations of the listed slots.
inline double max_asymmetry(const Tensor& t, std::vector<int> slots) {
    std::sort(slots.begin(), slots.end());
    double worst = 0.0;
    std::vector<int> perm = slots;
    std::vector<int> moved(static_cast<std::size_t>(t.rank()));
    for_each_index(t.dim(), t.rank(), [&](std::span<const int> idx) {
        const double v = t.at(idx);
        perm = slots;
        do {
            std::copy(idx.begin(), idx.end(), moved.begin());
            for (std::size_t k = 0; k < slots.size(); ++k)
                moved[static_cast<std::size_t>(slots[k])] = idx[static_cast<std::size_t>(perm[k])];
            worst = std::max(worst, std::abs(v - t.at(moved)));
        } while (std::next_permutation(perm.begin(), perm.end()));
    });
    return worst;
}

inline double max_asymmetry(const Tensor& t) {
    std::vector<int> all(static_cast<std::size_t>(t.rank()));
    std::iota(all.begin(), all.end(), 0);
    return max_asymmetry(t, all);
}

inline Eigen::MatrixXd to_matrix(const Tensor& t) {
    if (t.rank() != 2) throw Error("tensor: matrix view requires rank 2");
    Eigen::MatrixXd m(t.dim(), t.dim());
    for (int i = 0; i < t.dim(); ++i)
        for (int j = 0; j < t.dim(); ++j) m(i, j) = t(i, j);
    return m;
}

inline Tensor from_matrix(const Eigen::MatrixXd& m, Valence v) {
    Tensor t(static_cast<int>(m.rows()), std::move(v));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t(i, j) = m(i, j);
    return t;
}

/// Ascending eigenvalues of the symmetric part of a rank-2 tensor.
inline Eigen::VectorXd symmetric_eigenvalues(const Tensor& t) {
    Eigen::MatrixXd m = to_matrix(t);
    Eigen::MatrixXd s = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

inline Tensor to_vector_tensor(std::span<const double> v, Slot s) {
    Tensor t(static_cast<int>(v.size()), {s});
    for (std::size_t i = 0; i < v.size(); ++i) t[i] = v[i];
    return t;
}

} // namespace finsler
