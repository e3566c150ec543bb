#pragma once

/**
 * @file jet.hpp
 * @brief Truncated multivariate Taylor expansions ("jets") in the 2n chart
 * variables (x^1..x^n, y^1..y^n).
 *
 * A jet stores the Taylor coefficients d^a f(base) / a! for every multi-index
 * a of total degree <= order and x-degree <= x_order. Arithmetic is exact
 * through the truncation order, so derivatives of every geometric object are
 * obtained by coefficient extraction instead of finite differences.
 *
 * Each jet tracks its own validity (order, x_order). Differentiating in a
 * y-variable lowers the order by one; differentiating in an x-variable lowers
 * both. Binary operations take the minimum of the operands' validity.
 *
 * Coefficients are stored densely in graded order (all degree-0 monomials,
 * then degree 1, ...), so truncating a jet to a lower total order is a prefix.
 */

#include "finsler/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace finsler {

/// Exponents over the 2n chart variables: slots [0, n) are x, [n, 2n) are y.
struct MultiIndex {
    std::vector<int> exponents;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> e) : exponents(std::move(e)) {}

    static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(2 * dim, 0)); }

    /// Builds d^k/dx^i... d^l/dy^j... from x- and y-exponent lists.
    static MultiIndex from_xy(std::span<const int> x_exp, std::span<const int> y_exp) {
        std::vector<int> e(x_exp.begin(), x_exp.end());
        e.insert(e.end(), y_exp.begin(), y_exp.end());
        return MultiIndex(std::move(e));
    }

    int dim() const { return static_cast<int>(exponents.size()) / 2; }

    int degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

    int x_degree() const {
        return std::accumulate(exponents.begin(), exponents.begin() + dim(), 0);
    }

    MultiIndex& add(int var, int count = 1) {
        exponents.at(static_cast<std::size_t>(var)) += count;
        return *this;
    }

    double factorial() const {
        double f = 1.0;
        for (int e : exponents)
            for (int k = 2; k <= e; ++k) f *= k;
        return f;
    }

    bool operator==(const MultiIndex&) const = default;
};

/// Monomial enumeration, derivative and product tables for one
/// (dimension, order, x_order) combination. Immutable and shared.
class JetLayout {
public:
    struct Triple {
        std::uint32_t lhs;
        std::uint32_t rhs;
        std::uint32_t out;
    };

    static std::shared_ptr<const JetLayout> get(int dim, int order, int x_order) {
        if (dim < 1) throw Error("jet layout: dimension must be >= 1");
        if (order < 0) throw Error("jet layout: order must be >= 0");
        x_order = std::clamp(x_order, 0, order);
        static std::mutex mutex;
        static std::map<std::tuple<int, int, int>, std::shared_ptr<const JetLayout>> cache;
        std::lock_guard lock(mutex);
        auto& slot = cache[{dim, order, x_order}];
        if (!slot) slot = std::shared_ptr<const JetLayout>(new JetLayout(dim, order, x_order));
        return slot;
    }

    int dim() const { return dim_; }
    int variables() const { return 2 * dim_; }
    int order() const { return order_; }
    int x_order() const { return x_order_; }
    std::size_t size() const { return degree_.size(); }

    /// Number of monomials of total degree <= degree.
    std::size_t size_through(int degree) const {
        if (degree < 0) return 0;
        return size_through_[static_cast<std::size_t>(std::min(degree, order_))];
    }

    int degree(std::size_t idx) const { return degree_[idx]; }
    int x_degree(std::size_t idx) const { return x_degree_[idx]; }
    int exponent(std::size_t idx, int var) const {
        return exps_[idx * static_cast<std::size_t>(variables()) + static_cast<std::size_t>(var)];
    }
    double factorial(std::size_t idx) const { return factorial_[idx]; }

    MultiIndex multi_index(std::size_t idx) const {
        std::vector<int> e(static_cast<std::size_t>(variables()));
        for (int v = 0; v < variables(); ++v) e[static_cast<std::size_t>(v)] = exponent(idx, v);
        return MultiIndex(std::move(e));
    }

    std::optional<std::size_t> find(const MultiIndex& m) const {
        if (static_cast<int>(m.exponents.size()) != variables()) return std::nullopt;
        std::uint64_t key = 0;
        for (int v = variables() - 1; v >= 0; --v) {
            int e = m.exponents[static_cast<std::size_t>(v)];
            if (e < 0 || e > order_) return std::nullopt;
            key = key * static_cast<std::uint64_t>(order_ + 1) + static_cast<std::uint64_t>(e);
        }
        auto it = index_.find(key);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Index of idx + e_var, or -1 when that monomial is outside the layout.
    std::int32_t raised(int var, std::size_t idx) const {
        return raised_[static_cast<std::size_t>(var) * size() + idx];
    }

    /// Product triples whose output has total degree <= degree.
    std::span<const Triple> products_through(int degree) const {
        if (degree < 0) return {};
        std::size_t end = products_end_[static_cast<std::size_t>(std::min(degree, order_))];
        return {products_.data(), end};
    }

private:
    JetLayout(int dim, int order, int x_order) : dim_(dim), order_(order), x_order_(x_order) {
        const int nv = variables();
        std::vector<int> cur(static_cast<std::size_t>(nv), 0);
        for (int deg = 0; deg <= order_; ++deg) {
            enumerate(cur, 0, deg);
            size_through_.push_back(degree_.size());
        }
        raised_.assign(static_cast<std::size_t>(nv) * size(), -1);
        for (std::size_t idx = 0; idx < size(); ++idx) {
            MultiIndex m = multi_index(idx);
            for (int v = 0; v < nv; ++v) {
                MultiIndex up = m;
                up.add(v);
                if (auto j = find(up)) raised_[static_cast<std::size_t>(v) * size() + idx] = static_cast<std::int32_t>(*j);
            }
        }
        // Every split c = a + b; a, b inherit the x-degree bound from c.
        for (int deg = 0; deg <= order_; ++deg) {
            for (std::size_t c = size_through(deg - 1); c < size_through(deg); ++c) {
                MultiIndex mc = multi_index(c);
                MultiIndex ma = MultiIndex::zero(dim_);
                split(mc, ma, 0, static_cast<std::uint32_t>(c));
            }
            products_end_.push_back(products_.size());
        }
    }

    void enumerate(std::vector<int>& cur, int var, int remaining) {
        const int nv = variables();
        if (var == nv - 1) {
            cur[static_cast<std::size_t>(var)] = remaining;
            int xdeg = 0;
            for (int v = 0; v < dim_; ++v) xdeg += cur[static_cast<std::size_t>(v)];
            if (xdeg > x_order_) return;
            std::uint64_t key = 0;
            double fact = 1.0;
            for (int v = nv - 1; v >= 0; --v) {
                int e = cur[static_cast<std::size_t>(v)];
                key = key * static_cast<std::uint64_t>(order_ + 1) + static_cast<std::uint64_t>(e);
                for (int k = 2; k <= e; ++k) fact *= k;
            }
            index_.emplace(key, degree_.size());
            exps_.insert(exps_.end(), cur.begin(), cur.end());
            degree_.push_back(std::accumulate(cur.begin(), cur.end(), 0));
            x_degree_.push_back(xdeg);
            factorial_.push_back(fact);
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            cur[static_cast<std::size_t>(var)] = e;
            enumerate(cur, var + 1, remaining - e);
        }
    }

    void split(const MultiIndex& c, MultiIndex& a, int var, std::uint32_t c_idx) {
        if (var == variables()) {
            MultiIndex b = c;
            for (std::size_t v = 0; v < b.exponents.size(); ++v) b.exponents[v] -= a.exponents[v];
            products_.push_back({static_cast<std::uint32_t>(*find(a)), static_cast<std::uint32_t>(*find(b)), c_idx});
            return;
        }
        const auto v = static_cast<std::size_t>(var);
        for (int e = 0; e <= c.exponents[v]; ++e) {
            a.exponents[v] = e;
            split(c, a, var + 1, c_idx);
        }
        a.exponents[v] = 0;
    }

    int dim_;
    int order_;
    int x_order_;
    std::vector<int> exps_;
    std::vector<int> degree_;
    std::vector<int> x_degree_;
    std::vector<double> factorial_;
    std::vector<std::size_t> size_through_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::vector<std::int32_t> raised_;
    std::vector<Triple> products_;
    std::vector<std::size_t> products_end_;
};

class Jet;

/// A base point together with the truncation budget. Jets from different
/// spaces cannot be combined.
class JetSpace : public std::enable_shared_from_this<JetSpace> {
public:
    static std::shared_ptr<const JetSpace> make(ChartPoint base, int order, int x_order) {
        if (base.x.size() != base.y.size() || base.x.empty())
            throw Error("jet space: x and y must have the same non-zero dimension");
        auto layout = JetLayout::get(base.dim(), order, x_order);
        return std::shared_ptr<const JetSpace>(new JetSpace(std::move(base), std::move(layout)));
    }

    static std::shared_ptr<const JetSpace> make(ChartPoint base, int order) {
        return make(std::move(base), order, order);
    }

    const ChartPoint& base() const { return base_; }
    const JetLayout& layout() const { return *layout_; }
    int dim() const { return layout_->dim(); }
    int order() const { return layout_->order(); }
    int x_order() const { return layout_->x_order(); }

    Jet constant(double c) const;
    Jet variable(int var) const;
    Jet x(int i) const;
    Jet y(int i) const;

private:
    JetSpace(ChartPoint base, std::shared_ptr<const JetLayout> layout)
        : base_(std::move(base)), layout_(std::move(layout)) {}

    ChartPoint base_;
    std::shared_ptr<const JetLayout> layout_;
};

class Jet {
public:
    Jet() = default;

    Jet(std::shared_ptr<const JetSpace> space, double value)
        : space_(std::move(space)), order_(space_->order()), x_order_(space_->x_order()),
          c_(space_->layout().size_through(order_), 0.0) {
        c_[0] = value;
    }

    bool empty() const { return !space_; }
    const JetSpace& space() const { return *space_; }
    const std::shared_ptr<const JetSpace>& space_ptr() const { return space_; }
    const ChartPoint& base() const { return space_->base(); }
    int dim() const { return space_->dim(); }

    /// Highest total degree for which the coefficients are exact.
    int order() const { return order_; }
    /// Highest x-degree for which the coefficients are exact.
    int x_order() const { return x_order_; }

    double value() const { return c_.at(0); }
    std::span<const double> coefficients() const { return c_; }

    /// Taylor coefficient d^a f / a! at the base point.
    double coeff(const MultiIndex& a) const {
        require_exact(a);
        auto idx = space_->layout().find(a);
        if (!idx || *idx >= c_.size()) return 0.0;
        return c_[*idx];
    }

    /// Raw partial derivative d^a f at the base point.
    double partial(const MultiIndex& a) const { return coeff(a) * a.factorial(); }

    Jet derivative(int var) const {
        const auto& lay = space_->layout();
        const bool is_x = var < dim();
        if (var < 0 || var >= lay.variables()) throw Error("jet: variable index out of range");
        if (order_ < 1 || (is_x && x_order_ < 1))
            throw OrderError("jet: derivative requested beyond the exact order (order " +
                             std::to_string(order_) + ", x-order " + std::to_string(x_order_) + ")");
        Jet out;
        out.space_ = space_;
        out.order_ = order_ - 1;
        out.x_order_ = is_x ? x_order_ - 1 : x_order_;
        out.c_.assign(lay.size_through(out.order_), 0.0);
        for (std::size_t m = 0; m < out.c_.size(); ++m) {
            if (lay.x_degree(m) > out.x_order_) continue;
            std::int32_t up = lay.raised(var, m);
            if (up < 0) continue;
            out.c_[m] = (lay.exponent(m, var) + 1) * c_[static_cast<std::size_t>(up)];
        }
        return out;
    }

    Jet dx(int i) const { return derivative(i); }
    Jet dy(int i) const { return derivative(dim() + i); }

    /// Same function, exact only through the given order.
    Jet truncated(int order, int x_order = -1) const {
        Jet out = *this;
        out.order_ = std::min(order_, order);
        if (x_order >= 0) out.x_order_ = std::min(x_order_, x_order);
        out.c_.resize(space_->layout().size_through(out.order_));
        out.clear_invalid();
        return out;
    }

    Jet& operator+=(const Jet& b) { return accumulate(b, 1.0); }
    Jet& operator-=(const Jet& b) { return accumulate(b, -1.0); }
    Jet& operator+=(double s) { c_.at(0) += s; return *this; }
    Jet& operator-=(double s) { c_.at(0) -= s; return *this; }
    Jet& operator*=(double s) {
        for (double& v : c_) v *= s;
        return *this;
    }
    Jet& operator/=(double s) {
        if (s == 0.0) throw DomainError("jet: division by the constant zero");
        return *this *= 1.0 / s;
    }

    Jet operator-() const {
        Jet out = *this;
        return out *= -1.0;
    }

    friend Jet operator*(const Jet& a, const Jet& b) {
        check_same_space(a, b);
        Jet out;
        out.space_ = a.space_;
        out.order_ = std::min(a.order_, b.order_);
        out.x_order_ = std::min(a.x_order_, b.x_order_);
        const auto& lay = a.space_->layout();
        out.c_.assign(lay.size_through(out.order_), 0.0);
        const double* pa = a.c_.data();
        const double* pb = b.c_.data();
        double* po = out.c_.data();
        if (out.x_order_ >= lay.x_order()) {
            for (const auto& t : lay.products_through(out.order_)) po[t.out] += pa[t.lhs] * pb[t.rhs];
        } else {
            for (const auto& t : lay.products_through(out.order_))
                if (lay.x_degree(t.out) <= out.x_order_) po[t.out] += pa[t.lhs] * pb[t.rhs];
        }
        return out;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a -= s; }
    friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, double s) { return a /= s; }
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator/(double s, const Jet& b);

    /// Evaluates sum_k coeffs[k] (a - a(base))^k, i.e. composes a univariate
    /// Taylor series (given at a's value) with this jet.
    Jet compose(std::span<const double> series) const {
        Jet shifted = *this;
        shifted.c_[0] = 0.0;
        const int terms = std::min<int>(static_cast<int>(series.size()) - 1, order_);
        Jet out = shifted;
        std::fill(out.c_.begin(), out.c_.end(), 0.0);
        out.c_[0] = series[static_cast<std::size_t>(terms)];
        for (int k = terms - 1; k >= 0; --k) {
            out = out * shifted;
            out.c_[0] += series[static_cast<std::size_t>(k)];
        }
        return out;
    }

private:
    friend class JetSpace;

    static void check_same_space(const Jet& a, const Jet& b) {
        if (a.empty() || b.empty()) throw Error("jet: operation on an empty jet");
        if (a.space_ != b.space_) throw SpaceMismatchError("jet: operands belong to different jet spaces");
    }

    void require_exact(const MultiIndex& a) const {
        if (empty()) throw Error("jet: empty jet");
        if (static_cast<int>(a.exponents.size()) != 2 * dim())
            throw Error("jet: multi-index has the wrong number of slots");
        if (a.degree() > order_ || a.x_degree() > x_order_)
            throw OrderError("jet: multi-index of degree " + std::to_string(a.degree()) +
                             " exceeds the exact order " + std::to_string(order_));
    }

    Jet& accumulate(const Jet& b, double sign) {
        check_same_space(*this, b);
        order_ = std::min(order_, b.order_);
        x_order_ = std::min(x_order_, b.x_order_);
        c_.resize(space_->layout().size_through(order_));
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += sign * b.c_[i];
        clear_invalid();
        return *this;
    }

    void clear_invalid() {
        const auto& lay = space_->layout();
        if (x_order_ >= lay.x_order()) return;
        for (std::size_t i = 0; i < c_.size(); ++i)
            if (lay.x_degree(i) > x_order_) c_[i] = 0.0;
    }

    std::shared_ptr<const JetSpace> space_;
    int order_ = 0;
    int x_order_ = 0;
    std::vector<double> c_;
};

inline Jet JetSpace::constant(double c) const { return Jet(shared_from_this(), c); }

inline Jet JetSpace::x(int i) const { return variable(i); }
inline Jet JetSpace::y(int i) const { return variable(dim() + i); }

inline Jet JetSpace::variable(int var) const {
    if (var < 0 || var >= layout_->variables()) throw Error("jet space: variable index out of range");
    const double v0 = var < dim() ? base_.x[static_cast<std::size_t>(var)]
                                  : base_.y[static_cast<std::size_t>(var - dim())];
    Jet j(shared_from_this(), v0);
    if (order() >= 1 && (var >= dim() || x_order() >= 1)) {
        MultiIndex m = MultiIndex::zero(dim());
        m.add(var);
        j.c_[*layout_->find(m)] = 1.0;
    }
    return j;
}

namespace detail {

inline std::string where(std::string_view label) {
    return label.empty() ? std::string() : " in '" + std::string(label) + "'";
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Taylor coefficients of t^p about t0: binom(p, k) t0^(p-k).
inline std::vector<double> power_series(double t0, double p, int order) {
    std::vector<double> s(static_cast<std::size_t>(order) + 1);
    double binom = 1.0;
    for (int k = 0; k <= order; ++k) {
        s[static_cast<std::size_t>(k)] = binom * std::pow(t0, p - k);
        binom *= (p - k) / (k + 1);
    }
    return s;
}

} // namespace detail

inline Jet reciprocal(const Jet& b, std::string_view label = {}) {
    const double b0 = b.value();
    if (b0 == 0.0 || !std::isfinite(b0))
        throw DomainError("division by zero" + detail::where(label) + " (denominator value " + detail::fmt(b0) + ")");
    return b.compose(detail::power_series(b0, -1.0, b.order()));
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet operator/(double s, const Jet& b) { return reciprocal(b) *= s; }

inline Jet divide(const Jet& a, const Jet& b, std::string_view label = {}) { return a * reciprocal(b, label); }

inline Jet sqrt(const Jet& a, std::string_view label = {}) {
    const double a0 = a.value();
    if (!(a0 > 0.0))
        throw DomainError("sqrt of a non-positive value" + detail::where(label) + " (value " + detail::fmt(a0) + ")");
    return a.compose(detail::power_series(a0, 0.5, a.order()));
}

/// Real power. Non-integer exponents require a positive base value.
inline Jet pow(const Jet& a, double p, std::string_view label = {}) {
    if (p == std::round(p) && std::abs(p) <= 64) {
        int k = static_cast<int>(p);
        if (k == 0) return a.space().constant(1.0).truncated(a.order(), a.x_order());
        Jet base = k > 0 ? a : reciprocal(a, label);
        k = std::abs(k);
        Jet result;
        while (k > 0) {
            if (k & 1) result = result.empty() ? base : result * base;
            k >>= 1;
            if (k > 0) base = base * base;
        }
        return result;
    }
    const double a0 = a.value();
    if (!(a0 > 0.0))
        throw DomainError("non-integer power of a non-positive value" + detail::where(label) + " (value " +
                          detail::fmt(a0) + ")");
    return a.compose(detail::power_series(a0, p, a.order()));
}

inline Jet exp(const Jet& a) {
    std::vector<double> s(static_cast<std::size_t>(a.order()) + 1);
    double e = std::exp(a.value());
    double fact = 1.0;
    for (int k = 0; k <= a.order(); ++k) {
        if (k > 0) fact *= k;
        s[static_cast<std::size_t>(k)] = e / fact;
    }
    return a.compose(s);
}

inline Jet log(const Jet& a, std::string_view label = {}) {
    const double a0 = a.value();
    if (!(a0 > 0.0))
        throw DomainError("log of a non-positive value" + detail::where(label) + " (value " + detail::fmt(a0) + ")");
    std::vector<double> s(static_cast<std::size_t>(a.order()) + 1);
    s[0] = std::log(a0);
    for (int k = 1; k <= a.order(); ++k) s[static_cast<std::size_t>(k)] = ((k % 2) ? 1.0 : -1.0) / (k * std::pow(a0, k));
    return a.compose(s);
}

/// General power a^b = exp(b log a).
inline Jet pow(const Jet& a, const Jet& b, std::string_view label = {}) { return exp(b * log(a, label)); }

enum class JetOp { add, sub, mul, div, pow, sqrt };

/// Binary (or unary, for sqrt, which ignores b) jet arithmetic by tag.
inline Jet jet_arith(const Jet& a, const Jet& b, JetOp op) {
    switch (op) {
    case JetOp::add: return a + b;
    case JetOp::sub: return a - b;
    case JetOp::mul: return a * b;
    case JetOp::div: return divide(a, b);
    case JetOp::pow: return pow(a, b);
    case JetOp::sqrt: return sqrt(a);
    }
    throw Error("jet_arith: unknown operation");
}

/// Checked helpers usable from code generic over double and Jet. The label
/// names the sub-expression in domain errors.
inline double safe_sqrt(double v, std::string_view label = {}) {
    if (!(v >= 0.0)) throw DomainError("sqrt of a negative value" + detail::where(label) + " (value " + detail::fmt(v) + ")");
    return std::sqrt(v);
}
inline Jet safe_sqrt(const Jet& v, std::string_view label = {}) { return sqrt(v, label); }

inline double safe_div(double a, double b, std::string_view label = {}) {
    if (b == 0.0) throw DomainError("division by zero" + detail::where(label));
    return a / b;
}
inline Jet safe_div(const Jet& a, const Jet& b, std::string_view label = {}) { return divide(a, b, label); }

inline double safe_pow(double v, double p, std::string_view label = {}) {
    if (v < 0.0 && p != std::round(p))
        throw DomainError("non-integer power of a negative value" + detail::where(label) + " (value " + detail::fmt(v) + ")");
    return std::pow(v, p);
}
inline Jet safe_pow(const Jet& v, double p, std::string_view label = {}) { return pow(v, p, label); }

/// Lifts f(x, y) to its jet at base. f receives spans of jet variables and
/// may use +, -, *, /, pow, sqrt (and exp/log) on them.
template <class F>
Jet lift(F&& f, const ChartPoint& base, int order, int x_order = -1) {
    auto space = JetSpace::make(base, order, x_order < 0 ? order : x_order);
    const int n = space->dim();
    std::vector<Jet> xs, ys;
    for (int i = 0; i < n; ++i) xs.push_back(space->x(i));
    for (int i = 0; i < n; ++i) ys.push_back(space->y(i));
    Jet out = std::forward<F>(f)(std::span<const Jet>(xs), std::span<const Jet>(ys));
    if (out.space_ptr() != space) throw SpaceMismatchError("lift: function returned a jet from another space");
    return out;
}

/// Raw partial derivative d^a f(base).
inline double partial(const Jet& j, const MultiIndex& a) { return j.partial(a); }

} // namespace finsler
