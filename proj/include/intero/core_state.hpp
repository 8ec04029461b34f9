#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "intero/errors.hpp"
#include "intero/rng.hpp"

namespace intero {

/// The agent's internal state v_t: n normalized internal variables.
class ViabilityVector {
public:
    ViabilityVector() = default;

    explicit ViabilityVector(std::vector<double> values, std::vector<std::string> names = {})
        : values_(std::move(values)) {
        if (values_.empty()) throw ConfigError("ViabilityVector: at least one dimension required");
        for (double x : values_) {
            if (!std::isfinite(x)) throw ConfigError("ViabilityVector: non-finite component");
        }
        if (!names.empty()) {
            if (names.size() != values_.size()) {
                throw ConfigError("ViabilityVector: dim_names size does not match values");
            }
            names_ = std::make_shared<const std::vector<std::string>>(std::move(names));
        }
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }

    /// Label of dimension i; falls back to "v<i>" when no names were given.
    std::string name(std::size_t i) const {
        if (names_) return (*names_)[i];
        return "v" + std::to_string(i);
    }

    /// Same labels, new values. Values are validated.
    ViabilityVector with_values(std::vector<double> values) const {
        if (values.size() != values_.size()) throw ConfigError("ViabilityVector: dimension mismatch");
        ViabilityVector out;
        for (double x : values) {
            if (!std::isfinite(x)) throw ConfigError("ViabilityVector: non-finite component");
        }
        out.values_ = std::move(values);
        out.names_ = names_;
        return out;
    }

    friend bool operator==(const ViabilityVector& a, const ViabilityVector& b) {
        return a.values_ == b.values_;
    }

private:
    std::vector<double> values_;
    std::shared_ptr<const std::vector<std::string>> names_;
};

/// Soft (preferred) and hard (survival) ranges per internal dimension.
struct ViabilityBounds {
    std::vector<double> soft_lo, soft_hi;
    std::vector<double> hard_lo, hard_hi;
    std::vector<double> weight_lo, weight_hi;
    std::vector<double> rho;

    std::size_t size() const noexcept { return soft_lo.size(); }

    /// Throws ConfigError unless hard_lo <= soft_lo < soft_hi <= hard_hi, weights > 0, rho >= 0.
    void validate() const {
        const std::size_t n = soft_lo.size();
        if (n == 0) throw ConfigError("bounds: at least one dimension required");
        for (const auto* v : {&soft_hi, &hard_lo, &hard_hi, &weight_lo, &weight_hi, &rho}) {
            if (v->size() != n) throw ConfigError("bounds: all per-dimension arrays must have equal length");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::string dim = "bounds[" + std::to_string(i) + "]";
            if (!(hard_lo[i] <= soft_lo[i] && soft_lo[i] < soft_hi[i] && soft_hi[i] <= hard_hi[i])) {
                throw ConfigError(dim + ": require hard_lo <= soft_lo < soft_hi <= hard_hi");
            }
            if (!(weight_lo[i] > 0.0) || !(weight_hi[i] > 0.0)) {
                throw ConfigError(dim + ": weights must be positive");
            }
            if (!(rho[i] >= 0.0)) throw ConfigError(dim + ": rho must be nonnegative");
        }
    }

    void check_dims(std::size_t n) const {
        if (n != size()) {
            throw ConfigError("dimension mismatch: state has " + std::to_string(n) +
                              " dims, bounds have " + std::to_string(size()));
        }
    }
};

/// Std-dev of additive Gaussian internal noise per dimension.
struct NoiseSpec {
    std::vector<double> sigma;

    void validate() const {
        for (double s : sigma) {
            if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise: sigma must be finite and >= 0");
        }
    }
};

/// Learner/model state: external state id plus discretized internal state.
struct AugmentedState {
    int external = 0;
    std::vector<int> internal_bin;

    friend bool operator==(const AugmentedState&, const AugmentedState&) = default;
};

/// Dense indexing of AugmentedState for an environment with `state_count`
/// external states and `dims` internal dimensions of `bins` bins each.
class StateIndexer {
public:
    StateIndexer() = default;
    StateIndexer(int state_count, std::size_t dims, int bins)
        : state_count_(state_count), dims_(dims), bins_(bins) {
        if (state_count < 1 || bins < 1) throw ConfigError("StateIndexer: counts must be positive");
        internal_cells_ = 1;
        for (std::size_t i = 0; i < dims; ++i) internal_cells_ *= bins;
    }

    int state_count() const noexcept { return state_count_; }
    int bins() const noexcept { return bins_; }
    std::size_t dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(state_count_) * internal_cells_; }

    std::size_t index(const AugmentedState& st) const {
        if (st.external < 0 || st.external >= state_count_) {
            throw UsageError("AugmentedState: external id " + std::to_string(st.external) + " out of range");
        }
        if (st.internal_bin.size() != dims_) throw UsageError("AugmentedState: bin vector has wrong length");
        std::size_t inner = 0;
        for (int b : st.internal_bin) {
            if (b < 0 || b >= bins_) throw UsageError("AugmentedState: bin index out of range");
            inner = inner * static_cast<std::size_t>(bins_) + static_cast<std::size_t>(b);
        }
        return static_cast<std::size_t>(st.external) * internal_cells_ + inner;
    }

    AugmentedState unindex(std::size_t idx) const {
        AugmentedState st;
        st.external = static_cast<int>(idx / internal_cells_);
        std::size_t inner = idx % internal_cells_;
        st.internal_bin.assign(dims_, 0);
        for (std::size_t i = dims_; i-- > 0;) {
            st.internal_bin[i] = static_cast<int>(inner % static_cast<std::size_t>(bins_));
            inner /= static_cast<std::size_t>(bins_);
        }
        return st;
    }

private:
    int state_count_ = 1;
    std::size_t dims_ = 0;
    int bins_ = 1;
    std::size_t internal_cells_ = 1;
};

/// Normalized distance to the nearest hard bound, minimized over dimensions.
/// 1 exactly at every hard-range midpoint, 0 at or beyond any hard bound.
inline double viability_margin(std::span<const double> v, const ViabilityBounds& b) {
    b.check_dims(v.size());
    double m = 1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double width = b.hard_hi[i] - b.hard_lo[i];
        const double d = std::min(v[i] - b.hard_lo[i], b.hard_hi[i] - v[i]);
        m = std::min(m, std::clamp(2.0 * d / width, 0.0, 1.0));
    }
    return m;
}

inline double viability_margin(const ViabilityVector& v, const ViabilityBounds& b) {
    return viability_margin(v.values(), b);
}

/// True when any component sits at or beyond its hard bound.
inline bool outside_hard(std::span<const double> v, const ViabilityBounds& b) {
    b.check_dims(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] <= b.hard_lo[i] || v[i] >= b.hard_hi[i]) return true;
    }
    return false;
}

/// True when any component lies strictly outside its soft (preferred) range.
inline bool outside_soft(std::span<const double> v, const ViabilityBounds& b) {
    b.check_dims(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < b.soft_lo[i] || v[i] > b.soft_hi[i]) return true;
    }
    return false;
}

/// v' = v + drift + e, e_i ~ N(0, sigma_i); clamped to [hard_lo - 1, hard_hi + 1].
/// No draw is taken for dimensions with sigma_i == 0.
inline ViabilityVector apply_internal_dynamics(const ViabilityVector& v, std::span<const double> drift,
                                               const NoiseSpec& noise, const ViabilityBounds& b,
                                               RngStream& rng) {
    const std::size_t n = v.size();
    if (drift.size() != n || noise.sigma.size() != n) {
        throw ConfigError("apply_internal_dynamics: dimension mismatch");
    }
    b.check_dims(n);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(drift[i])) throw UsageError("apply_internal_dynamics: non-finite drift");
        double x = v[i] + drift[i];
        if (noise.sigma[i] > 0.0) x += noise.sigma[i] * rng.normal();
        out[i] = std::clamp(x, b.hard_lo[i] - 1.0, b.hard_hi[i] + 1.0);
    }
    return v.with_values(std::move(out));
}

} // namespace intero
