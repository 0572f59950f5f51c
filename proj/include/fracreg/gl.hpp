#pragma once

// Grünwald-Letnikov coefficients and discrete fractional differentiation
// of uniformly sampled signals. Negative orders are fractional integrals.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fracreg {

struct GlTable {
    double order = 0.0;
    std::vector<double> coeffs; // b_0 .. b_N, b_0 == 1
};

// b_0 = 1, b_j = (1 - (1 + order) / j) * b_{j-1}; count + 1 entries.
GlTable gl_coefficients(double order, std::size_t count);

// Uniformly sampled signal, values[k] is the sample at t = k * step.
class SampledSignal {
public:
    SampledSignal(double step, std::vector<double> values);

    double step() const noexcept { return step_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    double step_;
    std::vector<double> values_;
};

// Number of whole steps of size h that fit in the span, tolerant to the
// representation error of decimal step sizes (12 / 0.001 -> 12000).
std::size_t whole_steps(double span, double h);

// Reusable GL operator for one order on one grid. Coefficients are computed
// once for the longest history it will see.
class GlOperator {
public:
    GlOperator(double order, double step, std::size_t max_history,
               std::optional<double> memory_len = std::nullopt);

    double order() const noexcept { return order_; }

    // h^-q * sum_{j=0..N} b_j history[k-j], k = history.size() - 1,
    // N = min(k, floor(L/h)). Samples before t = 0 are zero.
    double apply(std::span<const double> history) const;

    // Same, evaluated at index k of a longer buffer.
    double apply_at(std::span<const double> values, std::size_t k) const;

private:
    double order_;
    double scale_;
    std::size_t memory_terms_; // floor(L/h), or max for full memory
    std::vector<double> coeffs_; // trailing exact zeros trimmed
};

double gl_apply(const SampledSignal& history, double order,
                std::optional<double> memory_len = std::nullopt);

SampledSignal gl_series(const SampledSignal& signal, double order,
                        std::optional<double> memory_len = std::nullopt);

} // namespace fracreg
