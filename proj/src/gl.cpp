#include "fracreg/gl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fracreg/errors.hpp"

namespace fracreg {

GlTable gl_coefficients(double order, std::size_t count) {
    if (!std::isfinite(order)) {
        throw InvalidArgument("gl_coefficients: order must be finite");
    }
    GlTable table;
    table.order = order;
    table.coeffs.resize(count + 1);
    table.coeffs[0] = 1.0;
    for (std::size_t j = 1; j <= count; ++j) {
        table.coeffs[j] = (1.0 - (1.0 + order) / static_cast<double>(j)) * table.coeffs[j - 1];
    }
    return table;
}

SampledSignal::SampledSignal(double step, std::vector<double> values)
    : step_(step), values_(std::move(values)) {
    if (!(step_ > 0.0) || !std::isfinite(step_)) {
        throw InvalidArgument("SampledSignal: step must be positive and finite");
    }
    if (values_.empty()) {
        throw InvalidArgument("SampledSignal: values must be non-empty");
    }
}

std::size_t whole_steps(double span, double h) {
    const double ratio = span / h;
    return static_cast<std::size_t>(std::floor(ratio * (1.0 + 1e-12) + 1e-9));
}

GlOperator::GlOperator(double order, double step, std::size_t max_history,
                       std::optional<double> memory_len)
    : order_(order), scale_(std::pow(step, -order)),
      memory_terms_(std::numeric_limits<std::size_t>::max()) {
    if (!(step > 0.0)) {
        throw InvalidArgument("GlOperator: step must be positive");
    }
    if (memory_len) {
        if (!(*memory_len > 0.0)) {
            throw InvalidArgument("memory_len must be positive");
        }
        memory_terms_ = whole_steps(*memory_len, step);
    }
    const std::size_t count = std::min(max_history == 0 ? 0 : max_history - 1, memory_terms_);
    coeffs_ = gl_coefficients(order, count).coeffs;
    // Non-negative integer orders end in exact zeros.
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) {
        coeffs_.pop_back();
    }
}

double GlOperator::apply_at(std::span<const double> values, std::size_t k) const {
    std::size_t n = std::min(k, memory_terms_);
    n = std::min(n, coeffs_.size() - 1);
    const double* b = coeffs_.data();
    const double* v = values.data() + k;
    double sum = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        sum += b[j] * *(v - j);
    }
    return scale_ * sum;
}

double GlOperator::apply(std::span<const double> history) const {
    if (history.empty()) {
        throw InvalidArgument("gl_apply: history must be non-empty");
    }
    return apply_at(history, history.size() - 1);
}

double gl_apply(const SampledSignal& history, double order, std::optional<double> memory_len) {
    const GlOperator op(order, history.step(), history.size(), memory_len);
    return op.apply(history.values());
}

SampledSignal gl_series(const SampledSignal& signal, double order, std::optional<double> memory_len) {
    const GlOperator op(order, signal.step(), signal.size(), memory_len);
    std::vector<double> out(signal.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = op.apply_at(signal.values(), k);
    }
    return SampledSignal(signal.step(), std::move(out));
}

} // namespace fracreg
