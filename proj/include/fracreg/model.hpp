#pragma once

// Plants, controllers, closed-loop state-space models and characteristic
// fractional polynomials for the PD^delta and PI^lambda loops.

#include <complex>
#include <cstddef>
#include <variant>
#include <vector>

namespace fracreg {

// G(s) = 1 / (a2 s^alpha + a1 s^beta + a0)
struct Plant {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 1.0;
    double alpha = 2.0;
    double beta = 1.0;

    void validate() const;
    bool operator==(const Plant&) const = default;
};

// C(s) = K + Td s^delta
struct PdController {
    double K = 0.0;
    double Td = 0.0;
    double delta = 1.0;

    void validate() const;
    bool operator==(const PdController&) const = default;
};

// C(s) = K + Ti s^-lambda
struct PiController {
    double K = 0.0;
    double Ti = 0.0;
    double lambda = 1.0;

    void validate() const;
    bool operator==(const PiController&) const = default;
};

using Controller = std::variant<PdController, PiController>;

enum class Source { State, Input };

// gain * D^gl_order of a state (by index) or of the reference input w.
struct ModelTerm {
    Source source = Source::State;
    std::size_t index = 0;
    double gl_order = 0.0;
    double gain = 0.0;
};

// dx_i/dt = sum(state_terms[i]),  y = sum(output_terms).
struct StateModel {
    std::size_t dim = 0;
    std::vector<std::vector<ModelTerm>> state_terms;
    std::vector<ModelTerm> output_terms;
    // integer_chain[i]: equation i only holds integer-order (order 0) terms.
    std::vector<bool> integer_chain;

    void validate() const;
};

StateModel build_pd_model(const Plant& plant, const PdController& ctrl);

// The a1 term acts on x3 and the input term on w; see README "Model notes".
StateModel build_pi_model(const Plant& plant, const PiController& ctrl);

struct PolyTerm {
    double coeff = 0.0;
    double exponent = 0.0;
    bool operator==(const PolyTerm&) const = default;
};

// Sum of coeff * s^exponent with distinct, strictly decreasing exponents and
// nonzero coefficients. Like exponents (within 1e-12) are merged on
// construction and zero coefficients dropped.
class FracPoly {
public:
    static constexpr double kExponentTol = 1e-12;

    FracPoly() = default;
    explicit FracPoly(std::vector<PolyTerm> terms);

    const std::vector<PolyTerm>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }
    const PolyTerm& leading() const { return terms_.front(); }
    double min_exponent() const { return terms_.back().exponent; }
    double max_abs_coeff() const;
    double sum_abs_coeff() const;

    // Multiply by coeff * s^exponent.
    FracPoly scaled(double coeff, double exponent) const;

    friend FracPoly operator+(const FracPoly& lhs, const FracPoly& rhs);
    friend FracPoly operator-(const FracPoly& lhs, const FracPoly& rhs);
    friend FracPoly operator*(const FracPoly& lhs, const FracPoly& rhs);
    bool operator==(const FracPoly&) const = default;

    // Equal up to tolerance on coefficients and exponents.
    bool approx_equal(const FracPoly& other, double tol) const;

private:
    std::vector<PolyTerm> terms_;
};

// a2 s^alpha + a1 s^beta + Td s^delta + (a0 + K)
FracPoly char_poly_pd(const Plant& plant, const PdController& ctrl);

// a2 s^(alpha+lambda) + a1 s^(beta+lambda) + (a0 + K) s^lambda + Ti
FracPoly char_poly_pi(const Plant& plant, const PiController& ctrl);

FracPoly char_poly(const Plant& plant, const Controller& ctrl);

// det(sI - A(s)) of the s-domain form of a state model, where entry A_ij
// collects gain * s^gl_order of every state term of equation i on state j.
FracPoly model_determinant(const StateModel& model);

} // namespace fracreg
