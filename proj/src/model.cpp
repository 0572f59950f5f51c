#include "fracreg/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracreg/errors.hpp"

namespace fracreg {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw InvalidArgument(std::string(name) + " must be finite");
    }
}

constexpr double kMaxGlOrder = 3.0;

void check_order(double q, const char* what) {
    if (!(q > -kMaxGlOrder && q < kMaxGlOrder)) {
        throw UnsupportedOrder(std::string(what) + ": GL order " + std::to_string(q) +
                               " outside (-3, 3)");
    }
}

std::vector<bool> integer_chain_of(const std::vector<std::vector<ModelTerm>>& eqs) {
    std::vector<bool> chain;
    chain.reserve(eqs.size());
    for (const auto& eq : eqs) {
        chain.push_back(std::all_of(eq.begin(), eq.end(),
                                    [](const ModelTerm& t) { return t.gl_order == 0.0; }));
    }
    return chain;
}

} // namespace

void Plant::validate() const {
    require_finite(a0, "plant.a0");
    require_finite(a1, "plant.a1");
    require_finite(a2, "plant.a2");
    require_finite(alpha, "plant.alpha");
    require_finite(beta, "plant.beta");
    if (a2 == 0.0) {
        throw InvalidArgument("plant.a2 must be nonzero");
    }
    if (!(alpha > beta && beta >= 0.0)) {
        throw InvalidArgument("plant orders must satisfy alpha > beta >= 0");
    }
    if (alpha > 3.0) {
        throw InvalidArgument("plant.alpha must not exceed 3");
    }
}

void PdController::validate() const {
    require_finite(K, "controller.K");
    require_finite(Td, "controller.Td");
    require_finite(delta, "controller.delta");
}

void PiController::validate() const {
    require_finite(K, "controller.K");
    require_finite(Ti, "controller.Ti");
    require_finite(lambda, "controller.lambda");
    if (!(lambda > 0.0)) {
        throw InvalidArgument("controller.lambda must be positive");
    }
}

void StateModel::validate() const {
    if (dim != 2 && dim != 3) {
        throw InvalidArgument("StateModel: dim must be 2 or 3");
    }
    if (state_terms.size() != dim || integer_chain.size() != dim) {
        throw InvalidArgument("StateModel: one equation per state required");
    }
    auto check = [this](const ModelTerm& t) {
        check_order(t.gl_order, "StateModel");
        if (!std::isfinite(t.gain)) {
            throw InvalidArgument("StateModel: non-finite gain");
        }
        if (t.source == Source::State && t.index >= dim) {
            throw InvalidArgument("StateModel: state index out of range");
        }
    };
    for (const auto& eq : state_terms) {
        std::for_each(eq.begin(), eq.end(), check);
    }
    std::for_each(output_terms.begin(), output_terms.end(), check);
}

StateModel build_pd_model(const Plant& plant, const PdController& ctrl) {
    plant.validate();
    ctrl.validate();
    const double a2 = plant.a2;
    const double alpha = plant.alpha;

    StateModel m;
    m.dim = 2;
    m.state_terms = {
        {{Source::State, 1, 0.0, 1.0}},
        {
            {Source::State, 0, 2.0 - alpha, -(plant.a0 + ctrl.K) / a2},
            {Source::State, 1, 1.0 + ctrl.delta - alpha, -ctrl.Td / a2},
            {Source::State, 1, 1.0 + plant.beta - alpha, -plant.a1 / a2},
            {Source::Input, 0, 2.0 - alpha, 1.0 / a2},
        },
    };
    m.output_terms = {
        {Source::State, 0, 0.0, ctrl.K},
        {Source::State, 1, ctrl.delta - 1.0, ctrl.Td},
    };
    m.integer_chain = integer_chain_of(m.state_terms);
    m.validate();
    return m;
}

StateModel build_pi_model(const Plant& plant, const PiController& ctrl) {
    plant.validate();
    ctrl.validate();
    const double a2 = plant.a2;
    const double alpha = plant.alpha;
    const double integral_order = 3.0 - alpha - ctrl.lambda;
    if (integral_order <= -kMaxGlOrder) {
        throw UnsupportedOrder("PI model: 3 - alpha - lambda must exceed -3");
    }

    StateModel m;
    m.dim = 3;
    m.state_terms = {
        {{Source::State, 1, 0.0, -1.0}, {Source::Input, 0, 0.0, 1.0}},
        {{Source::State, 2, 0.0, 1.0}},
        {
            {Source::State, 0, integral_order, ctrl.Ti / a2},
            {Source::State, 1, 2.0 - alpha, -(plant.a0 + ctrl.K) / a2},
            {Source::State, 2, 1.0 + plant.beta - alpha, -plant.a1 / a2},
            {Source::Input, 0, 2.0 - alpha, ctrl.K / a2},
        },
    };
    m.output_terms = {{Source::State, 1, 0.0, 1.0}};
    m.integer_chain = integer_chain_of(m.state_terms);
    m.validate();
    return m;
}

FracPoly::FracPoly(std::vector<PolyTerm> terms) {
    for (const auto& t : terms) {
        if (!std::isfinite(t.coeff) || !std::isfinite(t.exponent)) {
            throw InvalidArgument("FracPoly: non-finite term");
        }
    }
    std::stable_sort(terms.begin(), terms.end(),
                     [](const PolyTerm& a, const PolyTerm& b) { return a.exponent > b.exponent; });
    for (const auto& t : terms) {
        if (!terms_.empty() && std::abs(terms_.back().exponent - t.exponent) <= kExponentTol) {
            terms_.back().coeff += t.coeff;
        } else {
            terms_.push_back(t);
        }
    }
    std::erase_if(terms_, [](const PolyTerm& t) { return t.coeff == 0.0; });
}

double FracPoly::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& t : terms_) {
        m = std::max(m, std::abs(t.coeff));
    }
    return m;
}

double FracPoly::sum_abs_coeff() const {
    double m = 0.0;
    for (const auto& t : terms_) {
        m += std::abs(t.coeff);
    }
    return m;
}

FracPoly FracPoly::scaled(double coeff, double exponent) const {
    std::vector<PolyTerm> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
        out.push_back({t.coeff * coeff, t.exponent + exponent});
    }
    return FracPoly(std::move(out));
}

FracPoly operator+(const FracPoly& lhs, const FracPoly& rhs) {
    std::vector<PolyTerm> all = lhs.terms_;
    all.insert(all.end(), rhs.terms_.begin(), rhs.terms_.end());
    return FracPoly(std::move(all));
}

FracPoly operator-(const FracPoly& lhs, const FracPoly& rhs) {
    return lhs + rhs.scaled(-1.0, 0.0);
}

FracPoly operator*(const FracPoly& lhs, const FracPoly& rhs) {
    std::vector<PolyTerm> all;
    for (const auto& a : lhs.terms_) {
        for (const auto& b : rhs.terms_) {
            all.push_back({a.coeff * b.coeff, a.exponent + b.exponent});
        }
    }
    return FracPoly(std::move(all));
}

bool FracPoly::approx_equal(const FracPoly& other, double tol) const {
    if (terms_.size() != other.terms_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& a = terms_[i];
        const auto& b = other.terms_[i];
        if (std::abs(a.exponent - b.exponent) > tol ||
            std::abs(a.coeff - b.coeff) > tol * (1.0 + std::abs(b.coeff))) {
            return false;
        }
    }
    return true;
}

FracPoly char_poly_pd(const Plant& plant, const PdController& ctrl) {
    plant.validate();
    ctrl.validate();
    return FracPoly({{plant.a2, plant.alpha},
                     {plant.a1, plant.beta},
                     {ctrl.Td, ctrl.delta},
                     {plant.a0 + ctrl.K, 0.0}});
}

FracPoly char_poly_pi(const Plant& plant, const PiController& ctrl) {
    plant.validate();
    ctrl.validate();
    const double lam = ctrl.lambda;
    return FracPoly({{plant.a2, plant.alpha + lam},
                     {plant.a1, plant.beta + lam},
                     {plant.a0 + ctrl.K, lam},
                     {ctrl.Ti, 0.0}});
}

FracPoly char_poly(const Plant& plant, const Controller& ctrl) {
    return std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, PdController>) {
                return char_poly_pd(plant, c);
            } else {
                return char_poly_pi(plant, c);
            }
        },
        ctrl);
}

FracPoly model_determinant(const StateModel& model) {
    model.validate();
    const std::size_t n = model.dim;
    // M = sI - A(s)
    std::vector<std::vector<FracPoly>> m(n, std::vector<FracPoly>(n));
    for (std::size_t i = 0; i < n; ++i) {
        m[i][i] = FracPoly({{1.0, 1.0}});
        for (const auto& t : model.state_terms[i]) {
            if (t.source == Source::State) {
                m[i][t.index] = m[i][t.index] - FracPoly({{t.gain, t.gl_order}});
            }
        }
    }
    if (n == 2) {
        return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    }
    auto minor = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
        return m[1][a] * m[2][b] - m[1][c] * m[2][d];
    };
    return m[0][0] * minor(1, 2, 2, 1) - m[0][1] * minor(0, 2, 2, 0) + m[0][2] * minor(0, 1, 1, 0);
}

} // namespace fracreg
