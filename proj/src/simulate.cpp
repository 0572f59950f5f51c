#include "fracreg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>

#include "fracreg/errors.hpp"
#include "fracreg/gl.hpp"

namespace fracreg {

void SimConfig::validate() const {
    if (!(step > 0.0 && step <= 0.1)) {
        throw InvalidArgument("sim.h must lie in (0, 0.1]");
    }
    if (!std::isfinite(t_end) || t_end < 10.0 * step * (1.0 - 1e-12)) {
        throw InvalidArgument("sim.t_end must be at least 10 steps");
    }
    if (memory_len && !(*memory_len > 0.0)) {
        throw InvalidArgument("sim.memory_len must be positive");
    }
    if (t_end / step > static_cast<double>(max_steps)) {
        throw ResourceLimit("sim: t_end / h = " + std::to_string(t_end / step) +
                            " exceeds the step cap of " + std::to_string(max_steps));
    }
    if (const auto* s = std::get_if<SampledInput>(&input)) {
        if (s->values.size() < steps() + 1) {
            throw InvalidArgument("sim.input.values must provide floor(t_end/h)+1 samples");
        }
        for (double v : s->values) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("sim.input.values must be finite");
            }
        }
    } else if (!std::isfinite(std::get<StepInput>(input).amplitude)) {
        throw InvalidArgument("sim.input.amplitude must be finite");
    }
}

std::size_t SimConfig::steps() const { return whole_steps(t_end, step); }

std::vector<double> SimConfig::input_samples() const {
    const std::size_t n = steps() + 1;
    if (const auto* s = std::get_if<SampledInput>(&input)) {
        return {s->values.begin(), s->values.begin() + static_cast<std::ptrdiff_t>(n)};
    }
    return std::vector<double>(n, std::get<StepInput>(input).amplitude);
}

namespace {

bool out_of_bounds(double v) { return !std::isfinite(v) || std::abs(v) > kDivergenceBound; }

struct CompiledTerm {
    Source source;
    std::size_t index;
    double gain;
    bool plain; // order 0: the sample itself
    const GlOperator* op;
};

} // namespace

Trajectory simulate_state_space(const StateModel& model, const SimConfig& cfg) {
    model.validate();
    cfg.validate();
    const std::size_t n = cfg.steps() + 1;
    const double h = cfg.step;

    // One operator per distinct order, shared by every term that uses it.
    std::vector<std::unique_ptr<GlOperator>> ops;
    auto op_for = [&](double q) -> const GlOperator* {
        for (const auto& op : ops) {
            if (op->order() == q) {
                return op.get();
            }
        }
        ops.push_back(std::make_unique<GlOperator>(q, h, n, cfg.memory_len));
        return ops.back().get();
    };
    auto compile = [&](const std::vector<ModelTerm>& terms) {
        std::vector<CompiledTerm> out;
        for (const auto& t : terms) {
            if (t.gain == 0.0) {
                continue;
            }
            const bool plain = t.gl_order == 0.0;
            out.push_back({t.source, t.index, t.gain, plain, plain ? nullptr : op_for(t.gl_order)});
        }
        return out;
    };
    std::vector<std::vector<CompiledTerm>> eqs;
    for (const auto& eq : model.state_terms) {
        eqs.push_back(compile(eq));
    }
    const auto output_terms = compile(model.output_terms);

    Trajectory traj;
    traj.step = h;
    traj.input = cfg.input_samples();
    traj.states.assign(model.dim, std::vector<double>(n, 0.0));
    traj.output.assign(n, 0.0);

    auto eval = [&](const CompiledTerm& t, std::size_t k) {
        std::span<const double> series =
            t.source == Source::Input ? std::span<const double>(traj.input)
                                      : std::span<const double>(traj.states[t.index]);
        return t.gain * (t.plain ? series[k] : t.op->apply_at(series, k));
    };
    auto truncate = [&](std::size_t len) {
        Trajectory partial = traj;
        for (auto& s : partial.states) {
            s.resize(len);
        }
        partial.output.resize(len);
        partial.input.resize(len);
        return partial;
    };

    std::vector<double> rate(model.dim);
    for (std::size_t k = 0;; ++k) {
        double y = 0.0;
        for (const auto& t : output_terms) {
            y += eval(t, k);
        }
        if (out_of_bounds(y)) {
            throw Diverged(k, truncate(k));
        }
        traj.output[k] = y;
        if (k + 1 == n) {
            break;
        }
        for (std::size_t i = 0; i < model.dim; ++i) {
            double r = 0.0;
            for (const auto& t : eqs[i]) {
                r += eval(t, k);
            }
            rate[i] = r;
        }
        bool bad = false;
        for (std::size_t i = 0; i < model.dim; ++i) {
            const double next = traj.states[i][k] + h * rate[i];
            traj.states[i][k + 1] = next;
            bad = bad || out_of_bounds(next);
        }
        if (bad) {
            throw Diverged(k + 1, truncate(k + 1));
        }
    }
    return traj;
}

namespace {

// coeff * D^order applied to a series.
struct ScalarTerm {
    double coeff;
    double order;
};

} // namespace

Trajectory simulate_direct(const Plant& plant, const Controller& ctrl, const SimConfig& cfg) {
    plant.validate();
    cfg.validate();
    std::vector<ScalarTerm> lhs;
    std::vector<ScalarTerm> rhs;
    if (const auto* pd = std::get_if<PdController>(&ctrl)) {
        pd->validate();
        lhs = {{plant.a2, plant.alpha}, {plant.a1, plant.beta}, {pd->Td, pd->delta},
               {plant.a0 + pd->K, 0.0}};
        rhs = {{pd->K, 0.0}, {pd->Td, pd->delta}};
    } else {
        const auto& pi = std::get<PiController>(ctrl);
        pi.validate();
        const double lam = pi.lambda;
        lhs = {{plant.a2, plant.alpha + lam}, {plant.a1, plant.beta + lam},
               {plant.a0 + pi.K, lam}, {pi.Ti, 0.0}};
        rhs = {{pi.K, lam}, {pi.Ti, 0.0}};
    }
    std::erase_if(lhs, [](const ScalarTerm& t) { return t.coeff == 0.0; });
    std::erase_if(rhs, [](const ScalarTerm& t) { return t.coeff == 0.0; });

    const std::size_t n = cfg.steps() + 1;
    const double h = cfg.step;
    std::vector<GlOperator> lhs_ops;
    std::vector<GlOperator> rhs_ops;
    double pivot = 0.0;
    double pivot_scale = 0.0;
    for (const auto& t : lhs) {
        lhs_ops.emplace_back(t.order, h, n, cfg.memory_len);
        // b_0 = 1, so the unknown y_k enters with weight coeff * h^-q.
        pivot += t.coeff * std::pow(h, -t.order);
        pivot_scale += std::abs(t.coeff * std::pow(h, -t.order));
    }
    for (const auto& t : rhs) {
        rhs_ops.emplace_back(t.order, h, n, cfg.memory_len);
    }
    if (!(std::abs(pivot) > 1e-14 * pivot_scale)) {
        throw SingularStep("direct solver: coefficient of y_k vanishes");
    }

    Trajectory traj;
    traj.step = h;
    traj.input = cfg.input_samples();
    traj.output.assign(n, 0.0);
    std::span<const double> w(traj.input);
    std::span<const double> y(traj.output);

    for (std::size_t k = 0; k < n; ++k) {
        double forcing = 0.0;
        for (std::size_t i = 0; i < rhs.size(); ++i) {
            forcing += rhs[i].coeff * rhs_ops[i].apply_at(w, k);
        }
        // y_k is still zero here, so apply_at yields the history part only.
        double history = 0.0;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            history += lhs[i].coeff * lhs_ops[i].apply_at(y, k);
        }
        const double yk = (forcing - history) / pivot;
        if (out_of_bounds(yk)) {
            Trajectory partial = traj;
            partial.output.resize(k);
            partial.input.resize(k);
            throw Diverged(k, std::move(partial));
        }
        traj.output[k] = yk;
    }
    return traj;
}

SteadyState steady_state_estimate(const Trajectory& traj, double window) {
    if (traj.output.empty()) {
        throw InvalidArgument("steady_state_estimate: empty trajectory");
    }
    const double duration = traj.time(traj.size() - 1);
    if (!(window >= 0.0) || window > duration * (1.0 + 1e-12)) {
        throw InvalidArgument("steady_state_estimate: window exceeds trajectory duration");
    }
    const std::size_t span = std::min(whole_steps(window, traj.step), traj.size() - 1);
    const auto first = traj.output.end() - static_cast<std::ptrdiff_t>(span + 1);
    const auto [lo, hi] = std::minmax_element(first, traj.output.end());
    double sum = 0.0;
    for (auto it = first; it != traj.output.end(); ++it) {
        sum += *it;
    }
    return {sum / static_cast<double>(span + 1), *hi - *lo};
}

} // namespace fracreg
