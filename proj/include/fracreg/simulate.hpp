#pragma once

// Time-domain solvers: the explicit Euler scheme on a StateModel, and a
// direct implicit GL discretization of the scalar closed-loop equation
// used as an independent oracle.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fracreg/model.hpp"

namespace fracreg {

struct StepInput {
    double amplitude = 1.0;
    bool operator==(const StepInput&) const = default;
};

// values[k] is w at t = k*h; must cover every simulated step.
struct SampledInput {
    std::vector<double> values;
    bool operator==(const SampledInput&) const = default;
};

using InputSpec = std::variant<StepInput, SampledInput>;

struct SimConfig {
    static constexpr std::size_t kDefaultMaxSteps = 1'000'000;

    double step = 1e-3;
    double t_end = 12.0;
    std::optional<double> memory_len;
    InputSpec input = StepInput{};
    std::size_t max_steps = kDefaultMaxSteps;

    void validate() const;
    // floor(t_end / step); the trajectory holds steps() + 1 samples.
    std::size_t steps() const;
    std::vector<double> input_samples() const;

    bool operator==(const SimConfig&) const = default;
};

struct Trajectory {
    double step = 0.0;
    std::vector<std::vector<double>> states; // states[i][k]; empty for direct runs
    std::vector<double> output;
    std::vector<double> input;

    std::size_t size() const noexcept { return output.size(); }
    double time(std::size_t k) const noexcept { return static_cast<double>(k) * step; }
};

// Divergence guard threshold on |state| and |y|.
inline constexpr double kDivergenceBound = 1e12;

class Diverged : public std::runtime_error {
public:
    Diverged(std::size_t index, Trajectory partial)
        : std::runtime_error("simulation diverged at step " + std::to_string(index)),
          index_(index), partial_(std::move(partial)) {}

    // First sample index whose value was non-finite or beyond the bound.
    std::size_t index() const noexcept { return index_; }
    // Samples 0 .. index-1.
    const Trajectory& partial() const noexcept { return partial_; }

private:
    std::size_t index_;
    Trajectory partial_;
};

// Zero initial state, x_{k+1} = x_k + h * rhs_k with GL sums over samples 0..k.
Trajectory simulate_state_space(const StateModel& model, const SimConfig& cfg);

// Solves a2 D^a y + a1 D^b y + Td D^d y + (a0+K) y = K w + Td D^d w (PD), or
// a2 D^(a+l) y + a1 D^(b+l) y + (a0+K) D^l y + Ti y = K D^l w + Ti w (PI)
// for y_k at every step. Only output and input are filled.
Trajectory simulate_direct(const Plant& plant, const Controller& ctrl, const SimConfig& cfg);

struct SteadyState {
    double mean = 0.0;
    double spread = 0.0; // max - min over the window
};

// Statistics of y over samples with t >= t_last - window.
SteadyState steady_state_estimate(const Trajectory& traj, double window);

} // namespace fracreg
