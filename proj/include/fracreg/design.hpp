#pragma once

// Pole-placement synthesis of PD^delta and PI^lambda controllers.

#include <array>
#include <complex>
#include <optional>

#include "fracreg/model.hpp"

namespace fracreg {

struct DesignSpecPd {
    Plant plant;
    std::complex<double> pole; // one of the conjugate pair, Im != 0
    std::optional<double> ess_percent;
    std::optional<double> K_override;
};

struct DesignSpecPi {
    Plant plant;
    std::array<std::complex<double>, 3> poles; // closed under conjugation
};

// K = (100 / ess - 1) * a0
double gain_from_ss_error(double a0, double ess_percent);

// Fixes K from the steady-state error (or the override) and solves the real
// and imaginary parts of the characteristic equation at the pole for
// (Td, delta). Of the solution branches reached from the start points, the
// one with the smallest |delta| is returned.
PdController design_pd_fractional(const DesignSpecPd& spec);

// delta = 1; K and Td from the 2x2 linear system at the pole.
PdController design_pd_integer(const DesignSpecPd& spec);

// Solves for (K, Ti, lambda > 0) placing all three poles.
PiController design_pi(const DesignSpecPi& spec);

} // namespace fracreg
