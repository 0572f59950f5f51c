#pragma once

// Principal-branch evaluation of fractional polynomials, root location and
// closed-loop stability classification.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "fracreg/model.hpp"

namespace fracreg {

using Complex = std::complex<double>;

// s^q = exp(q (ln|s| + i arg s)), arg s in (-pi, pi].
Complex principal_pow(Complex s, double q);

Complex eval_fracpoly(const FracPoly& p, Complex s);
Complex eval_fracpoly_derivative(const FracPoly& p, Complex s);

struct Normalized {
    FracPoly poly;
    double shift = 0.0; // poly = p * s^shift
};

// Multiplies by s^(-min exponent) so every exponent is >= 0.
Normalized normalize(const FracPoly& p);

struct RootFindConfig {
    // Half-width of the square of Newton starts; unset = a bound that
    // encloses every root (see root_bound).
    std::optional<double> search_radius;
    int grid_density = 40;
    double newton_tol = 1e-10;
    int max_iter = 100;
    double dedupe_tol = 1e-6;
    // 0 disables the companion-matrix route.
    int commensurate_max_denominator = 20;
    double stability_margin = 0.0;

    void validate() const;
    bool operator==(const RootFindConfig&) const = default;

    // search_radius = 10 * (1 + max |pole|).
    static RootFindConfig around(std::span<const Complex> poles);
};

// Radius outside which p (any exponents) has no zero.
double root_bound(const FracPoly& p);

struct Root {
    Complex value;
    double residual = 0.0; // |p(value)| for the polynomial passed in
};

enum class Verdict { Stable, Unstable, Inconclusive };
enum class RootMethod { NewtonGrid, Commensurate };

const char* to_string(Verdict v);
const char* to_string(RootMethod m);

struct StabilityReport {
    std::vector<Root> roots; // sorted by real part, then imaginary part
    Verdict verdict = Verdict::Inconclusive;
    RootMethod method = RootMethod::NewtonGrid;
    // Set when the verdict rests on a search that is not exhaustive.
    bool coverage_caveat = true;
    double search_radius = 0.0;
    double residual_bound = 0.0; // newton_tol * (1 + max |coeff|)
};

// Commensurate polynomials go through the companion matrix of the
// polynomial in w = s^(1/m); everything else through multi-start Newton.
StabilityReport find_roots(const FracPoly& p, const RootFindConfig& cfg = {});

// Individual routes. commensurate_roots returns nullopt when p is not
// commensurate within cfg.commensurate_max_denominator.
std::vector<Root> newton_grid_roots(const FracPoly& p, const RootFindConfig& cfg = {});
std::optional<std::vector<Root>> commensurate_roots(const FracPoly& p, const RootFindConfig& cfg = {});

// Smallest m <= max_denominator with every exponent within 1e-9 of a
// multiple of 1/m.
std::optional<int> commensurate_denominator(const FracPoly& p, int max_denominator);

struct Classification {
    Verdict verdict = Verdict::Inconclusive;
    bool coverage_caveat = true;
};

// Unstable if any root sits at Re >= margin (within rounding of the
// imaginary axis counts); stable for complete enumerations with all roots in
// the open left half plane; a non-exhaustive search with roots all stable is
// stable with the caveat set; a search with no roots at all is inconclusive.
Classification classify_stability(std::span<const Root> roots, RootMethod method,
                                  double margin = 0.0);

} // namespace fracreg
