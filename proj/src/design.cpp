#include "fracreg/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracreg/charpoly.hpp"
#include "fracreg/errors.hpp"

namespace fracreg {

namespace {

constexpr int kMaxNewtonIter = 100;
constexpr int kMaxHalvings = 30;
constexpr double kJacobianStep = 1e-7;
constexpr double kResidualTol = 1e-8;

// Start points (Td, delta) for the fractional PD solve.
constexpr std::array<std::array<double, 2>, 4> kPdStarts{{{1.0, 0.5}, {1.0, 1.0}, {-1.0, -0.5}, {10.0, 0.7}}};
constexpr std::array<double, 4> kPiLambdaStarts{0.25, 0.5, 0.75, 1.0};

double tolerance_for(double a0_plus_k) {
    return kResidualTol * std::max(std::abs(a0_plus_k), std::numeric_limits<double>::min());
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Damped Newton / Gauss-Newton on a square or overdetermined residual map,
// iterated until no further decrease. Jacobian by central differences.
template <class Residual, class Admissible>
Eigen::VectorXd solve_least_squares(const Residual& residual, const Admissible& admissible,
                                    Eigen::VectorXd x) {
    Eigen::VectorXd r = residual(x);
    if (!all_finite(r)) {
        return x;
    }
    double norm = r.norm();
    for (int it = 0; it < kMaxNewtonIter && norm > 0.0; ++it) {
        Eigen::MatrixXd jac(r.size(), x.size());
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            const double hj = kJacobianStep * std::max(1.0, std::abs(x[j]));
            Eigen::VectorXd xp = x;
            Eigen::VectorXd xm = x;
            xp[j] += hj;
            xm[j] -= hj;
            if (!admissible(xp) || !admissible(xm)) {
                return x;
            }
            jac.col(j) = (residual(xp) - residual(xm)) / (2.0 * hj);
        }
        if (!jac.allFinite()) {
            return x;
        }
        Eigen::VectorXd step = jac.colPivHouseholderQr().solve(r);
        if (!all_finite(step)) {
            return x;
        }
        bool improved = false;
        for (int h = 0; h < kMaxHalvings; ++h) {
            const Eigen::VectorXd trial = x - step;
            if (admissible(trial)) {
                const Eigen::VectorXd rt = residual(trial);
                if (all_finite(rt) && rt.norm() < norm) {
                    x = trial;
                    r = rt;
                    norm = rt.norm();
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!improved || step.norm() <= 1e-15 * (1.0 + x.norm())) {
            break;
        }
    }
    return x;
}

Complex upper_half(Complex p) { return p.imag() < 0.0 ? std::conj(p) : p; }

double resolve_gain(const DesignSpecPd& spec) {
    if (spec.ess_percent.has_value() == spec.K_override.has_value()) {
        throw InvalidArgument("design: exactly one of ess_percent and K must be given");
    }
    if (spec.K_override) {
        if (!std::isfinite(*spec.K_override)) {
            throw InvalidArgument("design: K must be finite");
        }
        return *spec.K_override;
    }
    return gain_from_ss_error(spec.plant.a0, *spec.ess_percent);
}

} // namespace

double gain_from_ss_error(double a0, double ess_percent) {
    if (!(ess_percent > 0.0 && ess_percent < 100.0)) {
        throw InvalidArgument("ess_percent must lie in (0, 100)");
    }
    if (!(a0 > 0.0) || !std::isfinite(a0)) {
        throw InvalidArgument("gain_from_ss_error requires a0 > 0");
    }
    return (100.0 / ess_percent - 1.0) * a0;
}

PdController design_pd_fractional(const DesignSpecPd& spec) {
    spec.plant.validate();
    if (spec.pole.imag() == 0.0 || !std::isfinite(spec.pole.real()) || !std::isfinite(spec.pole.imag())) {
        throw InvalidArgument("design_pd_fractional: pole must be finite with Im != 0");
    }
    const double K = resolve_gain(spec);
    const Plant& pl = spec.plant;
    const Complex s = upper_half(spec.pole);
    const Complex fixed = pl.a2 * principal_pow(s, pl.alpha) + pl.a1 * principal_pow(s, pl.beta) + (pl.a0 + K);
    const double tol = tolerance_for(pl.a0 + K);

    auto residual = [&](const Eigen::VectorXd& x) {
        const Complex f = fixed + x[0] * principal_pow(s, x[1]);
        return Eigen::Vector2d(f.real(), f.imag()).eval();
    };
    auto admissible = [](const Eigen::VectorXd& x) { return x.allFinite(); };

    std::optional<PdController> best;
    double last_residual = std::numeric_limits<double>::infinity();
    for (const auto& start : kPdStarts) {
        const Eigen::VectorXd x = solve_least_squares(residual, admissible, Eigen::Vector2d(start[0], start[1]));
        const PdController candidate{K, x[0], x[1]};
        const double res = std::abs(eval_fracpoly(char_poly_pd(pl, candidate), s));
        last_residual = std::min(last_residual, res);
        if (!(res <= tol)) {
            continue;
        }
        if (!best || std::abs(candidate.delta) < std::abs(best->delta) - 1e-9) {
            best = candidate;
        }
    }
    if (!best) {
        throw NoSolution("design_pd_fractional: no start converged, residual " +
                             std::to_string(last_residual),
                         last_residual);
    }
    return *best;
}

PdController design_pd_integer(const DesignSpecPd& spec) {
    spec.plant.validate();
    const Plant& pl = spec.plant;
    const Complex s = upper_half(spec.pole);
    // K + Td * s = -(a2 s^alpha + a1 s^beta + a0)
    const Complex rhs = -(pl.a2 * principal_pow(s, pl.alpha) + pl.a1 * principal_pow(s, pl.beta) + pl.a0);
    const double det = s.imag();
    if (det == 0.0 || !std::isfinite(det)) {
        throw NoSolution("design_pd_integer: singular system (pole on the real axis)", std::abs(rhs));
    }
    const double Td = rhs.imag() / det;
    const double K = rhs.real() - Td * s.real();
    return {K, Td, 1.0};
}

PiController design_pi(const DesignSpecPi& spec) {
    spec.plant.validate();
    const Plant& pl = spec.plant;

    // Representatives: Im > 0 members of each pair plus the real poles.
    std::vector<Complex> reps;
    std::array<bool, 3> used{};
    for (std::size_t i = 0; i < 3; ++i) {
        const Complex p = spec.poles[i];
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
            throw InvalidArgument("design_pi: poles must be finite");
        }
        if (used[i]) {
            continue;
        }
        used[i] = true;
        if (p.imag() == 0.0) {
            reps.push_back(p);
            continue;
        }
        bool paired = false;
        for (std::size_t j = i + 1; j < 3 && !paired; ++j) {
            const Complex q = spec.poles[j];
            if (!used[j] && std::abs(q - std::conj(p)) <= 1e-12 * (1.0 + std::abs(p))) {
                used[j] = true;
                paired = true;
            }
        }
        if (!paired) {
            throw InvalidArgument("design_pi: poles must be closed under conjugation");
        }
        reps.push_back(upper_half(p));
    }

    auto char_value = [&](Complex s, double K, double Ti, double lam) {
        return pl.a2 * principal_pow(s, pl.alpha + lam) + pl.a1 * principal_pow(s, pl.beta + lam) +
               (pl.a0 + K) * principal_pow(s, lam) + Ti;
    };
    // Positive real poles give a real equation; every other pole two.
    auto rows_for = [](Complex s) { return (s.imag() == 0.0 && s.real() >= 0.0) ? 1 : 2; };
    Eigen::Index rows = 0;
    for (const auto& s : reps) {
        rows += rows_for(s);
    }

    double last_residual = std::numeric_limits<double>::infinity();
    for (double lam0 : kPiLambdaStarts) {
        std::vector<double> weight;
        for (const auto& s : reps) {
            weight.push_back(1.0 / (1.0 + std::abs(pl.a2) * std::pow(std::abs(s), pl.alpha + lam0)));
        }
        auto residual = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd r(rows);
            Eigen::Index k = 0;
            for (std::size_t i = 0; i < reps.size(); ++i) {
                const Complex f = weight[i] * char_value(reps[i], x[0], x[1], x[2]);
                r[k++] = f.real();
                if (rows_for(reps[i]) == 2) {
                    r[k++] = f.imag();
                }
            }
            return r;
        };
        auto admissible = [](const Eigen::VectorXd& x) { return x.allFinite() && x[2] > 0.0; };

        // K and Ti enter linearly; seed them by least squares at lambda0.
        Eigen::MatrixXd a(rows, 2);
        Eigen::VectorXd b(rows);
        Eigen::Index k = 0;
        for (std::size_t i = 0; i < reps.size(); ++i) {
            const Complex sl = weight[i] * principal_pow(reps[i], lam0);
            const Complex base = weight[i] * char_value(reps[i], 0.0, 0.0, lam0);
            a.row(k) << sl.real(), weight[i];
            b[k++] = -base.real();
            if (rows_for(reps[i]) == 2) {
                a.row(k) << sl.imag(), 0.0;
                b[k++] = -base.imag();
            }
        }
        const Eigen::VectorXd kt = a.colPivHouseholderQr().solve(b);
        Eigen::VectorXd x0(3);
        x0 << kt[0], kt[1], lam0;
        if (!x0.allFinite()) {
            continue;
        }
        const Eigen::VectorXd x = solve_least_squares(residual, admissible, x0);
        if (!(x[2] > 0.0)) {
            continue;
        }
        const PiController candidate{x[0], x[1], x[2]};
        const FracPoly poly = char_poly_pi(pl, candidate);
        double worst = 0.0;
        for (const auto& s : spec.poles) {
            worst = std::max(worst, std::abs(eval_fracpoly(poly, s)));
        }
        last_residual = std::min(last_residual, worst);
        if (worst <= tolerance_for(pl.a0 + candidate.K)) {
            return candidate;
        }
    }
    throw NoSolution("design_pi: no start converged, residual " + std::to_string(last_residual),
                     last_residual);
}

} // namespace fracreg
