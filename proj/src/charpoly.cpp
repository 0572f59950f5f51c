#include "fracreg/charpoly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "fracreg/errors.hpp"

namespace fracreg {

namespace {

constexpr double kPi = std::numbers::pi;

double principal_arg(Complex s) {
    const double a = std::arg(s);
    return a == -kPi ? kPi : a;
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

} // namespace

Complex principal_pow(Complex s, double q) {
    if (s == Complex(0.0, 0.0)) {
        if (q > 0.0) {
            return {0.0, 0.0};
        }
        if (q == 0.0) {
            return {1.0, 0.0};
        }
        throw DomainError("0^q with q < 0 is undefined");
    }
    if (q == 0.0) {
        return {1.0, 0.0};
    }
    return std::polar(std::exp(q * std::log(std::abs(s))), q * principal_arg(s));
}

Complex eval_fracpoly(const FracPoly& p, Complex s) {
    Complex sum(0.0, 0.0);
    for (const auto& t : p.terms()) {
        sum += t.coeff * principal_pow(s, t.exponent);
    }
    return sum;
}

Complex eval_fracpoly_derivative(const FracPoly& p, Complex s) {
    Complex sum(0.0, 0.0);
    for (const auto& t : p.terms()) {
        if (t.exponent != 0.0) {
            sum += t.coeff * t.exponent * principal_pow(s, t.exponent - 1.0);
        }
    }
    return sum;
}

Normalized normalize(const FracPoly& p) {
    if (p.empty()) {
        throw InvalidArgument("normalize: empty polynomial");
    }
    const double shift = -p.min_exponent();
    if (shift <= 0.0) {
        return {p, 0.0};
    }
    std::vector<PolyTerm> terms = p.terms();
    for (auto& t : terms) {
        t.exponent += shift;
    }
    // The smallest exponent becomes exactly zero.
    terms.back().exponent = 0.0;
    return {FracPoly(std::move(terms)), shift};
}

void RootFindConfig::validate() const {
    if (search_radius && !(*search_radius > 0.0)) {
        throw InvalidArgument("search_radius must be positive");
    }
    if (grid_density < 2 || max_iter < 1 || !(newton_tol > 0.0) || !(dedupe_tol > 0.0) ||
        commensurate_max_denominator < 0) {
        throw InvalidArgument("RootFindConfig: parameters must be positive");
    }
}

RootFindConfig RootFindConfig::around(std::span<const Complex> poles) {
    double m = 0.0;
    for (const auto& p : poles) {
        m = std::max(m, std::abs(p));
    }
    RootFindConfig cfg;
    cfg.search_radius = 10.0 * (1.0 + m);
    return cfg;
}

double root_bound(const FracPoly& p) {
    // For |s| >= R_i = (n |c_i| / |c_lead|)^(1 / (e_lead - e_i)) each lower
    // term is at most 1/n of the leading one; beyond max R_i no zero exists.
    const auto& terms = p.terms();
    if (terms.size() < 2) {
        return 1.0;
    }
    const double n = static_cast<double>(terms.size() - 1);
    const double lead = std::abs(terms.front().coeff);
    double r = 1.0;
    for (std::size_t i = 1; i < terms.size(); ++i) {
        const double gap = terms.front().exponent - terms[i].exponent;
        r = std::max(r, std::pow(n * std::abs(terms[i].coeff) / lead, 1.0 / gap));
    }
    return r;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

const char* to_string(RootMethod m) {
    return m == RootMethod::Commensurate ? "commensurate" : "newton-grid";
}

namespace {

struct NewtonResult {
    Complex root;
    double residual;
};

// Damped Newton driven to the rounding floor; nullopt when the iterate
// leaves the finite plane or never gets below the threshold.
std::optional<NewtonResult> newton(const FracPoly& p, Complex s, int max_iter, double threshold) {
    if (std::abs(s) < 1e-12) {
        s = Complex(1e-6, 1e-6);
    }
    Complex f = eval_fracpoly(p, s);
    double fa = std::abs(f);
    for (int it = 0; it < max_iter && fa > 0.0; ++it) {
        const Complex d = eval_fracpoly_derivative(p, s);
        if (!finite(d) || d == Complex(0.0, 0.0)) {
            break;
        }
        Complex step = f / d;
        bool improved = false;
        for (int halving = 0; halving < 30; ++halving) {
            const Complex trial = s - step;
            if (trial != Complex(0.0, 0.0) || p.min_exponent() >= 0.0) {
                const Complex ft = eval_fracpoly(p, trial);
                if (finite(ft) && std::abs(ft) < fa) {
                    s = trial;
                    f = ft;
                    fa = std::abs(ft);
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!improved || std::abs(step) <= 1e-15 * (1.0 + std::abs(s))) {
            break;
        }
    }
    if (!finite(s) || !(fa <= threshold)) {
        return std::nullopt;
    }
    return NewtonResult{s, fa};
}

double residual_threshold(const FracPoly& p, const RootFindConfig& cfg) {
    return cfg.newton_tol * (1.0 + p.max_abs_coeff());
}

bool near_any(const std::vector<Root>& roots, Complex s, double tol) {
    return std::any_of(roots.begin(), roots.end(), [&](const Root& r) {
        return std::abs(r.value - s) <= tol * (1.0 + std::abs(s));
    });
}

// Residual on the caller's polynomial, both checked against the threshold.
std::optional<Root> accept(const FracPoly& original, const FracPoly& work, Complex s,
                           double threshold) {
    if (s == Complex(0.0, 0.0)) {
        return std::nullopt;
    }
    const double rw = std::abs(eval_fracpoly(work, s));
    const double ro = std::abs(eval_fracpoly(original, s));
    if (!(rw <= threshold && ro <= threshold)) {
        return std::nullopt;
    }
    return Root{s, ro};
}

void add_root(std::vector<Root>& roots, const FracPoly& original, const FracPoly& work, Complex s,
              const RootFindConfig& cfg) {
    const double threshold = residual_threshold(work, cfg);
    // Roots within rounding of the real axis are pulled onto it; the upper
    // side (+0) keeps negative reals on the principal sheet.
    if (std::abs(s.imag()) <= cfg.dedupe_tol * (1.0 + std::abs(s))) {
        if (auto on_axis = newton(work, Complex(s.real(), 0.0), cfg.max_iter, threshold);
            on_axis && std::abs(on_axis->root.imag()) == 0.0) {
            s = Complex(on_axis->root.real(), 0.0);
        }
    }
    if (near_any(roots, s, cfg.dedupe_tol)) {
        return;
    }
    if (auto r = accept(original, work, s, threshold)) {
        roots.push_back(*r);
    }
    // Real coefficients: non-real roots come in conjugate pairs.
    if (s.imag() != 0.0 && !near_any(roots, std::conj(s), cfg.dedupe_tol)) {
        if (auto r = accept(original, work, std::conj(s), threshold)) {
            roots.push_back(*r);
        }
    }
}

void sort_roots(std::vector<Root>& roots) {
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) {
            return a.value.real() < b.value.real();
        }
        return a.value.imag() < b.value.imag();
    });
}

std::vector<Root> newton_grid_impl(const FracPoly& original, const FracPoly& work,
                                   const RootFindConfig& cfg, double radius) {
    const double threshold = residual_threshold(work, cfg);
    const int n = cfg.grid_density;
    std::vector<Complex> starts;
    starts.reserve(static_cast<std::size_t>(2 * n * n));
    // Square grid over [-R, R]^2.
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x = -radius + 2.0 * radius * i / (n - 1);
            const double y = -radius + 2.0 * radius * j / (n - 1);
            starts.emplace_back(x, y);
        }
    }
    // Log-polar rings, denser near the origin where the square grid is coarse.
    for (int i = 0; i < n; ++i) {
        const double r = radius * std::pow(1e-3, 1.0 - static_cast<double>(i) / (n - 1));
        for (int j = 0; j < n; ++j) {
            const double theta = -kPi + 2.0 * kPi * (j + 0.5) / n;
            starts.push_back(std::polar(r, theta));
        }
    }
    std::vector<Root> roots;
    for (const auto& s0 : starts) {
        if (auto r = newton(work, s0, cfg.max_iter, threshold)) {
            add_root(roots, original, work, r->root, cfg);
        }
    }
    sort_roots(roots);
    return roots;
}

// Horner evaluation of sum c[k] w^k with derivative.
std::pair<Complex, Complex> horner(const std::vector<double>& c, Complex w) {
    Complex f(0.0, 0.0);
    Complex d(0.0, 0.0);
    for (std::size_t k = c.size(); k-- > 0;) {
        d = d * w + f;
        f = f * w + c[k];
    }
    return {f, d};
}

Complex polish_w(const std::vector<double>& c, Complex w) {
    double fa = std::abs(horner(c, w).first);
    for (int it = 0; it < 20; ++it) {
        const auto [f, d] = horner(c, w);
        if (d == Complex(0.0, 0.0)) {
            break;
        }
        const Complex trial = w - f / d;
        const double ft = std::abs(horner(c, trial).first);
        if (!(ft < fa)) {
            break;
        }
        w = trial;
        fa = ft;
    }
    return w;
}

} // namespace

std::optional<int> commensurate_denominator(const FracPoly& p, int max_denominator) {
    for (int m = 1; m <= max_denominator; ++m) {
        const bool ok = std::all_of(p.terms().begin(), p.terms().end(), [m](const PolyTerm& t) {
            const double scaled = t.exponent * m;
            return std::abs(scaled - std::round(scaled)) <= 1e-9 * m;
        });
        if (ok) {
            return m;
        }
    }
    return std::nullopt;
}

std::vector<Root> newton_grid_roots(const FracPoly& p, const RootFindConfig& cfg) {
    cfg.validate();
    const auto work = normalize(p).poly;
    if (work.size() < 2) {
        throw InvalidArgument("find_roots: need at least two terms");
    }
    const double radius = cfg.search_radius.value_or(1.05 * root_bound(work));
    return newton_grid_impl(p, work, cfg, radius);
}

std::optional<std::vector<Root>> commensurate_roots(const FracPoly& p, const RootFindConfig& cfg) {
    cfg.validate();
    const auto work = normalize(p).poly;
    if (work.size() < 2) {
        throw InvalidArgument("find_roots: need at least two terms");
    }
    const auto m = commensurate_denominator(work, cfg.commensurate_max_denominator);
    if (!m) {
        return std::nullopt;
    }
    constexpr long kMaxDegree = 400;
    const long degree = std::lround(work.leading().exponent * *m);
    if (degree < 1 || degree > kMaxDegree) {
        return std::nullopt;
    }
    std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
    for (const auto& t : work.terms()) {
        c[static_cast<std::size_t>(std::lround(t.exponent * *m))] += t.coeff;
    }
    const auto d = static_cast<Eigen::Index>(degree);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 1; i < d; ++i) {
        companion(i, i - 1) = 1.0;
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        companion(i, d - 1) = -c[static_cast<std::size_t>(i)] / c.back();
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) {
        return std::nullopt;
    }

    const double threshold = residual_threshold(work, cfg);
    const double sector = kPi / *m;
    std::vector<Root> roots;
    for (Eigen::Index i = 0; i < d; ++i) {
        const Complex w = polish_w(c, solver.eigenvalues()(i));
        const double theta = std::arg(w);
        Complex s;
        if (std::abs(std::abs(theta) - sector) <= 1e-8) {
            s = Complex(-std::pow(std::abs(w), *m), 0.0); // on the cut, arg s = pi
        } else if (std::abs(theta) < sector) {
            s = std::polar(std::pow(std::abs(w), *m), theta * *m);
        } else {
            continue; // secondary sheet
        }
        if (!accept(p, work, s, threshold)) {
            auto polished = newton(work, s, cfg.max_iter, threshold);
            if (!polished) {
                return std::nullopt;
            }
            s = polished->root;
        }
        add_root(roots, p, work, s, cfg);
    }
    sort_roots(roots);
    return roots;
}

Classification classify_stability(std::span<const Root> roots, RootMethod method, double margin) {
    const bool unstable = std::any_of(roots.begin(), roots.end(), [margin](const Root& r) {
        return r.value.real() >= margin - 1e-9 * (1.0 + std::abs(r.value));
    });
    if (unstable) {
        return {Verdict::Unstable, false};
    }
    if (method == RootMethod::Commensurate) {
        return {Verdict::Stable, false};
    }
    if (roots.empty()) {
        return {Verdict::Inconclusive, true};
    }
    return {Verdict::Stable, true};
}

StabilityReport find_roots(const FracPoly& p, const RootFindConfig& cfg) {
    cfg.validate();
    const auto work = normalize(p).poly;
    if (work.size() < 2) {
        throw InvalidArgument("find_roots: need at least two terms");
    }
    StabilityReport report;
    report.residual_bound = residual_threshold(work, cfg);
    report.search_radius = cfg.search_radius.value_or(1.05 * root_bound(work));
    if (auto roots = commensurate_roots(p, cfg)) {
        report.roots = std::move(*roots);
        report.method = RootMethod::Commensurate;
    } else {
        report.roots = newton_grid_impl(p, work, cfg, report.search_radius);
        report.method = RootMethod::NewtonGrid;
    }
    const auto cls = classify_stability(report.roots, report.method, cfg.stability_margin);
    report.verdict = cls.verdict;
    report.coverage_caveat = cls.coverage_caveat;
    return report;
}

} // namespace fracreg
