#include "coopstab/equilibria.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "coopstab/order.hpp"

namespace coopstab {

std::string to_string(Stability s) {
    switch (s) {
        case Stability::AsymptoticallyStable: return "asymptotically_stable";
        case Stability::Unstable: return "unstable";
        case Stability::Marginal: return "marginal";
    }
    return "?";
}

double EquilibriumRecord::max_real_eigenvalue() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eigenvalues) m = std::max(m, ev.real());
    return m;
}

double decay_rate_product(const GriffithParams& p) {
    double phi = 1.0;
    for (double a : p.alphas) phi *= a;
    return phi;
}

double hill_ratio(double m, double z) {
    if (!(z > 0.0)) throw std::invalid_argument("hill_ratio: z must be positive");
    return hill_response(m, z) / z;
}

double hill_ratio_deriv(double m, double z) {
    if (!(z > 0.0)) throw std::invalid_argument("hill_ratio_deriv: z must be positive");
    return (z * hill_response_deriv(m, z) - hill_response(m, z)) / (z * z);
}

double hill_ratio_peak_arg(double m) {
    if (!(m > 1.0)) throw std::invalid_argument("hill_ratio_peak_arg: needs m > 1");
    return std::pow(m - 1.0, 1.0 / m);
}

double hill_ratio_peak(double m) { return hill_ratio(m, hill_ratio_peak_arg(m)); }

namespace {

/// Bisection for hill_ratio(z) = phi on [lo, hi] (the ratio is monotone on
/// each side of the peak), followed by Newton polish on f(z) - phi z.
double refine_root(double m, double phi, double lo, double hi) {
    auto g = [&](double z) { return hill_ratio(m, z) - phi; };
    double glo = g(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double num = hill_response(m, z) - phi * z;
        const double den = hill_response_deriv(m, z) - phi;
        if (den == 0.0) break;
        const double next = z - num / den;
        if (!(next > 0.0)) break;
        z = next;
    }
    return z;
}

}  // namespace

std::vector<double> hill_ratio_roots(double m, double phi) {
    if (!(m >= 1.0) || !(phi > 0.0))
        throw std::invalid_argument("hill_ratio_roots: need m >= 1 and phi > 0");
    if (m == 1.0) {
        // ratio = 1 / (1 + z), strictly decreasing from 1
        if (phi >= 1.0) return {};
        return {1.0 / phi - 1.0};
    }
    const double zm = hill_ratio_peak_arg(m);
    const double peak = hill_ratio(m, zm);
    if (phi > peak) return {};
    if (phi == peak) return {zm};

    std::vector<double> roots;
    // Left branch: ratio increases from 0 at z -> 0+ up to the peak.
    roots.push_back(refine_root(m, phi, 1e-12, zm));
    // Right branch: decreasing; grow the bracket until the sign flips.
    double hi = zm * 2.0;
    while (hill_ratio(m, hi) > phi) {
        hi *= 2.0;
        if (hi > 1e6) break;
    }
    roots.push_back(refine_root(m, phi, zm, hi));
    return roots;
}

std::vector<Vec> SupportPrediction::support_points(const GriffithParams& p) const {
    std::vector<Vec> pts;
    const Vec ray = griffith_ray(p);
    if (origin) pts.push_back(Vec::Zero(p.dim()));
    for (double z : ray_roots) {
        pts.push_back(z * ray);
        pts.push_back(-z * ray);
    }
    return pts;
}

SupportPrediction predict_zero_noise_support(double m, double phi) {
    SupportPrediction pred;
    if (m == 1.0) {
        pred.marginal = phi == 1.0;
        if (phi >= 1.0) {
            pred.regime = "origin";
            pred.origin = true;
        } else {
            pred.regime = "symmetric-pair";
            pred.ray_roots = hill_ratio_roots(m, phi);
        }
        return pred;
    }
    const double peak = hill_ratio_peak(m);
    pred.marginal = phi == peak;
    if (phi >= peak) {
        pred.regime = "origin";
        pred.origin = true;
    } else {
        pred.regime = "origin-and-symmetric-pair";
        pred.origin = true;
        pred.ray_roots = {hill_ratio_roots(m, phi).back()};  // outer root only
    }
    return pred;
}

std::vector<std::complex<double>> jacobian_eigenvalues(const Model& model, const Vec& p) {
    Eigen::EigenSolver<Mat> es(model.jacobian(p));
    std::vector<std::complex<double>> eigs(es.eigenvalues().size());
    for (int i = 0; i < es.eigenvalues().size(); ++i) eigs[i] = es.eigenvalues()[i];
    std::sort(eigs.begin(), eigs.end(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    return eigs;
}

Stability classify_spectrum(const std::vector<std::complex<double>>& eigs, double threshold) {
    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eigs) max_re = std::max(max_re, ev.real());
    if (max_re < -threshold) return Stability::AsymptoticallyStable;
    if (max_re > threshold) return Stability::Unstable;
    return Stability::Marginal;
}

GriffithClassification classify_griffith(const GriffithParams& p) {
    p.validate();
    const Model model = griffith_model(p);
    const Vec ray = griffith_ray(p);
    const double phi = decay_rate_product(p);

    GriffithClassification out;
    out.summary.phi = phi;
    out.summary.m = p.m;
    if (p.m > 1.0) out.summary.phi_m = hill_ratio_peak(p.m);
    out.summary.roots = hill_ratio_roots(p.m, phi);
    out.summary.predicted = predict_zero_noise_support(p.m, phi);

    auto make_record = [&](double z) {
        EquilibriumRecord rec;
        rec.point = z * ray;
        rec.griffith_root = z;
        rec.eigenvalues = jacobian_eigenvalues(model, rec.point);
        rec.classification = classify_spectrum(rec.eigenvalues);
        return rec;
    };

    // Origin: classified by the spectrum alone.
    out.records.push_back(make_record(0.0));

    for (double z : out.summary.roots) {
        for (double s : {1.0, -1.0}) {
            EquilibriumRecord rec = make_record(s * z);
            const double slope = hill_ratio_deriv(p.m, z);
            // the ratio is even, so its slope at -z is the mirror image
            rec.ratio_slope = s > 0 ? slope : -slope;
            // Slope test for the positive root; the mirrored equilibrium
            // behaves identically because the response is odd.
            Stability by_slope = Stability::Marginal;
            if (slope < -1e-12) by_slope = Stability::AsymptoticallyStable;
            else if (slope > 1e-12) by_slope = Stability::Unstable;
            if (by_slope == Stability::Marginal) {
                // tangency: the spectrum is inconclusive (eigenvalue at 0);
                // the monotone-trajectory argument classifies it unstable
                rec.classification = Stability::Marginal;
                rec.note = "tangency root: spectral test inconclusive; "
                           "one-sided analysis gives unstable";
            } else if (rec.classification == Stability::Marginal) {
                rec.classification = by_slope;
                rec.note = "spectral test inconclusive; slope test applied";
            } else if (by_slope != rec.classification) {
                rec.note = "slope/spectrum disagreement: slope says " +
                           to_string(by_slope);
            }
            out.records.push_back(std::move(rec));
        }
    }
    return out;
}

std::vector<Vec> GriffithClassification::stable_set() const {
    std::vector<Vec> s;
    for (const auto& rec : records)
        if (rec.classification == Stability::AsymptoticallyStable) s.push_back(rec.point);
    return s;
}

std::vector<Vec> GriffithClassification::unstable_set() const {
    std::vector<Vec> s;
    for (const auto& rec : records)
        if (rec.classification == Stability::Unstable) s.push_back(rec.point);
    return s;
}

NewtonResult newton_equilibria(const Model& model, const std::vector<Vec>& seeds,
                               const NewtonOptions& opts) {
    NewtonResult out;
    for (const Vec& seed : seeds) {
        Vec x = seed;
        bool ok = false;
        for (int it = 0; it < opts.max_iters; ++it) {
            const Vec b = model.drift(x);
            if (b.lpNorm<Eigen::Infinity>() < opts.tol) {
                ok = true;
                break;
            }
            const Mat j = model.jacobian(x);
            Eigen::FullPivLU<Mat> lu(j);
            if (!lu.isInvertible()) break;
            const Vec step = lu.solve(-b);
            if (!step.allFinite()) break;
            // damping: halve until the residual does not grow
            double lambda = 1.0;
            const double r0 = b.norm();
            Vec next = x + step;
            for (int half = 0; half < 30 && (!next.allFinite() ||
                                             model.drift(next).norm() > r0); ++half) {
                lambda *= 0.5;
                next = x + lambda * step;
            }
            if (!next.allFinite() || model.drift(next).norm() > r0) break;
            x = next;
        }
        if (!ok || !x.allFinite()) {
            out.failed_seeds.push_back(seed);
            continue;
        }
        bool duplicate = false;
        for (const auto& rec : out.records)
            if ((rec.point - x).lpNorm<Eigen::Infinity>() < opts.dedup_tol) {
                duplicate = true;
                break;
            }
        if (duplicate) continue;
        EquilibriumRecord rec;
        rec.point = x;
        rec.eigenvalues = jacobian_eigenvalues(model, x);
        rec.classification = classify_spectrum(rec.eigenvalues, opts.eig_threshold);
        out.records.push_back(std::move(rec));
    }
    return out;
}

std::vector<EquilibriumArc> detect_stationary_arc(const std::vector<EquilibriumRecord>& records,
                                                  double tol) {
    std::vector<EquilibriumArc> arcs;
    if (records.empty()) return arcs;
    std::vector<EquilibriumRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.point.sum() < b.point.sum();  // linear extension of <<
    });
    EquilibriumArc current;
    current.chain.push_back(sorted.front());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const Vec& prev = current.chain.back().point;
        const Vec& next = sorted[i].point;
        if (strongly_less(prev, next) && (next - prev).norm() < tol) {
            current.chain.push_back(sorted[i]);
        } else {
            arcs.push_back(std::move(current));
            current = EquilibriumArc{};
            current.chain.push_back(sorted[i]);
        }
    }
    arcs.push_back(std::move(current));
    return arcs;
}

}  // namespace coopstab
