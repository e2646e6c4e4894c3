#include "driftlab/contraction.hpp"

#include <algorithm>
#include <cmath>

#include "driftlab/rng.hpp"

namespace driftlab::contraction {

namespace {

Vec box_point(const Box& b, const rng::Key& key, std::uint64_t stream, std::uint64_t counter) {
    Vec x(b.dim());
    for (int c = 0; c < b.dim(); ++c)
        x(c) = b.lo(c) +
               (b.hi(c) - b.lo(c)) * rng::uniform01(key, stream, counter, static_cast<std::uint64_t>(c));
    return x;
}

Vec unit_direction(int d, const rng::Key& key, std::uint64_t stream, std::uint64_t counter) {
    Vec u(d);
    for (int c = 0; c < d; ++c) u(c) = rng::normal(key, stream, counter, static_cast<std::uint64_t>(c));
    const double n = u.norm();
    if (n == 0) {
        u.setZero();
        u(0) = 1;
        return u;
    }
    return u / n;
}

double pair_rate(const DriftField& f, const Vec& x, const Vec& y) {
    const Vec d = x - y;
    const double n2 = d.squaredNorm();
    if (n2 == 0) return -std::numeric_limits<double>::infinity();
    return (f(0.0, x) - f(0.0, y)).dot(d) / n2;
}

double symmetric_abscissa(const Mat& J) {
    const Mat s = 0.5 * (J + J.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    return es.eigenvalues().maxCoeff();
}

constexpr double kDeltas[3] = {1e-3, 1e-2, 1e-1};

}  // namespace

Mat fd_jacobian(const DriftField& f, const Vec& x, double h) {
    const int d = f.dim();
    Mat J(d, d);
    Vec xp = x, xm = x, fp(d), fm(d);
    for (int c = 0; c < d; ++c) {
        xp(c) = x(c) + h;
        xm(c) = x(c) - h;
        f.eval_into(0.0, xp, fp);
        f.eval_into(0.0, xm, fm);
        J.col(c) = (fp - fm) / (2.0 * h);
        xp(c) = x(c);
        xm(c) = x(c);
    }
    return J;
}

ContractionReport estimate_one_sided_rate(const DriftField& f, const Box& region, int n_pairs,
                                          std::uint64_t seed,
                                          const std::optional<ExclusionBall>& exclusion) {
    if (n_pairs < 100)
        throw std::invalid_argument("estimate_one_sided_rate: need at least 100 pairs");
    if (region.dim() != f.dim())
        throw std::invalid_argument("estimate_one_sided_rate: region/field dimension mismatch");
    if (exclusion && !(exclusion->radius > 0))
        throw std::invalid_argument("estimate_one_sided_rate: exclusion radius must be > 0");

    const auto key = rng::derive(seed, rng::Purpose::pairs);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    double sup_out = neg_inf, sup_in = neg_inf;
    auto outside = [&](const Vec& p) {
        return !exclusion || (p - exclusion->center).norm() > exclusion->radius;
    };
    auto record = [&](const Vec& x, const Vec& y, double rate) {
        if (outside(x) && outside(y))
            sup_out = std::max(sup_out, rate);
        else
            sup_in = std::max(sup_in, rate);
    };

    for (int i = 0; i < n_pairs; ++i) {
        const auto s = static_cast<std::uint64_t>(i);
        const Vec x = box_point(region, key, s, 0);
        Vec y;
        if (i % 4 == 0) {
            y = box_point(region, key, s, 1);
        } else {
            y = x + kDeltas[i % 4 - 1] * unit_direction(f.dim(), key, s, 2);
        }
        record(x, y, pair_rate(f, x, y));
        // vanishing-separation limit at x
        record(x, x, symmetric_abscissa(fd_jacobian(f, x)));
    }

    ContractionReport rep{0.0, region, n_pairs, Classification::unclassified, {}, {}, {}, {}, {}};
    rep.global_rate_estimate = std::max(sup_out, sup_in);
    if (exclusion) {
        rep.r = exclusion->radius;
        rep.rate_outside = sup_out;
        rep.rate_inside = sup_in;
        if (sup_out < 0) {
            rep.classification = Classification::br_contracting;
            rep.c = -sup_out;
            rep.lambda = sup_in;
        }
    } else if (rep.global_rate_estimate < 0) {
        rep.classification = Classification::globally_contracting;
        rep.c = -rep.global_rate_estimate;
    }
    return rep;
}

DiffusionEstimate estimate_diffusion_constants(const DiffusionField& G, const Box& region,
                                               int n_pairs, std::uint64_t seed) {
    if (n_pairs < 100)
        throw std::invalid_argument("estimate_diffusion_constants: need at least 100 pairs");
    if (region.dim() != G.dim_state())
        throw std::invalid_argument("estimate_diffusion_constants: region/field dimension mismatch");
    const auto key = rng::derive(seed, rng::Purpose::pairs);
    DiffusionEstimate est;
    Mat gx, gy;
    for (int i = 0; i < n_pairs; ++i) {
        const auto s = static_cast<std::uint64_t>(i);
        const Vec x = box_point(region, key, s, 0);
        Vec y;
        if (i % 4 == 0)
            y = box_point(region, key, s, 1);
        else
            y = x + kDeltas[i % 4 - 1] * unit_direction(region.dim(), key, s, 2);
        G.eval_into(0.0, x, gx);
        G.eval_into(0.0, y, gy);
        const double dx = (x - y).norm();
        if (dx > 0) {
            const double ratio = (gx - gy).norm() / dx;
            est.plain = std::max(est.plain, ratio);
            est.squared_convention = std::max(est.squared_convention, ratio * ratio);
        }
        est.frobenius_sup = std::max({est.frobenius_sup, gx.norm(), gy.norm()});
    }
    return est;
}

EquilibriaResult find_equilibria(const DriftField& f, const Box& region, int n_starts,
                                 double root_tol, std::uint64_t seed) {
    if (f.time_dependent())
        throw std::invalid_argument("find_equilibria: drift must be autonomous");
    if (n_starts < 1) throw std::invalid_argument("find_equilibria: need at least one start");
    if (region.dim() != f.dim())
        throw std::invalid_argument("find_equilibria: region/field dimension mismatch");

    const auto key = rng::derive(seed, rng::Purpose::starts);
    const int d = f.dim();
    EquilibriaResult out;
    const double dedup = 1e-6;
    int converged = 0;

    for (int s = 0; s < n_starts; ++s) {
        Vec x = box_point(region, key, static_cast<std::uint64_t>(s), 0);
        bool ok = false;
        Vec fx = f(0.0, x);
        for (int it = 0; it < 100; ++it) {
            if (fx.norm() <= root_tol) {
                ok = true;
                break;
            }
            const Mat J = fd_jacobian(f, x);
            const Vec step = J.fullPivLu().solve(-fx);
            if (!step.allFinite()) break;
            // backtracking damping on the residual norm
            double alpha = 1.0;
            bool improved = false;
            for (int half = 0; half < 30; ++half) {
                const Vec cand = x + alpha * step;
                const Vec fc = f(0.0, cand);
                if (fc.norm() < fx.norm()) {
                    x = cand;
                    fx = fc;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!improved) break;
        }
        if (!ok) continue;
        ++converged;
        bool inside = true;
        for (int c = 0; c < d; ++c)
            inside = inside && x(c) >= region.lo(c) - 1e-9 && x(c) <= region.hi(c) + 1e-9;
        if (!inside) continue;
        bool duplicate = false;
        for (const auto& r : out.records)
            if ((r.x_star - x).norm() <= dedup) {
                duplicate = true;
                break;
            }
        if (duplicate) continue;
        EquilibriumRecord rec;
        rec.x_star = x;
        Eigen::EigenSolver<Mat> es(fd_jacobian(f, x));
        rec.jacobian_spectrum_abscissa = es.eigenvalues().real().maxCoeff();
        rec.stable = rec.jacobian_spectrum_abscissa < 0;
        out.records.push_back(std::move(rec));
    }
    if (converged == 0)
        out.warning = "no Newton start converged to tolerance " + std::to_string(root_tol);
    std::sort(out.records.begin(), out.records.end(),
              [](const EquilibriumRecord& a, const EquilibriumRecord& b) {
                  for (int c = 0; c < a.x_star.size(); ++c) {
                      if (a.x_star(c) != b.x_star(c)) return a.x_star(c) < b.x_star(c);
                  }
                  return false;
              });
    return out;
}

LocalBall local_contraction_ball(const DriftField& f, const Vec& x_star, double r_max,
                                 int n_pairs, std::uint64_t seed, double equilibrium_tol) {
    if (!(r_max > 0)) throw std::invalid_argument("local_contraction_ball: r_max must be > 0");
    if (n_pairs < 100)
        throw std::invalid_argument("local_contraction_ball: need at least 100 pairs");
    if (f(0.0, x_star).norm() > equilibrium_tol)
        throw std::invalid_argument("local_contraction_ball: x_star is not an equilibrium "
                                    "within tolerance");

    const auto key = rng::derive(seed, rng::Purpose::pairs);
    const int d = f.dim();

    // sup pair rate over B_r(x_star): uniform-in-ball pairs, small-separation
    // pairs kept inside the ball, and Jacobian abscissas at the samples
    auto rate_in_ball = [&](double r) {
        double sup = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_pairs; ++i) {
            const auto s = static_cast<std::uint64_t>(i);
            Vec u = unit_direction(d, key, s, 0);
            const double rad =
                r * std::pow(rng::uniform01(key, s, 1, 0), 1.0 / d);
            const Vec x = x_star + rad * u;
            Vec y;
            if (i % 4 == 0) {
                Vec v = unit_direction(d, key, s, 2);
                y = x_star + r * std::pow(rng::uniform01(key, s, 3, 0), 1.0 / d) * v;
            } else {
                const double room = std::min(kDeltas[i % 4 - 1] * r, r - rad);
                y = x + std::max(room, 1e-9 * r) * unit_direction(d, key, s, 2);
            }
            sup = std::max(sup, pair_rate(f, x, y));
            sup = std::max(sup, symmetric_abscissa(fd_jacobian(f, x)));
        }
        return sup;
    };

    // bisection over a dyadic radius grid for the largest contracting radius
    const int grid_n = 64;
    int lo = 0, hi = grid_n + 1;  // radii r_max * j / grid_n; lo contracting, hi not
    if (rate_in_ball(r_max) < 0) {
        lo = grid_n;
    } else {
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            if (mid == 0) break;
            (rate_in_ball(r_max * mid / grid_n) < 0 ? lo : hi) = mid;
        }
    }
    LocalBall out;
    if (lo == 0) return out;  // not locally contracting at the smallest tested radius
    out.contracting = true;
    out.r_star = r_max * lo / grid_n;
    out.c_star = -rate_in_ball(out.r_star);
    return out;
}

}  // namespace driftlab::contraction
