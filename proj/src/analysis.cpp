#include "swq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "swq/linalg.hpp"
#include "swq/rng.hpp"

namespace swq {

TrafficSolution traffic_solve(const NetworkSpec& spec) {
    const size_t K = spec.n_classes();
    const size_t J = spec.n_queues();
    // lambda = a + lambda P  <=>  (I - P)^T lambda^T = a^T
    std::vector<double> A(K * K, 0.0);
    for (size_t r = 0; r < K; ++r)
        for (size_t c = 0; c < K; ++c)
            A[r * K + c] = (r == c ? 1.0 : 0.0) - spec.routing[c][r];
    std::vector<double> x = spec.arrival_rate;
    if (!linalg::lu_solve(A, x, K))
        throw std::runtime_error("traffic_solve: I - P is singular; network is not open");

    TrafficSolution out;
    out.lambda = x;
    out.rho_class.resize(K);
    for (size_t k = 0; k < K; ++k) out.rho_class[k] = x[k] / spec.service_p[k];
    out.rho_queue.assign(J, 0.0);
    for (size_t k = 0; k < K; ++k) out.rho_queue[spec.class_queue[k]] += out.rho_class[k];

    out.residual = 0.0;
    for (size_t k = 0; k < K; ++k) {
        double rhs = spec.arrival_rate[k];
        for (size_t k2 = 0; k2 < K; ++k2) rhs += x[k2] * spec.routing[k2][k];
        out.residual = std::max(out.residual, std::fabs(x[k] - rhs));
    }

    if (spec.schedule_set.form == ScheduleForm::ResourceConstrained) {
        out.r_rho = 0.0;
        for (const auto& row : spec.schedule_set.rows) {
            double load = 0.0;
            for (size_t i = 0; i < row.support.size(); ++i)
                load += row.coeff[i] * out.rho_queue[row.support[i]];
            out.r_rho = std::max(out.r_rho, load / row.bound);
        }
    } else {
        out.r_rho = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

SubcritReport subcritical_check(const NetworkSpec& spec, const TrafficSolution& traffic,
                                size_t lp_point_limit) {
    SubcritReport rep;
    double r;  // reciprocal of the max feasible scale
    if (spec.schedule_set.form == ScheduleForm::ResourceConstrained) {
        rep.route = "constraints";
        r = traffic.r_rho;
        rep.scale = r > 0.0 ? 1.0 / r : std::numeric_limits<double>::infinity();
    } else {
        rep.route = "hull_lp";
        if (spec.schedule_set.schedules.size() > lp_point_limit)
            throw std::runtime_error("subcritical_check: explicit set too large for the hull LP");
        std::vector<std::vector<double>> pts;
        pts.reserve(spec.schedule_set.schedules.size());
        for (const auto& s : spec.schedule_set.schedules) {
            std::vector<double> p(s.size());
            for (size_t j = 0; j < s.size(); ++j) p[j] = static_cast<double>(s[j]);
            pts.push_back(std::move(p));
        }
        rep.scale = linalg::hull_scale(pts, traffic.rho_queue);
        r = rep.scale > 0.0 ? 1.0 / rep.scale : std::numeric_limits<double>::infinity();
    }
    rep.margin = 1.0 - r;
    rep.eps_feasible = rep.scale - 1.0;
    constexpr double kBoundaryTol = 1e-9;
    if (rep.margin > kBoundaryTol)
        rep.status = Criticality::Interior;
    else if (rep.margin < -kBoundaryTol)
        rep.status = Criticality::Supercritical;
    else
        rep.status = Criticality::Boundary;
    return rep;
}

namespace {

std::string frac_detail(const std::string& rel, const Rational& lhs, const Rational& rhs) {
    return lhs.str() + " (" + std::to_string(lhs.to_double()) + ") " + rel + " " + rhs.str() +
           " (" + std::to_string(rhs.to_double()) + ")";
}

}  // namespace

ConditionReport instability_conditions(InstabilityKind kind, const Rational& a, int64_t nu,
                                     int64_t J) {
    if (nu <= 0 || J <= 0) throw std::invalid_argument("instability_conditions: nu, J >= 1");
    ConditionReport rep;
    const Rational one(1);
    const Rational rnu(nu), rJ(J);

    bool shape = (1 < nu) && (nu < J);
    rep.items.push_back({"component shape", "1 < " + std::to_string(nu) + " < " + std::to_string(J),
                         shape});

    if (kind == InstabilityKind::MaxWeight) {
        rep.a_lower = rJ / Rational(2 * J - nu);
        rep.a_upper = one - (rJ + rnu) * (rJ + rnu * rnu) / (rnu * (rJ * rJ + rJ + rnu * rnu));
        rep.gamma_max = a / (one - a + a * rnu / rJ);
    } else {
        rep.a_lower = rJ / Rational(2 * J - 1);
        rep.a_upper = one - (rJ + one) * (rJ + rnu) / (rnu * rJ * rJ + rJ + rnu);
        rep.gamma_max = a / (one - a + a / rJ);
    }
    rep.r_rho = a * (one + one / rnu);

    rep.items.push_back({"arrival rate above lower bound", frac_detail("<", rep.a_lower, a),
                         rep.a_lower < a});
    rep.items.push_back({"arrival rate below upper bound", frac_detail("<", a, rep.a_upper),
                         a < rep.a_upper});
    rep.items.push_back({"subcritical load", frac_detail("<", rep.r_rho, one), rep.r_rho < one});
    rep.items.push_back({"growth window nonempty", frac_detail("<", one, rep.gamma_max),
                         one < rep.gamma_max});

    rep.all_pass = std::all_of(rep.items.begin(), rep.items.end(),
                               [](const ConditionReport::Item& it) { return it.pass; });
    return rep;
}

CycleScan detect_cycles(const Trajectory& traj, const ComponentTags& tags, int64_t nu,
                        double a, bool primed) {
    CycleScan scan;
    const size_t n = traj.t.size();
    const size_t J = tags.a_spread.size();
    if (J == 0 || tags.b_spread.size() != J || tags.a0 < 0 || tags.b0 < 0)
        throw std::invalid_argument("detect_cycles: incomplete component tags");
    if (n == 0) {
        scan.diagnostic = "empty trajectory";
        return scan;
    }

    const double mult = primed ? 1.0 : static_cast<double>(nu);
    const double floor_mass = static_cast<double>(nu * nu);
    const double dJ = static_cast<double>(J);
    // Expected spread-out time per unit of starting mass: the receiving hub
    // holds about J/(J+mult) of it and drains it at net rate 1 - a + a*mult/J.
    const double coeff = (dJ / (dJ + mult)) / (1.0 - a + a * mult / dJ);

    auto comp_sum = [&](size_t i, bool compA) {
        const auto& q = traj.qlen[i];
        double s = static_cast<double>(q[compA ? tags.a0 : tags.b0]);
        for (int idx : (compA ? tags.a_spread : tags.b_spread)) s += static_cast<double>(q[idx]);
        return s;
    };
    auto hub = [&](size_t i, bool compA) {
        return static_cast<double>(traj.qlen[i][compA ? tags.a0 : tags.b0]);
    };
    auto max_spread = [&](size_t i, bool compA) {
        double m = 0.0;
        for (int idx : (compA ? tags.a_spread : tags.b_spread))
            m = std::max(m, static_cast<double>(traj.qlen[i][idx]));
        return m;
    };

    bool loadedA = comp_sum(0, true) >= comp_sum(0, false);
    size_t start = 0;
    double M = comp_sum(0, loadedA);
    bool seeking_u = true;
    size_t U = 0;

    for (size_t i = 0; i < n; ++i) {
        if (seeking_u && comp_sum(i, loadedA) <= floor_mass) {
            U = i;
            seeking_u = false;
        }
        if (!seeking_u && hub(i, !loadedA) <= mult * max_spread(i, !loadedA)) {
            double M_next = comp_sum(i, !loadedA);
            if (M > floor_mass) {
                CycleRecord rec;
                rec.start = traj.t[start];
                rec.U = traj.t[U];
                rec.V = traj.t[i];
                rec.component = loadedA ? 'A' : 'B';
                rec.M = M;
                rec.M_next = M_next;
                rec.growth = M_next / M;
                rec.predicted_V = static_cast<double>(traj.t[start]) + coeff * M;
                double gap = 0.0;
                for (int idx : (loadedA ? tags.b_spread : tags.a_spread))
                    gap = std::max(gap, std::fabs(hub(i, !loadedA) -
                                                  mult * static_cast<double>(traj.qlen[i][idx])));
                rec.balance_gap = gap;
                scan.cycles.push_back(rec);
            }
            loadedA = !loadedA;
            start = i;
            M = M_next;
            seeking_u = true;
        }
    }

    if (scan.cycles.empty()) {
        scan.diagnostic = "no complete cycle detected; run longer or check component tags";
    } else {
        double sum = 0.0, logsum = 0.0;
        for (const auto& c : scan.cycles) {
            sum += c.growth;
            logsum += std::log(c.growth);
        }
        scan.mean_growth = sum / static_cast<double>(scan.cycles.size());
        scan.geo_mean_growth = std::exp(logsum / static_cast<double>(scan.cycles.size()));
    }
    return scan;
}

double concentration_pass_rate(double rate, int64_t T, double delta, int trials,
                               uint64_t seed) {
    if (T < 1 || trials < 1 || rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("concentration_pass_rate: bad arguments");
    int passed = 0;
    for (int tr = 0; tr < trials; ++tr) {
        Rng rng(derive_seed(seed, static_cast<uint64_t>(tr)), stream::arrivals);
        double walk = 0.0, lo = 0.0, hi = 0.0;
        for (int64_t t = 0; t < T; ++t) {
            walk += (rng.bernoulli(rate) ? 1.0 : 0.0) - rate;
            lo = std::min(lo, walk);
            hi = std::max(hi, walk);
        }
        // sup over s <= t of |(N(t)-rate t) - (N(s)-rate s)| is the walk's range
        if (hi - lo <= delta * static_cast<double>(T)) ++passed;
    }
    return static_cast<double>(passed) / static_cast<double>(trials);
}

double concentration_pass_rate(const NetworkSpec& spec, int64_t T, double delta, int trials,
                               uint64_t seed) {
    double rate = -1.0;
    if (!spec.dispatch_groups.empty()) {
        const auto& g = spec.dispatch_groups.front();
        rate = g.rate / static_cast<double>(g.members.size());
    } else {
        for (double r : spec.arrival_rate)
            if (r > 0.0) rate = (rate < 0.0) ? r : std::min(rate, r);
    }
    if (rate < 0.0)
        throw std::invalid_argument("concentration_pass_rate: network has no arrival stream");
    return concentration_pass_rate(rate, T, delta, trials, seed);
}

StabilityProxy stability_proxy(const Trajectory& traj) {
    StabilityProxy out;
    const size_t n = traj.t.size();
    out.samples = static_cast<int64_t>(n);
    if (n == 0) return out;

    int64_t empties = 0;
    for (int64_t tot : traj.total)
        if (tot == 0) ++empties;
    out.empty_fraction = static_cast<double>(empties) / static_cast<double>(n);

    double half_sum = 0.0;
    size_t half_start = n / 2;
    for (size_t i = half_start; i < n; ++i) half_sum += static_cast<double>(traj.total[i]);
    out.time_avg_total = half_sum / static_cast<double>(n - half_start);

    // centered least squares on (t, total) over an index range
    auto ols = [&](size_t lo, size_t hi, size_t skip_lo, size_t skip_hi) {
        double mt = 0.0, my = 0.0;
        size_t cnt = 0;
        for (size_t i = lo; i < hi; ++i) {
            if (i >= skip_lo && i < skip_hi) continue;
            mt += static_cast<double>(traj.t[i]);
            my += static_cast<double>(traj.total[i]);
            ++cnt;
        }
        if (cnt < 2) return 0.0;
        mt /= static_cast<double>(cnt);
        my /= static_cast<double>(cnt);
        double sxx = 0.0, sxy = 0.0;
        for (size_t i = lo; i < hi; ++i) {
            if (i >= skip_lo && i < skip_hi) continue;
            double dt = static_cast<double>(traj.t[i]) - mt;
            sxx += dt * dt;
            sxy += dt * (static_cast<double>(traj.total[i]) - my);
        }
        return sxx > 0.0 ? sxy / sxx : 0.0;
    };

    out.drift_slope = ols(0, n, 0, 0);

    constexpr size_t kBlocks = 10;
    if (n >= 2 * kBlocks) {
        // delete-a-block jackknife: OLS standard errors are not trustworthy on
        // autocorrelated queue paths
        double slopes[kBlocks];
        double mean = 0.0;
        for (size_t b = 0; b < kBlocks; ++b) {
            size_t lo = b * n / kBlocks, hi = (b + 1) * n / kBlocks;
            slopes[b] = ols(0, n, lo, hi);
            mean += slopes[b];
        }
        mean /= static_cast<double>(kBlocks);
        double ss = 0.0;
        for (double s : slopes) ss += (s - mean) * (s - mean);
        out.drift_slope_se =
            std::sqrt(ss * static_cast<double>(kBlocks - 1) / static_cast<double>(kBlocks));
    } else {
        out.drift_slope_se = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace swq
