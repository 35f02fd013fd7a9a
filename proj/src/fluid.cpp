#include "swq/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "swq/analysis.hpp"

namespace swq {

FluidIntegrator::FluidIntegrator(const NetworkSpec& spec, const std::vector<double>& weights,
                                 double dt)
    : spec_(&spec), weights_(weights), dt_(dt), eng_(spec.schedule_set, spec.n_queues()) {
    if (dt <= 0.0) throw std::invalid_argument("fluid: dt must be positive");
    if (!spec.single_class())
        throw std::invalid_argument("fluid: single-class networks only");
    const size_t J = spec.n_queues();
    if (weights_.empty()) weights_.assign(J, 1.0);
    if (weights_.size() != J) throw std::invalid_argument("fluid: weight vector length mismatch");
    TrafficSolution ts = traffic_solve(spec);
    lambda_.resize(J);
    rho_.resize(J);
    for (size_t j = 0; j < J; ++j) {
        int k = spec.queue_classes[j][0];
        lambda_[j] = ts.lambda[k];
        rho_[j] = ts.rho_class[k];
    }
    // fastest possible total drain: every constraint row worked on its
    // cheapest queue at full service probability
    double max_drain = 0.0;
    if (spec.schedule_set.form == ScheduleForm::ResourceConstrained) {
        for (const auto& row : spec.schedule_set.rows) {
            double best = 0.0;
            for (size_t i = 0; i < row.support.size(); ++i)
                best = std::max(best, spec.service_p[spec.queue_classes[row.support[i]][0]] *
                                          row.bound / row.coeff[i]);
            max_drain += best;
        }
    } else {
        for (const auto& s : spec.schedule_set.schedules) {
            double tot = 0.0;
            for (size_t j = 0; j < J; ++j)
                tot += spec.service_p[spec.queue_classes[j][0]] * static_cast<double>(s[j]);
            max_drain = std::max(max_drain, tot);
        }
    }
    // One winner-take-all step can leave a step's worth of drain in flight at
    // each queue, so anything below n_queues steps of maximum drain is a
    // discretization floor rather than real mass.
    empty_threshold_ = dt_ * std::max(max_drain, 1.0) * static_cast<double>(J);
    v_.resize(J);
    sigma_.resize(J);
    inflow_.resize(J);
}

FluidState FluidIntegrator::initial(const std::vector<double>& q0) const {
    const size_t J = spec_->n_queues();
    if (q0.size() != J) throw std::invalid_argument("fluid: initial vector length mismatch");
    FluidState s;
    s.q = q0;
    s.arr.assign(J, 0.0);
    s.dep.assign(J, 0.0);
    s.alloc.assign(J, 0.0);
    s.rate.assign(J, 0.0);
    s.drain.assign(J, 0.0);
    return s;
}

void FluidIntegrator::rates(FluidState& s) const {
    const size_t J = spec_->n_queues();
    for (size_t j = 0; j < J; ++j) v_[j] = weights_[j] * s.q[j];
    sigma_ = eng_.continuous_argmax(v_);
    for (size_t j = 0; j < J; ++j) {
        int k = spec_->queue_classes[j][0];
        s.rate[j] = spec_->service_p[k] * sigma_[j];
        s.drain[j] = std::min(s.rate[j], s.q[j] / dt_);
    }
}

void FluidIntegrator::step(FluidState& s) const {
    const size_t J = spec_->n_queues();
    rates(s);
    for (size_t j = 0; j < J; ++j) {
        int kj = spec_->queue_classes[j][0];
        double in = spec_->arrival_rate[kj];
        for (size_t j2 = 0; j2 < J; ++j2) {
            int k2 = spec_->queue_classes[j2][0];
            in += s.drain[j2] * spec_->routing[k2][kj];
        }
        inflow_[j] = in;
    }
    for (size_t j = 0; j < J; ++j) {
        s.q[j] = std::max(0.0, s.q[j] + dt_ * (inflow_[j] - s.drain[j]));
        s.arr[j] += dt_ * inflow_[j];
        s.dep[j] += dt_ * s.drain[j];
        s.alloc[j] += dt_ * sigma_[j];
    }
    s.t += dt_;
}

LyapunovReading FluidIntegrator::read(const FluidState& s, double prev_h) const {
    LyapunovReading r;
    r.t = s.t;
    r.g = std::accumulate(s.q.begin(), s.q.end(), 0.0);
    const size_t J = spec_->n_queues();
    std::vector<double> v(J);
    for (size_t j = 0; j < J; ++j) {
        if (s.q[j] > 0.0 && rho_[j] <= 0.0)
            throw std::runtime_error("fluid: queue " + spec_->queue_ids[j] +
                                     " holds mass but has zero traffic rate");
        v[j] = rho_[j] > 0.0 ? s.q[j] / rho_[j] : 0.0;
    }
    r.h = eng_.continuous_max_value(v) - r.g;
    r.f = 0.0;
    for (size_t j = 0; j < J; ++j)
        if (lambda_[j] > 0.0) r.f += s.q[j] * s.rate[j] / lambda_[j];
    double rho_mass = 0.0;
    for (size_t j = 0; j < J; ++j) rho_mass += s.q[j] * rho_[j];
    r.g_branch = eng_.continuous_max_value(s.q) - rho_mass;
    r.left_slope = (r.h - prev_h) / dt_;
    return r;
}

FluidState fluid_step(const FluidState& s, const NetworkSpec& spec,
                      const std::vector<double>& weights, double dt) {
    FluidIntegrator integ(spec, weights, dt);
    FluidState out = s;
    integ.step(out);
    return out;
}

FluidRun fluid_run(const NetworkSpec& spec, const std::vector<double>& weights,
                   const std::vector<double>& q0, double dt, double t_max,
                   int64_t record_every) {
    if (t_max <= 0.0) throw std::invalid_argument("fluid_run: t_max must be positive");
    if (record_every < 1) throw std::invalid_argument("fluid_run: record_every must be >= 1");
    double mass0 = std::accumulate(q0.begin(), q0.end(), 0.0);
    if (mass0 > 1.0 + 1e-9)
        throw std::invalid_argument("fluid_run: initial mass must be at most 1");

    FluidIntegrator integ(spec, weights, dt);
    FluidRun run;
    run.dt = dt;
    run.empty_threshold = integ.empty_threshold();

    FluidState s = integ.initial(q0);
    LyapunovReading r0 = integ.read(s, 0.0);
    r0.left_slope = 0.0;
    run.readings.push_back(r0);
    run.states.push_back(s);

    double prev_h = r0.h;
    const int64_t steps = static_cast<int64_t>(std::ceil(t_max / dt));
    for (int64_t i = 1; i <= steps; ++i) {
        double mass = std::accumulate(s.q.begin(), s.q.end(), 0.0);
        if (mass < run.empty_threshold) {
            run.emptied = true;
            run.empty_time = s.t;
            break;
        }
        integ.step(s);
        LyapunovReading r = integ.read(s, prev_h);
        prev_h = r.h;
        run.readings.push_back(r);
        if (i % record_every == 0) run.states.push_back(s);
    }
    run.final_state = s;
    if (run.states.empty() || run.states.back().t != s.t) run.states.push_back(s);
    return run;
}

double lyapunov_eval(const FluidState& s, const NetworkSpec& spec,
                     const std::vector<double>& lambda, LyapunovFn which) {
    if (!spec.single_class()) throw std::invalid_argument("lyapunov_eval: single-class only");
    const size_t J = spec.n_queues();
    if (s.q.size() != J || lambda.size() != J)
        throw std::invalid_argument("lyapunov_eval: dimension mismatch");
    ArgmaxEngine eng(spec.schedule_set, J);
    std::vector<double> rho(J);
    for (size_t j = 0; j < J; ++j) {
        rho[j] = lambda[j] / spec.service_p[spec.queue_classes[j][0]];
        if (s.q[j] > 0.0 && lambda[j] <= 0.0)
            throw std::runtime_error("lyapunov_eval: queue " + spec.queue_ids[j] +
                                     " holds mass but has zero traffic rate");
    }
    double g = std::accumulate(s.q.begin(), s.q.end(), 0.0);
    switch (which) {
        case LyapunovFn::G:
            return g;
        case LyapunovFn::H: {
            std::vector<double> v(J);
            for (size_t j = 0; j < J; ++j) v[j] = rho[j] > 0.0 ? s.q[j] / rho[j] : 0.0;
            return eng.continuous_max_value(v) - g;
        }
        case LyapunovFn::F: {
            double f = 0.0;
            for (size_t j = 0; j < J; ++j)
                if (lambda[j] > 0.0) f += s.q[j] * s.rate[j] / lambda[j];
            return f;
        }
        case LyapunovFn::GBranch: {
            double rho_mass = 0.0;
            for (size_t j = 0; j < J; ++j) rho_mass += s.q[j] * rho[j];
            return eng.continuous_max_value(s.q) - rho_mass;
        }
    }
    throw std::logic_error("lyapunov_eval: unknown monitor");
}

std::vector<double> make_rho_weights(const NetworkSpec& spec) {
    if (!spec.single_class())
        throw std::invalid_argument("make_rho_weights: single-class only");
    TrafficSolution ts = traffic_solve(spec);
    std::vector<double> w(spec.n_queues());
    for (size_t j = 0; j < spec.n_queues(); ++j) {
        double rho = ts.rho_queue[j];
        if (rho <= 0.0)
            throw std::runtime_error("make_rho_weights: queue " + spec.queue_ids[j] +
                                     " has zero load; 1/rho weight undefined");
        w[j] = 1.0 / rho;
    }
    return w;
}

CertificateReport decay_certificate(const FluidRun& run, LyapunovFn which, double bound,
                                    double window) {
    CertificateReport rep;
    rep.monitored = which == LyapunovFn::GBranch ? "g_branch" : "h";
    rep.bound = bound;
    rep.window = window;
    rep.emptied = run.emptied;
    rep.empty_time = run.empty_time;

    const auto& rd = run.readings;
    auto value = [&](size_t i) {
        switch (which) {
            case LyapunovFn::H: return rd[i].h;
            case LyapunovFn::F: return rd[i].f;
            case LyapunovFn::G: return rd[i].g;
            case LyapunovFn::GBranch: return rd[i].g_branch;
        }
        return 0.0;
    };
    if (rd.size() < 2) {
        rep.pass = false;
        return rep;
    }

    size_t w = std::max<size_t>(1, static_cast<size_t>(std::llround(window / run.dt)));
    // First pass: collect windowed slopes.  The tolerance scales with the
    // largest windowed rate rather than per-step increments, which spike under
    // schedule chatter without moving the window averages.
    std::vector<double> slopes;
    bool any = false;
    for (size_t i = 0; i + w < rd.size(); ++i) {
        // only judge intervals on which mass genuinely remains
        if (rd[i + w].g < run.empty_threshold) break;
        double slope = (value(i + w) - value(i)) / (static_cast<double>(w) * run.dt);
        slopes.push_back(slope);
        if (!any || slope > rep.worst_slope) {
            rep.worst_slope = slope;
            rep.worst_interval_start = rd[i].t;
            rep.worst_interval_end = rd[i + w].t;
        }
        any = true;
    }
    double rate_scale = 0.0;
    for (double s : slopes) rate_scale = std::max(rate_scale, std::fabs(s));
    rep.tolerance = 10.0 * run.dt * rate_scale;

    rep.pass = any;
    for (double s : slopes)
        if (s > -bound + rep.tolerance) rep.pass = false;
    return rep;
}

}  // namespace swq
