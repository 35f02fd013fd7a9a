#include "swq/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "swq/kernels.hpp"

namespace swq {

namespace {

// Fixed-order objective so schedule comparisons are identical across SIMD
// backends (the kernel dot may reassociate).
double objective(const std::vector<int64_t>& sigma, const std::vector<double>& v) {
    double acc = 0.0;
    for (size_t j = 0; j < sigma.size(); ++j) acc += v[j] * static_cast<double>(sigma[j]);
    return acc;
}

bool lex_less(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

ArgmaxEngine::ArgmaxEngine(const ScheduleSet& set, size_t n_queues) : set_(&set), n_(n_queues) {
    if (set.form == ScheduleForm::ResourceConstrained) {
        for (const auto& row : set.rows) {
            RowCache rc;
            rc.support = row.support;
            rc.coeff = row.coeff;
            rc.units_i = row.max_units;
            rc.bound = row.bound;
            rc.harmonic = row.harmonic;
            for (int64_t u : row.max_units) rc.units.push_back(static_cast<double>(u));
            rows_.push_back(std::move(rc));
        }
        size_t max_supp = 0;
        for (const auto& r : rows_) max_supp = std::max(max_supp, r.support.size());
        scratch_v_.resize(max_supp);
    }
}

void ArgmaxEngine::row_argmax_exact(const RowCache& row, const std::vector<double>& v,
                                    TieBreak tie, Rng* tie_rng,
                                    std::vector<int64_t>& out) const {
    const size_t m = row.support.size();
    if (m == 0) return;

    if (row.harmonic) {
        // Whole budget on the queue maximizing v_j * m_j: for any feasible
        // integer sigma, sum v_j sigma_j = sum (v_j m_j)(c_j sigma_j / bound)
        // <= max_j v_j m_j, so a single-queue allocation is exact.
        for (size_t i = 0; i < m; ++i) scratch_v_[i] = v[row.support[i]];
        size_t win = simd::wargmax(scratch_v_.data(), row.units.data(), m);
        double best = scratch_v_[win] * row.units[win];
        if (best <= 0.0) return;  // nothing worth serving on this row
        if (tie == TieBreak::SeededRandom && tie_rng) {
            // uniform choice among queues attaining the max density
            size_t ties = 0;
            for (size_t i = 0; i < m; ++i)
                if (scratch_v_[i] * row.units[i] == best) ++ties;
            if (ties > 1) {
                uint64_t pick = tie_rng->uniform_int(ties);
                for (size_t i = 0; i < m; ++i) {
                    if (scratch_v_[i] * row.units[i] == best && pick-- == 0) {
                        win = i;
                        break;
                    }
                }
            }
        }
        out[row.support[win]] += row.units_i[win];
        return;
    }

    // Exact branch and bound over the support (small: the only non-harmonic
    // built-in row has two queues).  Deterministic: supports scanned in
    // density order, first-found optimum kept, strict improvement only.
    struct Item {
        double v, c, dens;
        int queue;
    };
    std::vector<Item> items;
    for (size_t i = 0; i < m; ++i) {
        double vv = v[row.support[i]];
        if (vv > 0.0) items.push_back({vv, row.coeff[i], vv / row.coeff[i], row.support[i]});
    }
    if (items.empty()) return;
    std::stable_sort(items.begin(), items.end(),
                     [](const Item& a, const Item& b) { return a.dens > b.dens; });

    std::vector<int64_t> cur(items.size(), 0), best_alloc;
    double best_val = 0.0;
    auto dfs = [&](auto&& self, size_t idx, double budget, double val) -> void {
        if (idx == items.size()) {
            if (val > best_val) {
                best_val = val;
                best_alloc = cur;
            }
            return;
        }
        if (val + budget * items[idx].dens < best_val) return;  // LP bound prune
        int64_t maxcnt = static_cast<int64_t>(std::floor(budget / items[idx].c + 1e-9));
        for (int64_t cnt = maxcnt; cnt >= 0; --cnt) {
            cur[idx] = cnt;
            self(self, idx + 1, budget - static_cast<double>(cnt) * items[idx].c,
                 val + static_cast<double>(cnt) * items[idx].v);
        }
        cur[idx] = 0;
    };
    dfs(dfs, 0, row.bound, 0.0);
    if (best_val > 0.0)
        for (size_t i = 0; i < items.size(); ++i) out[items[i].queue] += best_alloc[i];
}

std::vector<int64_t> ArgmaxEngine::integer_argmax(const std::vector<double>& v, TieBreak tie,
                                                  Rng* tie_rng) const {
    std::vector<int64_t> out(n_, 0);
    if (set_->form == ScheduleForm::Explicit) {
        const auto& scheds = set_->schedules;
        double best_val = -1.0;
        size_t best = 0;
        size_t n_tied = 0;
        for (size_t s = 0; s < scheds.size(); ++s) {
            double val = objective(scheds[s], v);
            if (val > best_val) {
                best_val = val;
                best = s;
                n_tied = 1;
            } else if (val == best_val) {
                ++n_tied;
                if (tie == TieBreak::SeededRandom && tie_rng) {
                    // reservoir: replace with probability 1/n_tied
                    if (tie_rng->uniform_int(n_tied) == 0) best = s;
                } else if (lex_less(scheds[s], scheds[best])) {
                    best = s;
                }
            }
        }
        out = scheds[best];
        return out;
    }
    if (!set_->disjoint_supports)
        throw std::invalid_argument(
            "integer argmax needs disjoint constraint supports (or the explicit form)");
    for (const auto& row : rows_) row_argmax_exact(row, v, tie, tie_rng, out);
    return out;
}

std::vector<double> ArgmaxEngine::continuous_argmax(const std::vector<double>& v) const {
    std::vector<double> out(n_, 0.0);
    if (set_->form == ScheduleForm::Explicit) {
        // hull max of a linear objective is attained at one of the points
        auto best = integer_argmax(v, TieBreak::Lexicographic, nullptr);
        for (size_t j = 0; j < n_; ++j) out[j] = static_cast<double>(best[j]);
        return out;
    }
    if (!set_->disjoint_supports)
        throw std::invalid_argument(
            "continuous argmax needs disjoint constraint supports (or the explicit form)");
    for (const auto& row : rows_) {
        const size_t m = row.support.size();
        if (m == 0) continue;
        size_t win = 0;
        double best = -1.0;
        for (size_t i = 0; i < m; ++i) {
            double dens = v[row.support[i]] / row.coeff[i];
            if (dens >= best) {  // largest index on ties, as in the integer path
                best = dens;
                win = i;
            }
        }
        if (best > 0.0) out[row.support[win]] = row.bound / row.coeff[win];
    }
    return out;
}

double ArgmaxEngine::continuous_max_value(const std::vector<double>& v) const {
    if (set_->form == ScheduleForm::Explicit) {
        double best = 0.0;
        for (const auto& s : set_->schedules) best = std::max(best, objective(s, v));
        return best;
    }
    double total = 0.0;
    for (const auto& row : rows_) {
        double best = 0.0;
        for (size_t i = 0; i < row.support.size(); ++i)
            best = std::max(best, v[row.support[i]] / row.coeff[i]);
        total += row.bound * best;
    }
    return total;
}

Schedule max_weight_schedule(const ArgmaxEngine& eng, const std::vector<int64_t>& qlen,
                             const std::vector<double>& weights, TieBreak tie, Rng* tie_rng) {
    const size_t J = eng.n_queues();
    if (qlen.size() != J) throw std::invalid_argument("max_weight: queue vector length mismatch");
    if (!weights.empty() && weights.size() != J)
        throw std::invalid_argument("max_weight: weight vector length mismatch");
    std::vector<double> v(J);
    for (size_t j = 0; j < J; ++j) {
        if (qlen[j] < 0) throw std::invalid_argument("max_weight: negative queue length");
        v[j] = static_cast<double>(qlen[j]) * (weights.empty() ? 1.0 : weights[j]);
    }
    Schedule s;
    s.sigma = eng.integer_argmax(v, tie, tie_rng);
    return s;
}

Schedule back_pressure_schedule(const ArgmaxEngine& eng, const NetworkSpec& spec,
                                const std::vector<int64_t>& qlen, TieBreak tie, Rng* tie_rng) {
    if (!spec.single_class())
        throw std::invalid_argument("back_pressure: single-class network required");
    const size_t J = eng.n_queues();
    std::vector<double> v(J, 0.0);
    for (size_t j = 0; j < J; ++j) {
        int k = spec.queue_classes[j][0];
        double w = static_cast<double>(qlen[j]);
        for (size_t j2 = 0; j2 < J; ++j2) {
            int k2 = spec.queue_classes[j2][0];
            w -= spec.routing[k][k2] * static_cast<double>(qlen[j2]);
        }
        v[j] = std::max(0.0, w);  // nonpositive back-pressure never gets service
    }
    Schedule s;
    s.sigma = eng.integer_argmax(v, tie, tie_rng);
    return s;
}

Schedule largest_class_schedule(const ArgmaxEngine& eng, const NetworkSpec& spec,
                                const std::vector<int64_t>& clen,
                                const std::vector<double>& class_weights, TieBreak tie,
                                Rng* tie_rng) {
    const size_t J = spec.n_queues();
    const size_t K = spec.n_classes();
    if (clen.size() != K) throw std::invalid_argument("largest_class: class vector mismatch");
    if (!class_weights.empty() && class_weights.size() != K)
        throw std::invalid_argument("largest_class: class weight vector mismatch");
    std::vector<double> v(J, 0.0);
    std::vector<int> winner(J, -1);
    for (size_t j = 0; j < J; ++j) {
        for (int k : spec.queue_classes[j]) {
            double w = (class_weights.empty() ? 1.0 : class_weights[k]) *
                       static_cast<double>(clen[k]);
            if (w > v[j]) {  // strict: smallest class index wins ties
                v[j] = w;
                winner[j] = k;
            }
        }
    }
    Schedule s;
    s.sigma = eng.integer_argmax(v, tie, tie_rng);
    s.class_split.emplace(K, 0);
    for (size_t j = 0; j < J; ++j)
        if (s.sigma[j] > 0 && winner[j] >= 0) (*s.class_split)[winner[j]] = s.sigma[j];
    return s;
}

std::vector<double> proportional_fractional(const ArgmaxEngine& eng,
                                            const std::vector<int64_t>& qlen) {
    const auto& set = eng.set();
    if (set.form != ScheduleForm::ResourceConstrained || !set.disjoint_supports)
        throw std::invalid_argument(
            "proportional scheduler needs disjoint resource constraint rows");
    std::vector<double> out(eng.n_queues(), 0.0);
    for (const auto& row : set.rows) {
        double total = 0.0;
        for (int q : row.support) total += static_cast<double>(qlen[q]);
        if (total <= 0.0) continue;
        for (size_t i = 0; i < row.support.size(); ++i) {
            int q = row.support[i];
            if (qlen[q] > 0)
                out[q] = (static_cast<double>(qlen[q]) / total) * row.bound / row.coeff[i];
        }
    }
    return out;
}

Schedule proportional_schedule(const ArgmaxEngine& eng, const std::vector<int64_t>& qlen,
                               Rng& rng) {
    const auto& set = eng.set();
    std::vector<double> frac = proportional_fractional(eng, qlen);
    Schedule s;
    s.sigma.assign(eng.n_queues(), 0);

    for (const auto& row : set.rows) {
        // floors, then pairwise pipage on the fractional cost mass y_i in
        // [0, c_i]; each move preserves expectations and total cost, and fixes
        // at least one entry at 0 (drop) or c_i (grant +1).
        struct Frac {
            int queue;
            double c, y;
        };
        std::vector<Frac> act;
        double used = 0.0;
        for (size_t i = 0; i < row.support.size(); ++i) {
            int q = row.support[i];
            double f = frac[q];
            if (f <= 0.0) continue;
            double fl = std::floor(f + 1e-12);
            s.sigma[q] += static_cast<int64_t>(fl);
            used += fl * row.coeff[i];
            double rem = f - fl;
            if (rem > 1e-12 && rem < 1.0 - 1e-12)
                act.push_back({q, row.coeff[i], rem * row.coeff[i]});
            else if (rem >= 1.0 - 1e-12) {
                s.sigma[q] += 1;
                used += row.coeff[i];
            }
        }
        while (act.size() >= 2) {
            Frac& a = act[0];
            Frac& b = act[1];
            double d1 = std::min(a.c - a.y, b.y);   // push mass b -> a
            double d2 = std::min(a.y, b.c - b.y);   // push mass a -> b
            double p = (d1 + d2 > 0.0) ? d2 / (d1 + d2) : 0.5;
            if (rng.next_double() < p) {
                a.y += d1;
                b.y -= d1;
            } else {
                a.y -= d2;
                b.y += d2;
            }
            for (size_t i = act.size(); i-- > 0;) {
                if (act[i].y <= 1e-12) {
                    act.erase(act.begin() + i);
                } else if (act[i].y >= act[i].c - 1e-12) {
                    s.sigma[act[i].queue] += 1;
                    used += act[i].c;
                    act.erase(act.begin() + i);
                }
            }
        }
        if (act.size() == 1) {
            const Frac& a = act[0];
            if (rng.next_double() < a.y / a.c && used + a.c <= row.bound + 1e-9)
                s.sigma[a.queue] += 1;  // feasibility guard on the last grant
        }
    }
    return s;
}

}  // namespace swq
