#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "common.hpp"
#include "mip_model.hpp"

namespace fsmvrp::lp {

enum class Status { optimal, infeasible, unbounded, time_limit, iteration_limit };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
        case Status::time_limit: return "time_limit";
        case Status::iteration_limit: return "iteration_limit";
    }
    return "?";
}

struct Result {
    Status status = Status::infeasible;
    double objective = 0.0;
    std::vector<double> values;
    long iterations = 0;
};

// Snapshot of a simplex basis. Rows appended after the snapshot was taken
// enter with their logical variable basic.
struct Basis {
    std::vector<int> head;
    std::vector<std::int8_t> state;
    // Dual pricing weights per basis position; optional.
    std::vector<double> edge;
};

struct Options {
    double feasibility_tol = 1e-7;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-9;
    int refactor_interval = 100;
    // Non-improving iterations before switching to Bland's rule.
    int stall_limit = 60;
    // Relative cost perturbation used by uncapped dual phases; 0 disables.
    double dual_perturbation = 1e-5;
};

// Bounded-variable primal simplex over a Model's rows (integrality ignored).
//
// Every row i becomes a_i x + s_i = b_i with a logical s_i bounded by the row
// sense. A basis may be primal infeasible at any time (after bound changes,
// appended rows or a restored parent basis): phase 1 then minimises the sum of
// bound violations of the basic variables before phase 2 resumes with the
// true costs. Pricing is Dantzig's rule with a Harris two-pass ratio test;
// after `stall_limit` non-improving pivots both choices fall back to Bland's
// smallest-index rule until progress resumes.
//
// The basis inverse is a sparse LU factorisation of B (Eigen::SparseLU) times
// an eta file of product-form updates, refactorised every
// `refactor_interval` pivots.
class Simplex {
public:
    explicit Simplex(const Model& model, Options options = {}) : opt_(options) {
        n_ = model.num_variables();
        cols_.resize(n_);
        lo_.reserve(n_ + model.num_constraints());
        hi_.reserve(n_ + model.num_constraints());
        cost_.reserve(n_ + model.num_constraints());
        for (std::size_t j = 0; j < n_; ++j) {
            const auto& v = model.variable(static_cast<int>(j));
            lo_.push_back(v.lower);
            hi_.push_back(v.upper);
            cost_.push_back(v.objective);
        }
        for (const auto& c : model.constraints()) append_row(c.row, c.sense, c.rhs);
        state_.assign(n_ + m_, kBasic);
        x_.assign(n_ + m_, 0.0);
        reset_to_slack_basis();
    }

    std::size_t num_structural() const { return n_; }
    std::size_t num_rows() const { return m_; }
    long iterations() const { return iterations_; }

    double lower(int j) const { return lo_[static_cast<std::size_t>(j)]; }
    double upper(int j) const { return hi_[static_cast<std::size_t>(j)]; }

    void set_bounds(int var, double lo, double hi) {
        const auto j = static_cast<std::size_t>(var);
        lo_[j] = lo;
        hi_[j] = hi;
        if (state_[j] != kBasic) {
            state_[j] = resting_state(j, state_[j]);
            x_[j] = resting_value(j);
        }
        xb_dirty_ = true;
    }

    int add_row(std::span<const Term> row, Sense sense, double rhs) {
        append_row(row, sense, rhs);
        const std::size_t logical = n_ + m_ - 1;
        state_.push_back(kBasic);
        x_.push_back(0.0);
        head_.push_back(static_cast<int>(logical));
        pos_.push_back(static_cast<int>(m_ - 1));
        need_refactor_ = true;
        return static_cast<int>(m_ - 1);
    }

    Basis basis() const { return {head_, state_, edge_}; }

    // Full solver state that can be restored without refactorising as long as
    // no refactorisation or row addition happened in between.
    struct Snapshot {
        std::vector<int> head;
        std::vector<std::int8_t> state;
        std::vector<double> x;
        std::vector<double> edge;
        std::size_t etas = 0;
        long factorizations = 0;
        std::size_t rows = 0;
        Status status = Status::infeasible;
        double objective = 0.0;
    };

    Snapshot snapshot() const {
        return {head_, state_, x_, edge_, etas_.size(), factorizations_, m_, status_, objective_};
    }

    // Bounds are not part of the snapshot; callers restore them first.
    void restore(const Snapshot& snap) {
        if (snap.rows != m_) throw ModelError("snapshot taken before rows were added");
        const bool same_factor = snap.factorizations == factorizations_ && snap.etas <= etas_.size() && !need_refactor_;
        head_ = snap.head;
        state_ = snap.state;
        x_ = snap.x;
        edge_ = snap.edge;
        for (std::size_t j = 0; j < n_ + m_; ++j) pos_[j] = -1;
        for (std::size_t i = 0; i < m_; ++i) pos_[static_cast<std::size_t>(head_[i])] = static_cast<int>(i);
        status_ = snap.status;
        objective_ = snap.objective;
        xb_dirty_ = false;
        if (same_factor) {
            etas_.resize(snap.etas);
        } else if (!refactor()) {
            reset_to_slack_basis();
        }
    }

    double limit_bound() const { return limit_bound_; }

    // Reduced cost of each structural variable; zero for basic ones.
    std::vector<double> structural_reduced_costs() const {
        auto d = reduced_costs();
        d.resize(n_);
        return d;
    }

    bool at_lower(int j) const { return state_[static_cast<std::size_t>(j)] == kAtLower; }
    bool at_upper(int j) const { return state_[static_cast<std::size_t>(j)] == kAtUpper; }

    void load_basis(const Basis& basis) {
        if (basis.head.size() > m_ || basis.state.size() > n_ + m_) {
            reset_to_slack_basis();
            return;
        }
        head_ = basis.head;
        state_.assign(basis.state.begin(), basis.state.end());
        edge_ = basis.edge.size() == basis.head.size() ? basis.edge : std::vector<double>(basis.head.size(), 1.0);
        edge_.resize(m_, 1.0);
        for (std::size_t i = basis.head.size(); i < m_; ++i) {
            head_.push_back(static_cast<int>(n_ + i));
        }
        state_.resize(n_ + m_, kBasic);
        pos_.assign(n_ + m_, -1);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto h = static_cast<std::size_t>(head_[i]);
            state_[h] = kBasic;
            pos_[h] = static_cast<int>(i);
        }
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (state_[j] == kBasic && pos_[j] < 0) state_[j] = kAtLower;
            if (state_[j] != kBasic) {
                state_[j] = resting_state(j, state_[j]);
                x_[j] = resting_value(j);
            }
        }
        need_refactor_ = true;
    }

    // A negative `max_iterations` means no limit. When the limit stops the dual
    // phase, `limit_bound()` is a valid lower bound on the LP optimum.
    Status solve(const Deadline* deadline = nullptr, long max_iterations = -1) {
        bland_ = false;
        limit_bound_ = -kInfinity;
        iteration_cap_ = max_iterations < 0 ? std::numeric_limits<long>::max() : iterations_ + max_iterations;
        // Short limited solves keep the factorisation so a snapshot stays cheap to restore.
        refactor_at_ = opt_.refactor_interval + static_cast<int>(std::clamp<long>(max_iterations, 0, opt_.refactor_interval));
        int verifications = 0;
        int numerical_retries = 0;
        long stalled = 0;
        double best_progress = kInfinity;
        bool last_phase1 = true;
        if (need_refactor_) {
            if (!refactor()) reset_to_slack_basis();
            compute_basic_values();
        } else if (xb_dirty_) {
            compute_basic_values();
        }
        switch (dual_phase(deadline)) {
            case DualOutcome::infeasible: return finish(Status::infeasible);
            case DualOutcome::time_limit: return finish(Status::time_limit);
            case DualOutcome::iteration_limit:
                limit_bound_ = current_objective();
                return finish(Status::iteration_limit);
            default: break;
        }
        std::vector<double> cb(m_), pi(m_), alpha(m_), column(m_);
        for (;;) {
            if (deadline && (iterations_ & 15) == 0 && deadline->expired()) return finish(Status::time_limit);
            if (iterations_ >= iteration_cap_) return finish(Status::iteration_limit);

            double infeasibility = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const auto b = static_cast<std::size_t>(head_[i]);
                const double x = x_[b];
                if (x < lo_[b] - opt_.feasibility_tol) {
                    cb[i] = -1.0;
                    infeasibility += lo_[b] - x;
                } else if (x > hi_[b] + opt_.feasibility_tol) {
                    cb[i] = 1.0;
                    infeasibility += x - hi_[b];
                } else {
                    cb[i] = 0.0;
                }
            }
            const bool phase1 = infeasibility > 0.0;
            if (phase1 != last_phase1) {
                stalled = 0;
                best_progress = kInfinity;
                bland_ = false;
                last_phase1 = phase1;
            }
            if (!phase1) {
                for (std::size_t i = 0; i < m_; ++i) cb[i] = cost_[static_cast<std::size_t>(head_[i])];
            }
            const double progress = phase1 ? infeasibility : current_objective();
            if (progress < best_progress - 1e-12 * std::max(1.0, std::abs(progress))) {
                best_progress = progress;
                stalled = 0;
                bland_ = false;
            } else if (++stalled > opt_.stall_limit) {
                bland_ = true;
            }

            pi = cb;
            btran(pi);

            // Pricing.
            int entering = -1;
            double entering_dir = 0.0;
            double best_score = 0.0;
            for (std::size_t j = 0; j < n_ + m_; ++j) {
                const std::int8_t s = state_[j];
                if (s == kBasic || lo_[j] == hi_[j]) continue;
                double d = phase1 ? 0.0 : cost_[j];
                if (j < n_) {
                    for (const auto& [row, a] : cols_[j]) d -= pi[static_cast<std::size_t>(row)] * a;
                } else {
                    d -= pi[j - n_];
                }
                double dir = 0.0;
                if (s == kAtLower && d < -opt_.optimality_tol) {
                    dir = 1.0;
                } else if (s == kAtUpper && d > opt_.optimality_tol) {
                    dir = -1.0;
                } else if (s == kAtZero && std::abs(d) > opt_.optimality_tol) {
                    dir = d < 0.0 ? 1.0 : -1.0;
                }
                if (dir == 0.0) continue;
                if (bland_) {
                    entering = static_cast<int>(j);
                    entering_dir = dir;
                    break;
                }
                if (std::abs(d) > best_score) {
                    best_score = std::abs(d);
                    entering = static_cast<int>(j);
                    entering_dir = dir;
                }
            }

            if (entering < 0) {
                // Confirm on a fresh factorisation before declaring a verdict.
                if (!etas_.empty() && verifications < 3) {
                    ++verifications;
                    if (!refactor()) reset_to_slack_basis();
                    compute_basic_values();
                    continue;
                }
                return finish(phase1 ? Status::infeasible : Status::optimal);
            }

            const auto q = static_cast<std::size_t>(entering);
            load_column(q, column);
            alpha = column;
            ftran(alpha);

            // Ratio test. delta_i is the rate of change of basic i per unit step.
            const double harris = bland_ ? 0.0 : opt_.feasibility_tol;
            double theta_max = kInfinity;
            for (std::size_t i = 0; i < m_; ++i) {
                if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
                const double ratio = blocking_ratio(i, -entering_dir * alpha[i], harris);
                theta_max = std::min(theta_max, ratio);
            }
            int leaving = -1;
            double leaving_ratio = kInfinity;
            double best_pivot = 0.0;
            if (theta_max < kInfinity) {
                for (std::size_t i = 0; i < m_; ++i) {
                    if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
                    const double ratio = blocking_ratio(i, -entering_dir * alpha[i], 0.0);
                    if (ratio > theta_max + (bland_ ? 1e-12 : 0.0)) continue;
                    bool better;
                    if (bland_) {
                        better = leaving < 0 || ratio < leaving_ratio - 1e-12 ||
                                 (ratio <= leaving_ratio + 1e-12 && head_[i] < head_[static_cast<std::size_t>(leaving)]);
                    } else {
                        better = std::abs(alpha[i]) > best_pivot;
                    }
                    if (better) {
                        leaving = static_cast<int>(i);
                        leaving_ratio = ratio;
                        best_pivot = std::abs(alpha[i]);
                    }
                }
            }
            const double flip = hi_[q] - lo_[q];
            double theta = leaving >= 0 ? std::max(0.0, leaving_ratio) : kInfinity;
            const bool bound_flip = std::isfinite(flip) && flip <= theta;
            if (bound_flip) theta = flip;
            if (!std::isfinite(theta)) {
                if (!phase1) return finish(Status::unbounded);
                // A phase-1 ray cannot exist in exact arithmetic.
                if (++numerical_retries > 3) return finish(Status::infeasible);
                if (!refactor()) reset_to_slack_basis();
                compute_basic_values();
                continue;
            }

            ++iterations_;
            if (deadline) deadline->clock().tick();
            x_[q] += entering_dir * theta;
            for (std::size_t i = 0; i < m_; ++i) {
                if (alpha[i] != 0.0) x_[static_cast<std::size_t>(head_[i])] -= entering_dir * alpha[i] * theta;
            }
            if (bound_flip) {
                state_[q] = entering_dir > 0 ? kAtUpper : kAtLower;
                x_[q] = entering_dir > 0 ? hi_[q] : lo_[q];
                continue;
            }
            const auto r = static_cast<std::size_t>(leaving);
            const auto out = static_cast<std::size_t>(head_[r]);
            const double delta = -entering_dir * alpha[r];
            std::int8_t out_state;
            const double x_out_before = x_[out] + delta * (-theta);
            if (delta < 0.0) {
                out_state = x_out_before > hi_[out] + opt_.feasibility_tol ? kAtUpper : kAtLower;
            } else {
                out_state = x_out_before < lo_[out] - opt_.feasibility_tol ? kAtLower : kAtUpper;
            }
            if (lo_[out] == hi_[out]) out_state = kAtLower;
            if (out_state == kAtLower && !std::isfinite(lo_[out])) out_state = kAtUpper;
            if (out_state == kAtUpper && !std::isfinite(hi_[out])) out_state = kAtLower;
            state_[out] = out_state;
            x_[out] = out_state == kAtLower ? lo_[out] : hi_[out];
            pos_[out] = -1;
            head_[r] = static_cast<int>(q);
            pos_[q] = static_cast<int>(r);
            state_[q] = kBasic;
            push_eta(r, alpha);
            if (static_cast<int>(etas_.size()) >= refactor_at_) {
                if (!refactor()) reset_to_slack_basis();
                compute_basic_values();
            }
        }
    }

    Result result() const {
        return {status_, objective_, std::vector<double>(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_)), iterations_};
    }

    Status status() const { return status_; }
    double objective() const { return objective_; }
    double value(int j) const { return x_[static_cast<std::size_t>(j)]; }
    std::vector<double> values() const { return {x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_)}; }

private:
    static constexpr std::int8_t kBasic = 0;
    static constexpr std::int8_t kAtLower = 1;
    static constexpr std::int8_t kAtUpper = 2;
    static constexpr std::int8_t kAtZero = 3;

    struct Eta {
        std::size_t row;
        double pivot;
        std::vector<std::pair<std::size_t, double>> entries;
    };

    struct Breakpoint {
        double ratio;
        double slack;
        std::size_t var;
    };

    enum class DualOutcome { primal_feasible, not_applicable, infeasible, time_limit, iteration_limit };

    // Reduced costs of all nonbasic variables for the current basis.
    std::vector<double> reduced_costs() const { return reduced_costs(cost_); }

    std::vector<double> reduced_costs(const std::vector<double>& cost) const {
        std::vector<double> pi(m_), d(n_ + m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) pi[i] = cost[static_cast<std::size_t>(head_[i])];
        btran(pi);
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (state_[j] == kBasic) continue;
            d[j] = cost[j] - row_product(pi, j);
        }
        return d;
    }

    double row_product(const std::vector<double>& rho, std::size_t j) const {
        if (j >= n_) return rho[j - n_];
        double sum = 0.0;
        for (const auto& [row, a] : cols_[j]) sum += rho[static_cast<std::size_t>(row)] * a;
        return sum;
    }

    // Moves boxed nonbasics to the bound their reduced cost prefers. Returns
    // false when an unboxed nonbasic has the wrong sign.
    bool make_dual_feasible(const std::vector<double>& d) {
        const double tol = opt_.optimality_tol * 100.0;
        bool moved = false;
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            const std::int8_t s = state_[j];
            if (s == kBasic || lo_[j] == hi_[j]) continue;
            const bool boxed = std::isfinite(lo_[j]) && std::isfinite(hi_[j]);
            if (s == kAtLower && d[j] < -tol) {
                if (!boxed) return false;
                state_[j] = kAtUpper;
            } else if (s == kAtUpper && d[j] > tol) {
                if (!boxed) return false;
                state_[j] = kAtLower;
            } else if (s == kAtZero && std::abs(d[j]) > tol) {
                return false;
            } else {
                continue;
            }
            x_[j] = resting_value(j);
            moved = true;
        }
        if (moved) compute_basic_values();
        return true;
    }

    // Bounded dual simplex from a dual feasible basis until the basic values
    // are within their bounds. The primal loop then confirms optimality.
    DualOutcome dual_phase(const Deadline* deadline) {
        if (m_ == 0) return DualOutcome::primal_feasible;
        std::vector<double> d = reduced_costs();
        if (!make_dual_feasible(d)) return DualOutcome::not_applicable;
        // Widening the reduced costs of nonbasics breaks dual degeneracy. The
        // primal loop afterwards restores optimality for the true costs. A
        // capped solve keeps the true costs so its objective stays a bound.
        std::vector<double> dual_cost = cost_;
        if (opt_.dual_perturbation > 0.0 && iteration_cap_ == std::numeric_limits<long>::max()) {
            std::mt19937_64 rng(n_ + m_);
            std::uniform_real_distribution<double> spread(1.0, 2.0);
            for (std::size_t j = 0; j < n_; ++j) {
                const double eps = opt_.dual_perturbation * (1.0 + std::abs(cost_[j])) * spread(rng);
                if (state_[j] == kAtLower) dual_cost[j] += eps;
                if (state_[j] == kAtUpper) dual_cost[j] -= eps;
            }
            d = reduced_costs(dual_cost);
        }
        const double tol = opt_.feasibility_tol;
        const long limit = 20 * static_cast<long>(n_ + m_) + 1000;
        std::vector<double> rho(m_), alpha_col(m_), shift(m_), tau(m_), row(n_ + m_, 0.0);
        edge_.resize(m_, 1.0);
        std::vector<Breakpoint> candidates;
        bool verified = false;
        for (long it = 0; it < limit; ++it) {
            if (deadline && (iterations_ & 15) == 0 && deadline->expired()) return DualOutcome::time_limit;
            if (iterations_ >= iteration_cap_) return DualOutcome::iteration_limit;
            // Dual steepest edge: largest squared infeasibility per weight.
            int leaving = -1;
            double worst = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const auto b = static_cast<std::size_t>(head_[i]);
                const double v = std::max(lo_[b] - x_[b], x_[b] - hi_[b]);
                if (v <= tol) continue;
                const double score = v * v / edge_[i];
                if (score > worst) {
                    worst = score;
                    leaving = static_cast<int>(i);
                }
            }
            if (leaving < 0) return DualOutcome::primal_feasible;
            const auto r = static_cast<std::size_t>(leaving);
            const auto out = static_cast<std::size_t>(head_[r]);
            const bool below = x_[out] < lo_[out];
            const double s = below ? 1.0 : -1.0;

            std::fill(rho.begin(), rho.end(), 0.0);
            rho[r] = 1.0;
            btran(rho);

            // Entering j must push x_out towards its violated bound: x_out
            // moves by -alpha_j per unit increase of x_j. Boxed candidates
            // whose breakpoint is passed while x_out stays infeasible are
            // flipped to their opposite bound instead of entering.
            candidates.clear();
            for (std::size_t j = 0; j < n_ + m_; ++j) {
                row[j] = 0.0;
                const std::int8_t st = state_[j];
                if (st == kBasic || lo_[j] == hi_[j]) continue;
                const double a = row_product(rho, j);
                row[j] = a;
                if (std::abs(a) <= opt_.pivot_tol) continue;
                const double push = -s * a;
                double slack;
                if (st == kAtLower && push > 0.0) {
                    slack = std::max(0.0, d[j]);
                } else if (st == kAtUpper && push < 0.0) {
                    slack = std::max(0.0, -d[j]);
                } else if (st == kAtZero) {
                    slack = std::abs(d[j]);
                } else {
                    continue;
                }
                candidates.push_back({slack / std::abs(a), slack, j});
            }
            std::sort(candidates.begin(), candidates.end(),
                      [](const Breakpoint& x, const Breakpoint& y) { return x.ratio < y.ratio || (x.ratio == y.ratio && x.var < y.var); });
            double slope = below ? lo_[out] - x_[out] : x_[out] - hi_[out];
            std::size_t first = 0;
            for (; first < candidates.size(); ++first) {
                const std::size_t j = candidates[first].var;
                const double range = hi_[j] - lo_[j];
                if (!std::isfinite(range)) break;
                const double drop = std::abs(row[j]) * range;
                if (slope - drop <= tol) break;
                slope -= drop;
            }
            int entering = -1;
            if (first < candidates.size()) {
                double theta_max = kInfinity;
                for (std::size_t k = first; k < candidates.size(); ++k) {
                    const auto& c = candidates[k];
                    theta_max = std::min(theta_max, (c.slack + opt_.optimality_tol) / std::abs(row[c.var]));
                }
                double best_pivot = 0.0;
                for (std::size_t k = first; k < candidates.size() && candidates[k].ratio <= theta_max; ++k) {
                    const std::size_t j = candidates[k].var;
                    if (std::abs(row[j]) > best_pivot) {
                        best_pivot = std::abs(row[j]);
                        entering = static_cast<int>(j);
                    }
                }
            }
            if (entering < 0) {
                if (verified) return DualOutcome::infeasible;
                verified = true;
                if (!refactor()) {
                    reset_to_slack_basis();
                    return DualOutcome::not_applicable;
                }
                compute_basic_values();
                d = reduced_costs(dual_cost);
                if (!make_dual_feasible(d)) return DualOutcome::not_applicable;
                continue;
            }
            verified = false;
            const auto q = static_cast<std::size_t>(entering);
            load_column(q, alpha_col);
            ftran(alpha_col);
            if (std::abs(alpha_col[r] - row[q]) > 1e-6 * (1.0 + std::abs(row[q])) || std::abs(alpha_col[r]) <= opt_.pivot_tol) {
                if (etas_.empty()) return DualOutcome::not_applicable;
                if (!refactor()) {
                    reset_to_slack_basis();
                    return DualOutcome::not_applicable;
                }
                compute_basic_values();
                d = reduced_costs(dual_cost);
                if (!make_dual_feasible(d)) return DualOutcome::not_applicable;
                continue;
            }

            ++iterations_;
            if (deadline) deadline->clock().tick();
            if (first > 0) {
                std::fill(shift.begin(), shift.end(), 0.0);
                for (std::size_t k = 0; k < first; ++k) {
                    const std::size_t j = candidates[k].var;
                    const double before = x_[j];
                    state_[j] = state_[j] == kAtLower ? kAtUpper : kAtLower;
                    x_[j] = resting_value(j);
                    const double change = x_[j] - before;
                    if (j < n_) {
                        for (const auto& [i, a] : cols_[j]) shift[static_cast<std::size_t>(i)] += a * change;
                    } else {
                        shift[j - n_] += change;
                    }
                }
                ftran(shift);
                for (std::size_t i = 0; i < m_; ++i) {
                    if (shift[i] != 0.0) x_[static_cast<std::size_t>(head_[i])] -= shift[i];
                }
            }
            const double bound = below ? lo_[out] : hi_[out];
            const double step = (x_[out] - bound) / alpha_col[r];
            x_[q] += step;
            for (std::size_t i = 0; i < m_; ++i) {
                if (alpha_col[i] != 0.0) x_[static_cast<std::size_t>(head_[i])] -= alpha_col[i] * step;
            }
            update_edge_weights(r, alpha_col, rho, tau);
            const double theta_d = d[q] / row[q];
            for (std::size_t j = 0; j < n_ + m_; ++j) {
                if (state_[j] != kBasic && row[j] != 0.0) d[j] -= theta_d * row[j];
            }
            d[q] = 0.0;
            d[out] = -theta_d;
            state_[out] = below ? kAtLower : kAtUpper;
            if (lo_[out] == hi_[out]) state_[out] = kAtLower;
            x_[out] = bound;
            pos_[out] = -1;
            head_[r] = static_cast<int>(q);
            pos_[q] = static_cast<int>(r);
            state_[q] = kBasic;
            push_eta(r, alpha_col);
            if (static_cast<int>(etas_.size()) >= refactor_at_) {
                if (!refactor()) {
                    reset_to_slack_basis();
                    return DualOutcome::not_applicable;
                }
                compute_basic_values();
                d = reduced_costs(dual_cost);
                if (!make_dual_feasible(d)) return DualOutcome::not_applicable;
            }
        }
        return DualOutcome::not_applicable;
    }

    // Updates the dual steepest-edge weights for a pivot on row r with column
    // alpha; rho holds row r of the basis inverse.
    void update_edge_weights(std::size_t r, const std::vector<double>& alpha, const std::vector<double>& rho, std::vector<double>& tau) {
        double rho_norm = 0.0;
        for (double v : rho) rho_norm += v * v;
        tau = rho;
        ftran(tau);
        const double ar = alpha[r];
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r || alpha[i] == 0.0) continue;
            const double ratio = alpha[i] / ar;
            edge_[i] = std::max(edge_[i] - 2.0 * ratio * tau[i] + ratio * ratio * rho_norm, 1e-4);
        }
        edge_[r] = std::max(rho_norm / (ar * ar), 1e-4);
    }

    void append_row(std::span<const Term> row, Sense sense, double rhs) {
        const int r = static_cast<int>(m_);
        for (const auto& t : row) {
            if (t.coef != 0.0) cols_[static_cast<std::size_t>(t.var)].emplace_back(r, t.coef);
        }
        b_.push_back(rhs);
        switch (sense) {
            case Sense::less_equal:
                lo_.push_back(0.0);
                hi_.push_back(kInfinity);
                break;
            case Sense::greater_equal:
                lo_.push_back(-kInfinity);
                hi_.push_back(0.0);
                break;
            case Sense::equal:
                lo_.push_back(0.0);
                hi_.push_back(0.0);
                break;
        }
        cost_.push_back(0.0);
        ++m_;
    }

    std::int8_t resting_state(std::size_t j, std::int8_t preferred) const {
        const bool has_lo = std::isfinite(lo_[j]);
        const bool has_hi = std::isfinite(hi_[j]);
        if (preferred == kAtUpper && has_hi) return kAtUpper;
        if (has_lo) return kAtLower;
        if (has_hi) return kAtUpper;
        return kAtZero;
    }

    double resting_value(std::size_t j) const {
        switch (state_[j]) {
            case kAtLower: return lo_[j];
            case kAtUpper: return hi_[j];
            default: return 0.0;
        }
    }

    void reset_to_slack_basis() {
        edge_.assign(m_, 1.0);
        head_.resize(m_);
        pos_.assign(n_ + m_, -1);
        for (std::size_t j = 0; j < n_; ++j) {
            state_[j] = resting_state(j, kAtLower);
            x_[j] = resting_value(j);
        }
        for (std::size_t i = 0; i < m_; ++i) {
            head_[i] = static_cast<int>(n_ + i);
            pos_[n_ + i] = static_cast<int>(i);
            state_[n_ + i] = kBasic;
        }
        need_refactor_ = true;
        refactor();
        compute_basic_values();
    }

    bool refactor() {
        etas_.clear();
        need_refactor_ = false;
        if (m_ == 0) return true;
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(m_ * 3);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto h = static_cast<std::size_t>(head_[i]);
            if (h < n_) {
                for (const auto& [row, a] : cols_[h]) triplets.emplace_back(row, static_cast<int>(i), a);
            } else {
                triplets.emplace_back(static_cast<int>(h - n_), static_cast<int>(i), 1.0);
            }
        }
        basis_matrix_.resize(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
        basis_matrix_.setFromTriplets(triplets.begin(), triplets.end());
        basis_matrix_.makeCompressed();
        lu_.analyzePattern(basis_matrix_);
        lu_.factorize(basis_matrix_);
        ++factorizations_;
        return lu_.info() == Eigen::Success;
    }

    void load_column(std::size_t j, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        if (j < n_) {
            for (const auto& [row, a] : cols_[j]) out[static_cast<std::size_t>(row)] = a;
        } else {
            out[j - n_] = 1.0;
        }
    }

    void ftran(std::vector<double>& v) const {
        if (m_ == 0) return;
        Eigen::Map<Eigen::VectorXd> map(v.data(), static_cast<Eigen::Index>(m_));
        solve_buffer_ = lu_.solve(map);
        map = solve_buffer_;
        for (const auto& eta : etas_) {
            const double t = v[eta.row] / eta.pivot;
            if (t != 0.0) {
                for (const auto& [i, a] : eta.entries) v[i] -= a * t;
            }
            v[eta.row] = t;
        }
    }

    void btran(std::vector<double>& v) const {
        if (m_ == 0) return;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double sum = v[it->row];
            for (const auto& [i, a] : it->entries) sum -= v[i] * a;
            v[it->row] = sum / it->pivot;
        }
        Eigen::Map<Eigen::VectorXd> map(v.data(), static_cast<Eigen::Index>(m_));
        solve_buffer_ = lu_.transpose().solve(map);
        map = solve_buffer_;
    }

    void push_eta(std::size_t r, const std::vector<double>& alpha) {
        Eta eta{r, alpha[r], {}};
        for (std::size_t i = 0; i < m_; ++i) {
            if (i != r && alpha[i] != 0.0) eta.entries.emplace_back(i, alpha[i]);
        }
        etas_.push_back(std::move(eta));
    }

    void compute_basic_values() {
        xb_dirty_ = false;
        if (m_ == 0) return;
        std::vector<double> rhs = b_;
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (state_[j] == kBasic || x_[j] == 0.0) continue;
            if (j < n_) {
                for (const auto& [row, a] : cols_[j]) rhs[static_cast<std::size_t>(row)] -= a * x_[j];
            } else {
                rhs[j - n_] -= x_[j];
            }
        }
        ftran(rhs);
        for (std::size_t i = 0; i < m_; ++i) x_[static_cast<std::size_t>(head_[i])] = rhs[i];
    }

    // Largest step before basic i hits the bound it moves towards, or kInfinity.
    // An infeasible basic blocks where it regains feasibility.
    double blocking_ratio(std::size_t i, double delta, double slack) const {
        const auto b = static_cast<std::size_t>(head_[i]);
        const double x = x_[b];
        const double tol = opt_.feasibility_tol;
        if (delta < 0.0) {
            if (x > hi_[b] + tol) return (x - hi_[b] + slack) / -delta;
            if (x >= lo_[b] - tol && std::isfinite(lo_[b])) return std::max(0.0, x - lo_[b] + slack) / -delta;
            return kInfinity;
        }
        if (x < lo_[b] - tol) return (lo_[b] - x + slack) / delta;
        if (x <= hi_[b] + tol && std::isfinite(hi_[b])) return std::max(0.0, hi_[b] - x + slack) / delta;
        return kInfinity;
    }

    double current_objective() const {
        double sum = 0.0;
        for (std::size_t j = 0; j < n_; ++j) sum += cost_[j] * x_[j];
        return sum;
    }

    Status finish(Status s) {
        status_ = s;
        objective_ = current_objective();
        return s;
    }

    Options opt_;
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> b_;
    std::vector<double> lo_, hi_, cost_;
    std::vector<double> x_;
    std::vector<std::int8_t> state_;
    std::vector<int> head_;
    std::vector<int> pos_;

    Eigen::SparseMatrix<double> basis_matrix_;
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    mutable Eigen::VectorXd solve_buffer_;
    std::vector<Eta> etas_;
    std::vector<double> edge_;
    bool need_refactor_ = true;
    bool xb_dirty_ = true;
    bool bland_ = false;
    long iterations_ = 0;
    long factorizations_ = 0;
    Status status_ = Status::infeasible;
    long iteration_cap_ = std::numeric_limits<long>::max();
    int refactor_at_ = 0;
    double limit_bound_ = -kInfinity;
    double objective_ = 0.0;
};

// One-shot LP solve of a model's relaxation.
inline Result solve_lp(const Model& model, const Deadline* deadline = nullptr, Options options = {}) {
    if (model.num_variables() == 0) throw ModelError("LP has no variables");
    Simplex simplex(model, options);
    simplex.solve(deadline);
    return simplex.result();
}

}  // namespace fsmvrp::lp
