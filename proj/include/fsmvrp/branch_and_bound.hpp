#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "common.hpp"
#include "mip_model.hpp"
#include "simplex.hpp"

namespace fsmvrp {

enum class MipStatus {
    optimal,
    // Time limit reached with an incumbent.
    feasible,
    infeasible,
    unbounded,
    // Time limit reached without an incumbent.
    unknown,
};

inline const char* to_string(MipStatus s) {
    switch (s) {
        case MipStatus::optimal: return "optimal";
        case MipStatus::feasible: return "feasible";
        case MipStatus::infeasible: return "infeasible";
        case MipStatus::unbounded: return "unbounded";
        case MipStatus::unknown: return "unknown";
    }
    return "?";
}

// Relative integrality gap (incumbent - bound) / max(|incumbent|, eps).
inline double compute_gap(double incumbent, double bound) {
    if (!std::isfinite(incumbent)) return kInfinity;
    if (!std::isfinite(bound)) return kInfinity;
    return std::max(0.0, incumbent - bound) / std::max(std::abs(incumbent), 1e-10);
}

// Gap of a relaxation against the best known value, relative to the bound.
// Exceeds 1 when the bound is less than half the best value.
inline double compute_root_gap(double best_known, double bound) {
    if (!std::isfinite(best_known) || !std::isfinite(bound)) return kInfinity;
    return std::max(0.0, best_known - bound) / std::max(std::abs(bound), 1e-10);
}

struct BranchingPriorities {
    int usage = 100;
    int type = 50;
    int arc = 0;
};

struct SolveParams {
    double time_limit_s = 900.0;
    double rel_gap_target = 1e-6;
    BranchingPriorities priorities;
    std::uint64_t seed = 0;
    WorkClock::Mode clock = WorkClock::Mode::wall;
    // The root LP may overrun the time limit up to this long, so a bound is
    // always available.
    double min_root_time_s = 0.0;
    double integrality_tol = 1e-6;
    // Stored LP bases are dropped once this many nodes are open.
    std::size_t max_stored_bases = 20000;
};

struct SolveEvent {
    enum class Kind { incumbent, bound };
    Kind kind = Kind::incumbent;
    double time = 0.0;
    long node = 0;
    double value = 0.0;
};

struct MipResult {
    MipStatus status = MipStatus::unknown;
    std::optional<Assignment> incumbent;
    double objective = kInfinity;
    double best_bound = -kInfinity;
    double gap = kInfinity;
    long nodes = 0;
    long lazy_rows_added = 0;
    long lp_iterations = 0;
    double time = 0.0;
    lp::Status root_status = lp::Status::time_limit;
    double root_lp_time = 0.0;
    double root_lp_value = -kInfinity;
    double first_incumbent_time = kInfinity;
    double first_incumbent_value = kInfinity;
    bool warm_started = false;
    std::vector<SolveEvent> events;
};

// Best-bound branch-and-bound with depth-first plunging over the LP
// relaxation of `model`. `priority` overrides the model's branching classes
// when non-empty. Lazy hooks run on every integral LP point; their rows are
// added globally and the node is re-solved.
class BranchAndBound {
public:
    BranchAndBound(const Model& model, SolveParams params, std::vector<int> priority = {})
        : model_(model), params_(params), clock_(params.clock), lp_(model) {
        priority_ = priority.empty() ? default_priorities(model) : std::move(priority);
        for (std::size_t j = 0; j < model.num_variables(); ++j) {
            if (model.variable(static_cast<int>(j)).kind == VarKind::binary) binaries_.push_back(static_cast<int>(j));
            root_lo_.push_back(model.variable(static_cast<int>(j)).lower);
            root_hi_.push_back(model.variable(static_cast<int>(j)).upper);
        }
        down_cost_.resize(model.num_variables());
        up_cost_.resize(model.num_variables());
    }

    // Throws ModelError naming the violated rows when `warm` is not a feasible
    // point of the model.
    void set_warm_start(const Assignment& warm) {
        auto bad = model_.violations(warm.values, 1e-6);
        if (bad.empty()) {
            for (const auto& hook : model_.lazy_hooks()) {
                for (const auto& row : hook(warm.values)) bad.push_back(row.tag);
            }
        }
        if (!bad.empty()) {
            std::string list;
            for (std::size_t i = 0; i < bad.size() && i < 5; ++i) list += (i ? ", " : "") + bad[i];
            if (bad.size() > 5) list += ", ...";
            throw ModelError("invalid warm start: violates " + list);
        }
        Assignment clean = warm;
        for (int j : binaries_) clean[j] = std::round(clean[j]);
        result_.warm_started = true;
        accept(clean, 0);
    }

    MipResult run() {
        Deadline deadline(clock_, params_.time_limit_s);
        open_ = {};
        auto root = std::make_shared<Node>();
        root->bound = -kInfinity;
        root->id = next_id_++;
        std::shared_ptr<Node> current = root;
        bool timed_out = false;
        bool unbounded = false;

        while (true) {
            if (!current) {
                if (open_.empty()) break;
                current = open_.top();
                open_.pop();
            }
            if (current->bound >= cutoff()) {
                note_pruned(current->bound);
                current.reset();
                continue;
            }
            const bool is_root = result_.nodes == 0;
            if (!is_root && deadline.expired()) {
                open_.push(current);
                timed_out = true;
                break;
            }
            double global = std::min(current->bound, pruned_min_);
            if (!open_.empty()) global = std::min(global, open_.top()->bound);
            update_bound(global);
            if (result_.incumbent && gap_closed()) {
                open_.push(current);
                break;
            }

            apply_node(*current);
            ++result_.nodes;
            const Deadline node_deadline =
                is_root ? Deadline(clock_, std::max(deadline.remaining(), params_.min_root_time_s)) : deadline;

            std::shared_ptr<Node> next;
            for (;;) {
                const double t0 = clock_.elapsed();
                const auto st = lp_.solve(&node_deadline);
                if (is_root && result_.root_status == lp::Status::time_limit && result_.lazy_rows_added == 0) {
                    result_.root_status = st;
                    result_.root_lp_time = clock_.elapsed() - t0;
                    if (st == lp::Status::optimal) result_.root_lp_value = lp_.objective();
                }
                if (st == lp::Status::time_limit) {
                    open_.push(current);
                    timed_out = true;
                    break;
                }
                if (st == lp::Status::unbounded) {
                    unbounded = true;
                    break;
                }
                if (st == lp::Status::infeasible) break;
                const double obj = lp_.objective();
                record_pseudocost(*current, obj);
                if (obj >= cutoff()) {
                    note_pruned(obj);
                    break;
                }
                const int branch_var = select_branching_variable(node_deadline);
                const auto values = lp_.values();
                if (branch_var < 0) {
                    auto cuts = separate(values);
                    if (!cuts.empty()) {
                        for (const auto& c : cuts) lp_.add_row(c.row, c.sense, c.rhs);
                        result_.lazy_rows_added += static_cast<long>(cuts.size());
                        continue;
                    }
                    Assignment point{values};
                    for (int j : binaries_) point[j] = std::round(point[j]);
                    accept(point, result_.nodes);
                    break;
                }
                // Branch; both children start from this node's final basis.
                std::shared_ptr<const lp::Basis> basis;
                if (open_.size() < params_.max_stored_bases) basis = std::make_shared<const lp::Basis>(lp_.basis());
                current_basis_ = basis;
                const double f = values[static_cast<std::size_t>(branch_var)];
                if (result_.incumbent) fix_by_reduced_cost(*current, obj);
                auto down = child(*current, obj, basis, {branch_var, root_lo_[static_cast<std::size_t>(branch_var)], 0.0});
                auto up = child(*current, obj, basis, {branch_var, 1.0, root_hi_[static_cast<std::size_t>(branch_var)]});
                down->branch_var = up->branch_var = branch_var;
                down->branch_distance = f - std::floor(f);
                up->branch_distance = std::ceil(f) - f;
                up->branch_up = true;
                if (f >= 0.5) {
                    open_.push(down);
                    next = up;
                } else {
                    open_.push(up);
                    next = down;
                }
                break;
            }
            if (timed_out || unbounded) break;
            current = next;
        }

        result_.lp_iterations = lp_.iterations();
        result_.time = clock_.elapsed();
        if (unbounded) {
            result_.status = MipStatus::unbounded;
            return result_;
        }
        double bound = pruned_min_;
        if (!open_.empty()) {
            // The open queue is ordered by bound; the root may not have a bound yet.
            auto copy = open_;
            while (!copy.empty()) {
                bound = std::min(bound, copy.top()->bound);
                copy.pop();
            }
        }
        if (result_.incumbent) bound = std::min(bound, result_.objective);
        if (timed_out && result_.nodes <= 1 && result_.root_status != lp::Status::optimal) bound = -kInfinity;
        update_bound(bound);
        if (result_.incumbent) {
            result_.gap = compute_gap(result_.objective, result_.best_bound);
            result_.status = (timed_out && !gap_closed()) ? MipStatus::feasible : MipStatus::optimal;
        } else {
            result_.status = timed_out ? MipStatus::unknown : MipStatus::infeasible;
        }
        return result_;
    }

    static std::vector<int> default_priorities(const Model& model) {
        std::vector<int> p;
        p.reserve(model.num_variables());
        for (const auto& v : model.variables()) p.push_back(v.priority);
        return p;
    }

private:
    struct BoundChange {
        int var;
        double lo;
        double hi;
    };

    struct Node {
        double bound = -kInfinity;
        long id = 0;
        std::vector<BoundChange> changes;
        std::shared_ptr<const lp::Basis> basis;
        // Branching decision that created this node, for pseudocost updates.
        int branch_var = -1;
        double branch_distance = 0.0;
        bool branch_up = false;
    };

    struct Pseudocost {
        double sum = 0.0;
        long count = 0;
    };

    static constexpr long kReliable = 4;
    static constexpr int kMaxProbes = 8;
    static constexpr int kLookahead = 4;
    static constexpr long kProbeIterations = 20;

    struct NodeOrder {
        bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
            if (a->bound != b->bound) return a->bound > b->bound;
            return a->id > b->id;
        }
    };

    std::shared_ptr<Node> child(const Node& parent, double bound, std::shared_ptr<const lp::Basis> basis, BoundChange change) {
        auto node = std::make_shared<Node>();
        node->bound = bound;
        node->id = next_id_++;
        node->changes = parent.changes;
        node->changes.push_back(change);
        node->basis = std::move(basis);
        return node;
    }

    void apply_node(const Node& node) {
        for (int j : applied_) {
            lp_.set_bounds(j, root_lo_[static_cast<std::size_t>(j)], root_hi_[static_cast<std::size_t>(j)]);
        }
        applied_.clear();
        for (const auto& c : node.changes) {
            const double lo = std::max(c.lo, lp_.lower(c.var));
            const double hi = std::min(c.hi, lp_.upper(c.var));
            lp_.set_bounds(c.var, lo, hi);
            applied_.push_back(c.var);
        }
        if (node.basis && node.basis != current_basis_) {
            lp_.load_basis(*node.basis);
            current_basis_ = node.basis;
        }
    }

    // Binaries whose reduced cost exceeds the distance to the cutoff cannot
    // leave their bound in any improving descendant.
    void fix_by_reduced_cost(Node& node, double obj) const {
        const double room = cutoff() - obj;
        if (!(room > 0.0) || !std::isfinite(room)) return;
        const auto d = lp_.structural_reduced_costs();
        for (int j : binaries_) {
            const auto k = static_cast<std::size_t>(j);
            if (lp_.lower(j) == lp_.upper(j)) continue;
            if (lp_.at_lower(j) && d[k] > room) {
                node.changes.push_back({j, lp_.lower(j), lp_.lower(j)});
            } else if (lp_.at_upper(j) && -d[k] > room) {
                node.changes.push_back({j, lp_.upper(j), lp_.upper(j)});
            }
        }
    }

    // Records the degradation of a freshly solved child once.
    void record_pseudocost(Node& node, double obj) {
        if (node.branch_var < 0 || !std::isfinite(node.bound) || node.branch_distance <= 0.0) return;
        auto& pc = (node.branch_up ? up_cost_ : down_cost_)[static_cast<std::size_t>(node.branch_var)];
        pc.sum += std::max(0.0, obj - node.bound) / node.branch_distance;
        ++pc.count;
        node.branch_var = -1;
    }

    static double average(const std::vector<Pseudocost>& costs) {
        double sum = 0.0;
        long count = 0;
        for (const auto& pc : costs) {
            if (pc.count == 0) continue;
            sum += pc.sum / static_cast<double>(pc.count);
            ++count;
        }
        return count ? sum / static_cast<double>(count) : 1.0;
    }

    // Objective of the current LP with one bound changed, solved for a few
    // dual iterations; +inf when that child is infeasible, NaN if unknown.
    double probe(int var, double lo, double hi, const Deadline& deadline) {
        const double old_lo = lp_.lower(var);
        const double old_hi = lp_.upper(var);
        const auto snap = lp_.snapshot();
        lp_.set_bounds(var, lo, hi);
        const auto st = lp_.solve(&deadline, kProbeIterations);
        double value = std::numeric_limits<double>::quiet_NaN();
        if (st == lp::Status::optimal) value = lp_.objective();
        if (st == lp::Status::infeasible) value = kInfinity;
        if (st == lp::Status::iteration_limit && std::isfinite(lp_.limit_bound())) value = lp_.limit_bound();
        lp_.set_bounds(var, old_lo, old_hi);
        lp_.restore(snap);
        return value;
    }

    static double estimate(const Pseudocost& pc, double fallback) {
        return pc.count ? pc.sum / static_cast<double>(pc.count) : fallback;
    }

    // Highest priority class first. Within it, candidates are ranked by the
    // product of estimated child degradations; those whose pseudocosts rest
    // on fewer than kReliable observations are probed first.
    int select_branching_variable(const Deadline& deadline) {
        struct Candidate {
            int var;
            double frac;
            double score;
        };
        std::vector<Candidate> candidates;
        int top = 0;
        for (int j : binaries_) {
            const double x = lp_.value(j);
            const double frac = x - std::floor(x);
            if (frac <= params_.integrality_tol || frac >= 1.0 - params_.integrality_tol) continue;
            const int p = priority_[static_cast<std::size_t>(j)];
            if (candidates.empty() || p > top) {
                candidates.clear();
                top = p;
            }
            if (p == top) candidates.push_back({j, frac, 0.0});
        }
        if (candidates.empty()) return -1;
        const double down_avg = average(down_cost_);
        const double up_avg = average(up_cost_);
        auto product = [](double down, double up) { return std::max(down, 1e-6) * std::max(up, 1e-6); };
        for (auto& c : candidates) {
            const auto k = static_cast<std::size_t>(c.var);
            c.score = product(c.frac * estimate(down_cost_[k], down_avg), (1.0 - c.frac) * estimate(up_cost_[k], up_avg));
        }
        std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
        if (candidates.size() == 1) return candidates.front().var;

        const double base = lp_.objective();
        int best = candidates.front().var;
        double best_score = candidates.front().score;
        int probed = 0;
        int since_better = 0;
        for (const auto& c : candidates) {
            if (probed >= kMaxProbes || since_better >= kLookahead || deadline.expired()) break;
            const auto k = static_cast<std::size_t>(c.var);
            if (std::min(down_cost_[k].count, up_cost_[k].count) >= kReliable) continue;
            ++probed;
            const double down = probe(c.var, root_lo_[k], 0.0, deadline);
            const double up = probe(c.var, 1.0, root_hi_[k], deadline);
            if (std::isnan(down) || std::isnan(up)) continue;
            const double down_gain = std::max(0.0, down - base);
            const double up_gain = std::max(0.0, up - base);
            if (std::isfinite(down)) {
                down_cost_[k].sum += down_gain / c.frac;
                ++down_cost_[k].count;
            }
            if (std::isfinite(up)) {
                up_cost_[k].sum += up_gain / (1.0 - c.frac);
                ++up_cost_[k].count;
            }
            // A child that is infeasible or cut off makes this an ideal branch.
            const double score = (down >= cutoff() || up >= cutoff()) ? kInfinity : product(down_gain, up_gain);
            if (score > best_score) {
                best_score = score;
                best = c.var;
                since_better = 0;
            } else {
                ++since_better;
            }
            if (!std::isfinite(score)) break;
        }
        return best;
    }

    std::vector<Constraint> separate(const std::vector<double>& values) const {
        std::vector<Constraint> cuts;
        if (model_.lazy_hooks().empty()) return cuts;
        std::vector<double> rounded = values;
        for (int j : binaries_) rounded[static_cast<std::size_t>(j)] = std::round(rounded[static_cast<std::size_t>(j)]);
        for (const auto& hook : model_.lazy_hooks()) {
            auto rows = hook(rounded);
            cuts.insert(cuts.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
        }
        return cuts;
    }

    void accept(const Assignment& point, long node) {
        const double value = model_.objective_value(point.values);
        if (result_.incumbent && value >= result_.objective - 1e-12 * std::max(1.0, std::abs(value))) return;
        result_.incumbent = point;
        result_.objective = value;
        const double t = clock_.elapsed();
        if (!std::isfinite(result_.first_incumbent_value)) {
            result_.first_incumbent_time = t;
            result_.first_incumbent_value = value;
        }
        result_.events.push_back({SolveEvent::Kind::incumbent, t, node, value});
    }

    void update_bound(double bound) {
        if (result_.incumbent) bound = std::min(bound, result_.objective);
        if (bound > result_.best_bound) {
            result_.best_bound = bound;
            if (std::isfinite(bound)) {
                result_.events.push_back({SolveEvent::Kind::bound, clock_.elapsed(), result_.nodes, bound});
            }
        }
    }

    void note_pruned(double bound) { pruned_min_ = std::min(pruned_min_, bound); }

    double cutoff() const {
        if (!result_.incumbent) return kInfinity;
        return result_.objective - params_.rel_gap_target * std::max(std::abs(result_.objective), 1e-10);
    }

    bool gap_closed() const {
        return result_.incumbent && compute_gap(result_.objective, result_.best_bound) <= params_.rel_gap_target;
    }

    const Model& model_;
    SolveParams params_;
    WorkClock clock_;
    lp::Simplex lp_;
    std::vector<int> priority_;
    std::vector<int> binaries_;
    std::vector<Pseudocost> down_cost_, up_cost_;
    std::vector<double> root_lo_, root_hi_;
    std::vector<int> applied_;
    std::shared_ptr<const lp::Basis> current_basis_;
    std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, NodeOrder> open_;
    long next_id_ = 0;
    double pruned_min_ = kInfinity;
    MipResult result_;
};

inline MipResult solve_model(const Model& model, const SolveParams& params, const std::optional<Assignment>& warm = std::nullopt,
                             std::vector<int> priority = {}) {
    if (params.time_limit_s < 0.0) throw ModelError("time limit must be nonnegative");
    BranchAndBound bnb(model, params, std::move(priority));
    if (warm) bnb.set_warm_start(*warm);
    return bnb.run();
}

}  // namespace fsmvrp
