#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace fsmvrp {

enum class VarKind { binary, continuous };

enum class Sense { less_equal, equal, greater_equal };

struct Variable {
    VarKind kind = VarKind::continuous;
    double lower = 0.0;
    double upper = kInfinity;
    double objective = 0.0;
    // Higher classes are branched on first.
    int priority = 0;
    std::string name;
};

struct Term {
    int var = 0;
    double coef = 0.0;
};

struct Constraint {
    std::vector<Term> row;
    Sense sense = Sense::less_equal;
    double rhs = 0.0;
    // Family name, optionally followed by a bracketed subscript list, e.g.
    // "demand[i=1,k=chilled]". Untagged plumbing rows use "plumbing".
    std::string tag;

    std::string_view family() const {
        std::string_view t = tag;
        return t.substr(0, t.find('['));
    }

    double activity(std::span<const double> values) const {
        double sum = 0.0;
        for (const auto& term : row) sum += term.coef * values[static_cast<std::size_t>(term.var)];
        return sum;
    }

    // Amount by which `values` violates the row (0 when satisfied).
    double violation(std::span<const double> values) const {
        const double a = activity(values);
        switch (sense) {
            case Sense::less_equal: return std::max(0.0, a - rhs);
            case Sense::greater_equal: return std::max(0.0, rhs - a);
            case Sense::equal: return std::abs(a - rhs);
        }
        return 0.0;
    }
};

struct Assignment {
    std::vector<double> values;

    double operator[](int var) const { return values[static_cast<std::size_t>(var)]; }
    double& operator[](int var) { return values[static_cast<std::size_t>(var)]; }
};

// Separation routine called on integral points; returns violated rows to add.
using LazyHook = std::function<std::vector<Constraint>(std::span<const double>)>;

// Mixed-integer linear program, minimisation only. Mutable while it is built,
// then frozen and shared read-only.
class Model {
public:
    int add_variable(VarKind kind, double lower, double upper, double objective = 0.0, int priority = 0,
                     std::string name = {}) {
        check_mutable();
        if (kind == VarKind::binary) {
            lower = 0.0;
            upper = 1.0;
        }
        if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
            throw ModelError("variable bounds are inverted: [" + std::to_string(lower) + ", " + std::to_string(upper) + "]");
        }
        vars_.push_back({kind, lower, upper, objective, priority, std::move(name)});
        return static_cast<int>(vars_.size() - 1);
    }

    int add_constraint(std::vector<Term> row, Sense sense, double rhs, std::string tag) {
        check_mutable();
        if (row.empty()) throw ModelError("constraint '" + tag + "' has an empty row");
        if (tag.empty()) throw ModelError("constraints must carry a tag");
        for (const auto& t : row) {
            if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars_.size()) {
                throw ModelError("constraint '" + tag + "' references unknown variable " + std::to_string(t.var));
            }
        }
        const int id = static_cast<int>(cons_.size());
        tag_index_.emplace(tag, id);
        cons_.push_back({std::move(row), sense, rhs, std::move(tag)});
        return id;
    }

    void add_lazy_hook(LazyHook hook) {
        check_mutable();
        hooks_.push_back(std::move(hook));
    }

    void set_priority(int var, int priority) {
        check_mutable();
        vars_.at(static_cast<std::size_t>(var)).priority = priority;
    }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    std::size_t num_variables() const { return vars_.size(); }
    std::size_t num_constraints() const { return cons_.size(); }
    const Variable& variable(int id) const { return vars_.at(static_cast<std::size_t>(id)); }
    const Constraint& constraint(int id) const { return cons_.at(static_cast<std::size_t>(id)); }
    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Constraint>& constraints() const { return cons_; }
    const std::vector<LazyHook>& lazy_hooks() const { return hooks_; }

    std::optional<int> find_constraint(const std::string& tag) const {
        auto it = tag_index_.find(tag);
        if (it == tag_index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t count_family(std::string_view family) const {
        return static_cast<std::size_t>(
            std::count_if(cons_.begin(), cons_.end(), [&](const Constraint& c) { return c.family() == family; }));
    }

    std::size_t count_kind(VarKind kind) const {
        return static_cast<std::size_t>(
            std::count_if(vars_.begin(), vars_.end(), [&](const Variable& v) { return v.kind == kind; }));
    }

    double objective_value(std::span<const double> values) const {
        double sum = 0.0;
        for (std::size_t j = 0; j < vars_.size(); ++j) sum += vars_[j].objective * values[j];
        return sum;
    }

    // Tags of the rows and bounds that `values` violates beyond `tol`, scaled
    // by the row magnitude.
    std::vector<std::string> violations(std::span<const double> values, double tol = 1e-6) const {
        std::vector<std::string> out;
        if (values.size() != vars_.size()) {
            out.push_back("plumbing: assignment size mismatch");
            return out;
        }
        for (std::size_t j = 0; j < vars_.size(); ++j) {
            const auto& v = vars_[j];
            if (values[j] < v.lower - tol || values[j] > v.upper + tol) {
                out.push_back("bounds[" + (v.name.empty() ? std::to_string(j) : v.name) + "]");
            } else if (v.kind == VarKind::binary && std::abs(values[j] - std::round(values[j])) > tol) {
                out.push_back("integrality[" + (v.name.empty() ? std::to_string(j) : v.name) + "]");
            }
        }
        for (const auto& c : cons_) {
            double scale = std::max(1.0, std::abs(c.rhs));
            for (const auto& t : c.row) scale = std::max(scale, std::abs(t.coef));
            if (c.violation(values) > tol * scale) out.push_back(c.tag);
        }
        return out;
    }

    // LP relaxation: the same model with every integrality mark dropped.
    Model relaxed() const {
        Model lp = *this;
        for (auto& v : lp.vars_) v.kind = VarKind::continuous;
        return lp;
    }

    bool is_relaxation() const { return count_kind(VarKind::binary) == 0; }

    // CPLEX-style LP text; each row is preceded by its tag as a comment.
    std::string to_lp_format() const {
        std::ostringstream out;
        out.precision(17);
        auto name = [&](int j) {
            const auto& v = vars_[static_cast<std::size_t>(j)];
            return v.name.empty() ? "v" + std::to_string(j) : sanitize(v.name);
        };
        auto write_terms = [&](const std::vector<Term>& terms) {
            bool first = true;
            for (const auto& t : terms) {
                if (t.coef == 0.0) continue;
                if (t.coef < 0.0) {
                    out << (first ? "- " : " - ");
                } else if (!first) {
                    out << " + ";
                }
                const double mag = std::abs(t.coef);
                if (mag != 1.0) out << mag << ' ';
                out << name(t.var);
                first = false;
            }
            if (first) out << "0 " << name(terms.empty() ? 0 : terms.front().var);
        };
        out << "Minimize\n obj: ";
        std::vector<Term> obj;
        for (std::size_t j = 0; j < vars_.size(); ++j) {
            if (vars_[j].objective != 0.0) obj.push_back({static_cast<int>(j), vars_[j].objective});
        }
        if (obj.empty() && !vars_.empty()) obj.push_back({0, 0.0});
        write_terms(obj);
        out << "\nSubject To\n";
        for (std::size_t i = 0; i < cons_.size(); ++i) {
            const auto& c = cons_[i];
            out << "\\ " << c.tag << "\n c" << i << ": ";
            write_terms(c.row);
            out << (c.sense == Sense::less_equal ? " <= " : c.sense == Sense::equal ? " = " : " >= ") << c.rhs << '\n';
        }
        out << "Bounds\n";
        for (std::size_t j = 0; j < vars_.size(); ++j) {
            const auto& v = vars_[j];
            if (v.kind == VarKind::binary) continue;
            out << ' ';
            if (std::isinf(v.lower)) {
                out << "-inf";
            } else {
                out << v.lower;
            }
            out << " <= " << name(static_cast<int>(j)) << " <= ";
            if (std::isinf(v.upper)) {
                out << "+inf";
            } else {
                out << v.upper;
            }
            out << '\n';
        }
        out << "Binaries\n";
        for (std::size_t j = 0; j < vars_.size(); ++j) {
            if (vars_[j].kind == VarKind::binary) out << ' ' << name(static_cast<int>(j)) << '\n';
        }
        out << "End\n";
        return out.str();
    }

private:
    void check_mutable() const {
        if (frozen_) throw ModelError("model is frozen");
    }

    static std::string sanitize(const std::string& s) {
        std::string out;
        for (char c : s) out.push_back((std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_');
        return out;
    }

    std::vector<Variable> vars_;
    std::vector<Constraint> cons_;
    std::unordered_multimap<std::string, int> tag_index_;
    std::vector<LazyHook> hooks_;
    bool frozen_ = false;
};

inline Model relax_to_lp(const Model& model) { return model.relaxed(); }

}  // namespace fsmvrp
