#ifndef TWROUTER_CQM_MODEL_HPP_
#define TWROUTER_CQM_MODEL_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "instance.hpp"
#include "schedule.hpp"
#include "violation.hpp"

// Arc formulation of the single-vehicle TSPTW as a constrained quadratic model:
//   min   sum c(i,j) x_ij
//   s.t.  sum_i x_ij = 1                                   for every node j        (eq2)
//         sum_j x_ij = 1                                   for every node i        (eq3)
//         sum_j z_ij - sum_{j != 0} z_ji = 1               for every customer i    (eq4)
//         z_ij <= (|N|-1) x_ij                             for i != 0, j != i      (eq5)
//         z_ij - z_ji >= 0   whenever ready_i + service_i + c(i,j) >= due_j        (eq6)
// x is binary, z continuous in [0, |N|-1]. The model is linear; the quadratic slot stays empty.

namespace twrouter {

    enum class VarKind { binary, continuous };

    enum class Sense { less_equal, equal, greater_equal };

    struct Variable {
        std::string name;
        VarKind kind = VarKind::binary;
        double lower = 0.0;
        double upper = 1.0;
    };

    struct Term {
        std::size_t var = 0;
        double coef = 0.0;
    };

    struct QuadraticTerm {
        std::size_t first = 0;
        std::size_t second = 0;
        double coef = 0.0;
    };

    struct LinearConstraint {
        std::vector<Term> terms;
        Sense sense = Sense::equal;
        double rhs = 0.0;
        std::string label;
    };

    class ModelError : public std::invalid_argument {
    public:
        using std::invalid_argument::invalid_argument;
    };

    class DecodeError : public std::runtime_error {
    public:
        DecodeError(const std::string& what, std::vector<NodeId> stranded)
            : std::runtime_error(what), stranded_(std::move(stranded)) {}

        const std::vector<NodeId>& stranded() const noexcept {
            return stranded_;
        }

    private:
        std::vector<NodeId> stranded_;
    };

    struct CqmModel {
        std::vector<Variable> variables;
        std::vector<Term> objective;
        std::vector<QuadraticTerm> quadratic;
        std::vector<LinearConstraint> constraints;
        // Depot first, then the subproblem's customers in input order.
        std::vector<NodeId> node_ids;

        std::size_t node_count() const noexcept {
            return node_ids.size();
        }

        // Local positions a, b index node_ids; a != b.
        std::size_t x_index(std::size_t a, std::size_t b) const noexcept {
            const std::size_t n = node_ids.size();
            return a * (n - 1) + (b < a ? b : b - 1);
        }

        std::size_t z_index(std::size_t a, std::size_t b) const noexcept {
            const std::size_t n = node_ids.size();
            return n * (n - 1) + x_index(a, b);
        }

        std::size_t local_of(NodeId id) const {
            const auto it = std::find(node_ids.begin(), node_ids.end(), id);
            if (it == node_ids.end()) {
                throw ModelError("node " + std::to_string(id) + " is not part of the model");
            }
            return static_cast<std::size_t>(it - node_ids.begin());
        }

        std::size_t count_with_prefix(std::string_view prefix) const {
            return static_cast<std::size_t>(std::count_if(constraints.begin(), constraints.end(), [&](const auto& c) {
                return c.label.compare(0, prefix.size(), prefix) == 0;
            }));
        }
    };

    // Values aligned with CqmModel::variables.
    struct Assignment {
        std::vector<double> values;

        static Assignment zeros(const CqmModel& model) {
            return Assignment{std::vector<double>(model.variables.size(), 0.0)};
        }

        // Throws ModelError when any model variable is absent from `named`.
        static Assignment from_map(const CqmModel& model, const std::map<std::string, double>& named) {
            Assignment a;
            a.values.reserve(model.variables.size());
            for (const auto& v : model.variables) {
                const auto it = named.find(v.name);
                if (it == named.end()) {
                    throw ModelError("assignment is missing variable " + v.name);
                }
                a.values.push_back(it->second);
            }
            return a;
        }
    };

    // True when ready_i + service_i + c(i,j) >= due_j, i.e. the pair receives a precedence row.
    inline bool precedence_triggered(const Instance& instance, NodeId i, NodeId j) {
        const Node& from = instance.node(i);
        return from.ready_time + from.service_time + instance.cost(i, j) >= instance.node(j).due_time;
    }

    inline CqmModel build_tsptw_model(const Instance& instance, std::span<const NodeId> customers) {
        if (customers.empty()) {
            throw ModelError("model needs at least one customer");
        }
        std::vector<char> seen(instance.size(), 0);
        for (const NodeId id : customers) {
            if (!instance.contains(id)) {
                throw ModelError("unknown node id " + std::to_string(id));
            }
            if (id == depot_id) {
                throw ModelError("depot cannot be listed as a customer");
            }
            if (seen[static_cast<std::size_t>(id)] != 0) {
                throw ModelError("duplicate customer id " + std::to_string(id));
            }
            seen[static_cast<std::size_t>(id)] = 1;
        }

        CqmModel m;
        m.node_ids.push_back(depot_id);
        m.node_ids.insert(m.node_ids.end(), customers.begin(), customers.end());
        const std::size_t n = m.node_ids.size();
        const auto id = [&](std::size_t a) { return std::to_string(m.node_ids[a]); };
        const double zmax = static_cast<double>(n - 1);

        m.variables.reserve(2 * n * (n - 1));
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a != b) {
                    m.variables.push_back({"x_" + id(a) + "_" + id(b), VarKind::binary, 0.0, 1.0});
                }
            }
        }
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a != b) {
                    m.variables.push_back({"z_" + id(a) + "_" + id(b), VarKind::continuous, 0.0, zmax});
                }
            }
        }

        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a != b) {
                    m.objective.push_back({m.x_index(a, b), instance.cost(m.node_ids[a], m.node_ids[b])});
                }
            }
        }

        for (std::size_t b = 0; b < n; ++b) {
            LinearConstraint c{{}, Sense::equal, 1.0, "eq2_j" + id(b)};
            for (std::size_t a = 0; a < n; ++a) {
                if (a != b) {
                    c.terms.push_back({m.x_index(a, b), 1.0});
                }
            }
            m.constraints.push_back(std::move(c));
        }
        for (std::size_t a = 0; a < n; ++a) {
            LinearConstraint c{{}, Sense::equal, 1.0, "eq3_i" + id(a)};
            for (std::size_t b = 0; b < n; ++b) {
                if (a != b) {
                    c.terms.push_back({m.x_index(a, b), 1.0});
                }
            }
            m.constraints.push_back(std::move(c));
        }
        for (std::size_t a = 1; a < n; ++a) {
            LinearConstraint c{{}, Sense::equal, 1.0, "eq4_i" + id(a)};
            for (std::size_t b = 0; b < n; ++b) {
                if (b != a) {
                    c.terms.push_back({m.z_index(a, b), 1.0});
                }
            }
            for (std::size_t b = 1; b < n; ++b) {
                if (b != a) {
                    c.terms.push_back({m.z_index(b, a), -1.0});
                }
            }
            m.constraints.push_back(std::move(c));
        }
        for (std::size_t a = 1; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a != b) {
                    m.constraints.push_back({{{m.z_index(a, b), 1.0}, {m.x_index(a, b), -zmax}},
                                             Sense::less_equal,
                                             0.0,
                                             "eq5_i" + id(a) + "_j" + id(b)});
                }
            }
        }
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a != b && precedence_triggered(instance, m.node_ids[a], m.node_ids[b])) {
                    m.constraints.push_back({{{m.z_index(a, b), 1.0}, {m.z_index(b, a), -1.0}},
                                             Sense::greater_equal,
                                             0.0,
                                             "eq6_i" + id(a) + "_j" + id(b)});
                }
            }
        }
        return m;
    }

    inline double objective_value(const CqmModel& model, const Assignment& a) {
        double total = 0.0;
        for (const auto& t : model.objective) {
            total += t.coef * a.values[t.var];
        }
        for (const auto& q : model.quadratic) {
            total += q.coef * a.values[q.first] * a.values[q.second];
        }
        return total;
    }

    inline ViolationReport check_assignment(const CqmModel& model, const Assignment& a, double tolerance = 1e-9) {
        if (a.values.size() != model.variables.size()) {
            throw ModelError("assignment has " + std::to_string(a.values.size()) + " values for " +
                             std::to_string(model.variables.size()) + " variables");
        }
        ViolationReport report;
        for (std::size_t v = 0; v < model.variables.size(); ++v) {
            const auto& var = model.variables[v];
            const double value = a.values[v];
            if (var.kind == VarKind::binary && value != 0.0 && value != 1.0) {
                report.push_back({"binary_" + var.name, std::min(std::abs(value), std::abs(value - 1.0))});
            } else if (value < var.lower - tolerance) {
                report.push_back({"bound_" + var.name, var.lower - value});
            } else if (value > var.upper + tolerance) {
                report.push_back({"bound_" + var.name, value - var.upper});
            }
        }
        for (const auto& c : model.constraints) {
            double lhs = 0.0;
            for (const auto& t : c.terms) {
                lhs += t.coef * a.values[t.var];
            }
            double slack = 0.0;
            switch (c.sense) {
                case Sense::less_equal:
                    slack = lhs - c.rhs;
                    break;
                case Sense::greater_equal:
                    slack = c.rhs - lhs;
                    break;
                case Sense::equal:
                    slack = std::abs(lhs - c.rhs);
                    break;
            }
            if (slack > tolerance) {
                report.push_back({c.label, slack});
            }
        }
        return report;
    }

    // Canonical encoding: x on tour arcs; z on the arc leaving the k-th customer equals k, so each
    // customer's outflow exceeds its inflow by exactly one. z on the depot's outgoing arc is 0.
    inline Assignment encode_route(const CqmModel& model, std::span<const NodeId> route) {
        if (route.size() + 1 != model.node_count()) {
            throw ModelError("route length does not match the model's customer count");
        }
        Assignment a = Assignment::zeros(model);
        std::size_t prev = 0;
        for (std::size_t k = 0; k < route.size(); ++k) {
            const std::size_t cur = model.local_of(route[k]);
            if (cur == 0) {
                throw ModelError("route lists the depot as a customer");
            }
            a.values[model.x_index(prev, cur)] = 1.0;
            if (prev != 0) {
                a.values[model.z_index(prev, cur)] = static_cast<double>(k);
            }
            prev = cur;
        }
        a.values[model.x_index(prev, 0)] = 1.0;
        a.values[model.z_index(prev, 0)] = static_cast<double>(route.size());
        return a;
    }

    // Follows x successors from the depot. Throws DecodeError when the walk does not visit all nodes
    // before returning to the depot.
    inline Route decode_route(const CqmModel& model, const Assignment& a) {
        const std::size_t n = model.node_count();
        if (a.values.size() != model.variables.size()) {
            throw ModelError("assignment size does not match model");
        }
        std::vector<std::size_t> successor(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && a.values[model.x_index(i, j)] > 0.5) {
                    if (successor[i] != n) {
                        throw DecodeError("node " + std::to_string(model.node_ids[i]) + " has more than one successor", {});
                    }
                    successor[i] = j;
                }
            }
        }
        Route route;
        std::vector<char> visited(n, 0);
        visited[0] = 1;
        std::size_t at = successor[0];
        while (at != n && at != 0 && visited[at] == 0) {
            visited[at] = 1;
            route.push_back(model.node_ids[at]);
            at = successor[at];
        }
        if (at == 0 && route.size() + 1 == n) {
            return route;
        }
        std::vector<NodeId> stranded;
        for (std::size_t i = 1; i < n; ++i) {
            if (visited[i] == 0) {
                stranded.push_back(model.node_ids[i]);
            }
        }
        std::string names;
        for (const NodeId s : stranded) {
            names += (names.empty() ? "" : ",") + std::to_string(s);
        }
        if (at == n) {
            throw DecodeError("successor chain from the depot breaks off; unvisited nodes {" + names + "}", stranded);
        }
        throw DecodeError("successor chain from the depot closes before visiting nodes {" + names + "}", stranded);
    }

    namespace detail {

        inline std::string format_number(double v) {
            char buf[64];
            const auto res = std::to_chars(buf, buf + sizeof(buf), v);
            return std::string(buf, res.ptr);
        }

        inline void append_linear(std::string& out, const CqmModel& model, std::span<const Term> terms) {
            int on_line = 0;
            bool first = true;
            for (const auto& t : terms) {
                if (on_line == 8) {
                    out += "\n  ";
                    on_line = 0;
                }
                const double mag = std::abs(t.coef);
                out += first ? (t.coef < 0 ? "- " : "") : (t.coef < 0 ? " - " : " + ");
                if (mag != 1.0) {
                    out += format_number(mag);
                    out += ' ';
                }
                out += model.variables[t.var].name;
                first = false;
                ++on_line;
            }
        }

    }  // namespace detail

    // CPLEX LP dialect. Output depends only on the model, so identical models give identical bytes.
    inline std::string export_lp(const CqmModel& model) {
        std::string out;
        out += "\\ TSPTW arc model over nodes";
        for (const NodeId id : model.node_ids) {
            out += ' ' + std::to_string(id);
        }
        out += "\nMinimize\n obj: ";
        if (model.objective.empty() && model.quadratic.empty()) {
            out += "0 " + (model.variables.empty() ? std::string("x") : model.variables.front().name);
        }
        detail::append_linear(out, model, model.objective);
        if (!model.quadratic.empty()) {
            out += " + [";
            for (std::size_t q = 0; q < model.quadratic.size(); ++q) {
                const auto& t = model.quadratic[q];
                out += (q == 0 ? " " : " + ") + detail::format_number(2.0 * t.coef) + " " + model.variables[t.first].name +
                       " * " + model.variables[t.second].name;
            }
            out += " ] / 2";
        }
        out += "\nSubject To\n";
        for (const auto& c : model.constraints) {
            out += ' ' + c.label + ": ";
            detail::append_linear(out, model, c.terms);
            switch (c.sense) {
                case Sense::less_equal:
                    out += " <= ";
                    break;
                case Sense::greater_equal:
                    out += " >= ";
                    break;
                case Sense::equal:
                    out += " = ";
                    break;
            }
            out += detail::format_number(c.rhs) + '\n';
        }
        out += "Bounds\n";
        for (const auto& v : model.variables) {
            if (v.kind == VarKind::continuous) {
                out += ' ' + detail::format_number(v.lower) + " <= " + v.name + " <= " + detail::format_number(v.upper) + '\n';
            }
        }
        out += "Binary\n";
        for (const auto& v : model.variables) {
            if (v.kind == VarKind::binary) {
                out += ' ' + v.name + '\n';
            }
        }
        out += "End\n";
        return out;
    }

}  // namespace twrouter

#endif
