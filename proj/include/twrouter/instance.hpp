#ifndef TWROUTER_INSTANCE_HPP_
#define TWROUTER_INSTANCE_HPP_

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace twrouter {

    using NodeId = int;

    inline constexpr NodeId depot_id = 0;

    // Raised for malformed instance text. `line()` is 1-based, 0 when the error is not tied to a line.
    class ParseError : public std::runtime_error {
    public:
        ParseError(std::size_t line, const std::string& what)
            : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

        std::size_t line() const noexcept {
            return line_;
        }

    private:
        std::size_t line_;
    };

    // Raised when instance data violates a model invariant (e.g. due time before ready time).
    class ValidationError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    struct Node {
        NodeId id = 0;
        double x = 0.0;
        double y = 0.0;
        double demand = 0.0;
        double ready_time = 0.0;
        double due_time = 0.0;
        double service_time = 0.0;

        bool operator==(const Node&) const = default;
    };

    inline double euclidean_cost(const Node& a, const Node& b) {
        const double dx = a.x - b.x;
        const double dy = a.y - b.y;
        return std::sqrt(dx * dx + dy * dy);
    }

    // Dense row-major |N| x |N| matrix.
    class CostMatrix {
    public:
        CostMatrix() = default;

        explicit CostMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

        std::size_t size() const noexcept {
            return n_;
        }

        double operator()(NodeId i, NodeId j) const {
            return data_[static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j)];
        }

        double& operator()(NodeId i, NodeId j) {
            return data_[static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j)];
        }

        std::span<const double> values() const noexcept {
            return data_;
        }

        double mean() const {
            if (data_.empty()) {
                return 0.0;
            }
            double sum = 0.0;
            for (const double v : data_) {
                sum += v;
            }
            return sum / static_cast<double>(data_.size());
        }

        bool operator==(const CostMatrix&) const = default;

    private:
        std::size_t n_ = 0;
        std::vector<double> data_;
    };

    inline CostMatrix build_cost_matrix(std::span<const Node> nodes) {
        CostMatrix m(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t j = i + 1; j < nodes.size(); ++j) {
                const double d = euclidean_cost(nodes[i], nodes[j]);
                m(static_cast<NodeId>(i), static_cast<NodeId>(j)) = d;
                m(static_cast<NodeId>(j), static_cast<NodeId>(i)) = d;
            }
        }
        return m;
    }

    // Immutable CVRPTW problem data. Node 0 is the depot; node ids equal their index.
    class Instance {
    public:
        Instance(std::string name, int vehicle_count, double capacity, std::vector<Node> nodes)
            : name_(std::move(name)), vehicle_count_(vehicle_count), capacity_(capacity), nodes_(std::move(nodes)) {
            validate();
            costs_ = build_cost_matrix(nodes_);
        }

        const std::string& name() const noexcept {
            return name_;
        }

        int vehicle_count() const noexcept {
            return vehicle_count_;
        }

        double capacity() const noexcept {
            return capacity_;
        }

        const std::vector<Node>& nodes() const noexcept {
            return nodes_;
        }

        const Node& node(NodeId id) const {
            return nodes_[static_cast<std::size_t>(id)];
        }

        const Node& depot() const {
            return nodes_.front();
        }

        // Number of nodes including the depot.
        std::size_t size() const noexcept {
            return nodes_.size();
        }

        std::size_t customer_count() const noexcept {
            return nodes_.size() - 1;
        }

        bool contains(NodeId id) const noexcept {
            return id >= 0 && static_cast<std::size_t>(id) < nodes_.size();
        }

        double cost(NodeId i, NodeId j) const {
            return costs_(i, j);
        }

        const CostMatrix& cost_matrix() const noexcept {
            return costs_;
        }

        // Keeps the depot and the first `customers` customers.
        Instance truncated(std::size_t customers) const {
            if (customers == 0 || customers > customer_count()) {
                throw std::invalid_argument("truncation to " + std::to_string(customers) + " customers out of range 1.." +
                                            std::to_string(customer_count()));
            }
            std::vector<Node> kept(nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(customers + 1));
            return Instance(name_ + "." + std::to_string(customers), vehicle_count_, capacity_, std::move(kept));
        }

        bool operator==(const Instance&) const = default;

    private:
        void validate() const {
            if (nodes_.empty()) {
                throw ValidationError("instance has no depot");
            }
            if (nodes_.size() < 2) {
                throw ValidationError("no customers");
            }
            if (capacity_ <= 0.0) {
                throw ValidationError("vehicle capacity must be positive");
            }
            if (vehicle_count_ <= 0) {
                throw ValidationError("vehicle count must be positive");
            }
            for (std::size_t i = 0; i < nodes_.size(); ++i) {
                const Node& n = nodes_[i];
                if (n.id != static_cast<NodeId>(i)) {
                    throw ValidationError("node ids must be contiguous from 0; found id " + std::to_string(n.id) +
                                          " at position " + std::to_string(i));
                }
                if (n.ready_time > n.due_time) {
                    throw ValidationError("node " + std::to_string(n.id) + ": due time before ready time");
                }
                if (n.demand < 0.0 || n.ready_time < 0.0 || n.service_time < 0.0) {
                    throw ValidationError("node " + std::to_string(n.id) + ": negative demand, ready or service time");
                }
            }
            if (nodes_.front().demand != 0.0 || nodes_.front().service_time != 0.0) {
                throw ValidationError("depot must have zero demand and zero service time");
            }
        }

        std::string name_;
        int vehicle_count_ = 0;
        double capacity_ = 0.0;
        std::vector<Node> nodes_;
        CostMatrix costs_;
    };

    namespace detail {

        struct Line {
            std::size_t number;
            std::vector<std::string_view> tokens;
        };

        inline std::vector<std::string_view> split_ws(std::string_view s) {
            std::vector<std::string_view> out;
            std::size_t i = 0;
            while (i < s.size()) {
                while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
                    ++i;
                }
                const std::size_t start = i;
                while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) {
                    ++i;
                }
                if (i > start) {
                    out.push_back(s.substr(start, i - start));
                }
            }
            return out;
        }

        inline double parse_number(std::string_view tok, std::size_t line) {
            double v = 0.0;
            const auto* first = tok.data();
            const auto* last = tok.data() + tok.size();
            if (first != last && *first == '+') {
                ++first;
            }
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
                throw ParseError(line, "non-numeric field '" + std::string(tok) + "'");
            }
            return v;
        }

        inline bool is_integral(double v) {
            return std::floor(v) == v;
        }

    }  // namespace detail

    // Parses the classic Solomon layout: name line, VEHICLE section, CUSTOMER section with one row per node.
    inline Instance parse_solomon(std::string_view text) {
        std::vector<detail::Line> lines;
        {
            std::size_t number = 1;
            std::size_t pos = 0;
            while (pos <= text.size()) {
                const std::size_t end = std::min(text.find('\n', pos), text.size());
                auto tokens = detail::split_ws(text.substr(pos, end - pos));
                if (!tokens.empty()) {
                    lines.push_back({number, std::move(tokens)});
                }
                ++number;
                if (end == text.size()) {
                    break;
                }
                pos = end + 1;
            }
        }

        std::size_t k = 0;
        auto next = [&](const char* expecting) -> const detail::Line& {
            if (k >= lines.size()) {
                throw ParseError(0, std::string("unexpected end of input, expecting ") + expecting);
            }
            return lines[k++];
        };

        const auto& name_line = next("instance name");
        std::string name(name_line.tokens.front());
        for (std::size_t i = 1; i < name_line.tokens.size(); ++i) {
            name += ' ';
            name += name_line.tokens[i];
        }

        const auto& vehicle = next("VEHICLE section");
        if (vehicle.tokens.size() != 1 || vehicle.tokens[0] != "VEHICLE") {
            throw ParseError(vehicle.number, "malformed header: expected 'VEHICLE'");
        }
        const auto& vehicle_header = next("vehicle column header");
        if (vehicle_header.tokens.size() != 2 || vehicle_header.tokens[0] != "NUMBER" ||
            vehicle_header.tokens[1] != "CAPACITY") {
            throw ParseError(vehicle_header.number, "malformed header: expected 'NUMBER CAPACITY'");
        }
        const auto& vehicle_row = next("vehicle data row");
        if (vehicle_row.tokens.size() != 2) {
            throw ParseError(vehicle_row.number, "malformed vehicle row: expected 2 fields");
        }
        const double vehicles = detail::parse_number(vehicle_row.tokens[0], vehicle_row.number);
        const double capacity = detail::parse_number(vehicle_row.tokens[1], vehicle_row.number);
        if (!detail::is_integral(vehicles) || vehicles <= 0.0) {
            throw ParseError(vehicle_row.number, "vehicle count must be a positive integer");
        }

        const auto& customer = next("CUSTOMER section");
        if (customer.tokens.size() != 1 || customer.tokens[0] != "CUSTOMER") {
            throw ParseError(customer.number, "malformed header: expected 'CUSTOMER'");
        }
        const auto& customer_header = next("customer column header");
        if (customer_header.tokens.empty() || customer_header.tokens[0] != "CUST") {
            throw ParseError(customer_header.number, "malformed header: expected customer column header");
        }

        std::vector<Node> nodes;
        std::vector<std::size_t> seen_line;
        for (; k < lines.size(); ++k) {
            const auto& row = lines[k];
            if (row.tokens.size() != 7) {
                throw ParseError(row.number, "customer row must have 7 fields, found " + std::to_string(row.tokens.size()));
            }
            double v[7];
            for (std::size_t f = 0; f < 7; ++f) {
                v[f] = detail::parse_number(row.tokens[f], row.number);
            }
            if (!detail::is_integral(v[0]) || v[0] < 0.0) {
                throw ParseError(row.number, "customer id must be a non-negative integer");
            }
            const auto id = static_cast<std::size_t>(v[0]);
            if (id < seen_line.size() && seen_line[id] != 0) {
                throw ParseError(row.number,
                                 "duplicate customer id " + std::to_string(id) + " (first seen on line " +
                                     std::to_string(seen_line[id]) + ")");
            }
            if (nodes.empty() && id != 0) {
                throw ParseError(row.number, "missing depot row: first customer row must have id 0");
            }
            if (id != nodes.size()) {
                throw ParseError(row.number, "customer ids must be contiguous; expected " + std::to_string(nodes.size()) +
                                                 ", found " + std::to_string(id));
            }
            if (seen_line.size() <= id) {
                seen_line.resize(id + 1, 0);
            }
            seen_line[id] = row.number;
            if (v[4] > v[5]) {
                throw ValidationError("line " + std::to_string(row.number) + ": node " + std::to_string(id) +
                                      " has due time before ready time");
            }
            nodes.push_back(Node{static_cast<NodeId>(id), v[1], v[2], v[3], v[4], v[5], v[6]});
        }

        if (nodes.empty()) {
            throw ParseError(customer_header.number, "missing depot row");
        }
        if (nodes.size() == 1) {
            throw ParseError(customer_header.number, "no customers");
        }
        return Instance(std::move(name), static_cast<int>(vehicles), capacity, std::move(nodes));
    }

    inline Instance load_solomon(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw ParseError(0, "cannot open instance file '" + path + "'");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_solomon(buf.str());
    }

}  // namespace twrouter

#endif
