#ifndef TWROUTER_VIOLATION_HPP_
#define TWROUTER_VIOLATION_HPP_

#include <string>
#include <vector>

namespace twrouter {

    struct ConstraintViolation {
        std::string label;
        // Amount by which the constraint is missed (always positive).
        double slack = 0.0;
    };

    // Empty means valid.
    using ViolationReport = std::vector<ConstraintViolation>;

}  // namespace twrouter

#endif
