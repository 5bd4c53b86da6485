#ifndef BRANCHHULL_INSTANCE_IO_HPP_
#define BRANCHHULL_INSTANCE_IO_HPP_

#include <optional>
#include <string>
#include <utility>

#include "branchhull/core.hpp"

namespace branchhull {

/// Shortest-free decimal form with 17 significant digits ("%.17g").
std::string format_double(double x);

/// Instance document:
///   {"K","N","L","B","C","y","s","seed","noise":{"kind","alpha","epsilon"},
///    "truth":{"h","m","xi","y_hat"}}
/// Matrices are arrays of rows. "truth" is written only when given.
std::string instance_to_json(const ProblemInstance& instance,
                             const GroundTruth* truth = nullptr);

/// Parses an instance document; throws std::runtime_error on malformed input.
std::pair<ProblemInstance, std::optional<GroundTruth>> instance_from_json(
    const std::string& text);

void write_instance(const std::string& path, const ProblemInstance& instance,
                    const GroundTruth* truth = nullptr);

std::pair<ProblemInstance, std::optional<GroundTruth>> read_instance(
    const std::string& path);

}  // namespace branchhull

#endif  // BRANCHHULL_INSTANCE_IO_HPP_
