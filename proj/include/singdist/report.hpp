#pragma once

#include <string>

#include "json.hpp"
#include "singdist/gcd.hpp"
#include "singdist/oracle.hpp"
#include "singdist/solver.hpp"

namespace singdist::report {

using Json = nlohmann::json;

inline constexpr int kSchema = 1;

/// Serializes with sorted keys, two-space indentation and every float at 17
/// significant digits. Non-finite floats become null.
std::string dump(const Json& j);

Json vector_json(const Vec& x);
Json trace_json(const std::vector<IterationRecord>& trace);
Json solve_json(const SolveResult& r);
Json certificate_json(const oracle::Certificate& c);
Json gcd_json(const gcd::GcdReport& r, bool with_coefficients);

}  // namespace singdist::report
