#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "philap/existence.hpp"
#include "philap/homeo.hpp"
#include "philap/solveop.hpp"

namespace philap {

/// Pass/fail summary of lower <= S(h) <= upper on the grid.
struct BoundsSummary {
    double theta_bar = 0.0;
    double lower_at_theta = 0.0;
    double u_at_theta = 0.0;
    double upper_at_theta = 0.0;
    std::size_t violations = 0;
    /// Largest amount by which u leaves the envelope (<= 0 when it never does).
    double worst_excess = 0.0;
    double tolerance = 1e-6;
    bool pass = false;
};

BoundsSummary summarize_bounds(const BvpSolution& solution, const BoundEnvelope& envelope,
                               double tolerance = 1e-6);

/// Linear interpolation of node values.
double value_at(const SampledFunction& f, double x);

// JSON documents; keys in fixed order, doubles in shortest round-trip form,
// non-finite values as the strings "inf", "-inf", "nan".
std::string reports_json(const std::vector<HypothesisReport>& reports);
std::string certificate_json(const ExistenceCertificate& cert, const ProblemSpec& spec);
std::string bounds_json(const BoundsSummary& summary, const BoundEnvelope& envelope,
                        const BvpSolution& solution);

/// Columns sharing one grid; header `x,<names...>`, one row per node (node values).
void write_columns_csv(std::ostream& out,
                       const std::vector<std::pair<std::string, const SampledFunction*>>& columns);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Writes `content` to dir/name, creating dir; throws ConfigError on I/O failure.
void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content);

}  // namespace philap
