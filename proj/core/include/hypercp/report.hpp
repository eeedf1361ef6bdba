#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hypercp/config.hpp"
#include "hypercp/engine.hpp"

namespace hypercp {

/// Per-(period, variant) aggregates over replications.
struct AggregateRow {
  double period_s = 0.0;
  Variant variant = Variant::estimated;
  int n = 0;
  double mean_direction_error_deg = 0.0, se_direction_error_deg = 0.0;
  double mean_offset_error_cm = 0.0, se_offset_error_cm = 0.0;
  double mean_overflow_rate = 0.0, se_overflow_rate = 0.0;
  double mean_battery_fraction = 0.0, se_battery_fraction = 0.0;
  std::uint64_t generated = 0, delivered = 0, dropped = 0;
  bool conservation_ok = true;
  double max_energy_rel_err = 0.0;
};

std::vector<AggregateRow> aggregate(const SweepResult& result);

/// results.csv: one row per (period, variant, replication), stable order,
/// floats at 9 significant digits.
void write_results_csv(std::ostream& os, const SweepResult& result);

/// summary.json: per-(period, variant) means and standard errors.
void write_summary_json(std::ostream& os, const SweepResult& result,
                        std::uint64_t config_hash);

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string figure;  ///< sweep figure tag ("fig4".."fig7") or "-"
  bool evaluable = false;
  bool pass = false;
  std::string detail;
};

/// Evaluates the acceptance criteria. 1-5 and 8 read the sweep table;
/// 6, 7 and 9 run their randomized/synthetic suites inline; 10 re-executes
/// one sweep cell and compares its serialized row byte-for-byte.
std::vector<CriterionResult> evaluate_criteria(const SweepResult& result,
                                               const RunConfig& base);

bool all_pass(const std::vector<CriterionResult>& criteria);

/// Plain-text + JSON report pair with one line per criterion.
void write_repro_report_text(std::ostream& os,
                             const std::vector<CriterionResult>& criteria,
                             const std::string& preset,
                             std::uint64_t config_hash);
void write_repro_report_json(std::ostream& os,
                             const std::vector<CriterionResult>& criteria,
                             const std::string& preset,
                             std::uint64_t config_hash);

// Randomized suites behind criteria 6 and 7, reusable from tests.
// Both return the number of failures (0 expected).
int theorem_oracle_mismatches(int trials, std::uint64_t seed);
int identity_violations(int trials, std::uint64_t seed);

/// Synthetic estimator-recovery suite behind criterion 9.
/// Returns a human-readable failure description, empty on success.
std::string estimator_recovery_failures();

}  // namespace hypercp
