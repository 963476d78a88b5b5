#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mvprag/generation.hpp"

namespace mvprag {

// The five confusion outcomes. A mismatch (wrong non-empty prediction against
// non-empty ground truth) counts as both a false positive and a false
// negative.
enum class Cell { TruePositive, FalsePositive, FalseNegative, TrueNegative, Mismatch };

std::string_view cell_name(Cell cell);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  bool operator==(const ConfusionCounts&) const = default;
};

struct CellCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp_only = 0;
  std::uint64_t fn_only = 0;
  std::uint64_t tn = 0;
  std::uint64_t mismatch = 0;

  std::uint64_t total() const { return tp + fp_only + fn_only + tn + mismatch; }
  bool operator==(const CellCounts&) const = default;
};

// One evaluated (product, attribute) pair: annotated ground truth, the model
// outcome, and the retrieved candidate values (null marker included) for the
// coverage metric.
struct EvalInstance {
  std::string product_id;
  std::string attribute;
  std::vector<std::string> ground_truth;  // empty = null ground truth
  AttrOutcome outcome;
  std::vector<std::string> candidates;
};

Cell classify_instance(const std::vector<std::string>& ground_truth,
                       const AttrOutcome& outcome);

struct EvalDiagnostics {
  std::uint64_t null_predictions = 0;
  std::uint64_t unknown_predictions = 0;
  std::uint64_t ood_tp = 0;      // correct generations outside the taxonomy
  std::uint64_t covered = 0;     // non-empty-GT instances with candidate overlap
  std::uint64_t nonempty_gt = 0; // coverage denominator
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double coverage = 0.0;
  ConfusionCounts counts;
  CellCounts cells;
  std::uint64_t instance_count = 0;
  EvalDiagnostics diagnostics;
  // Identifies the instance universe (order-independent hash of ids) so
  // reports from different corpora cannot be compared silently.
  std::string universe_hash;
};

// Micro-averaged precision/recall/F1 over summed confusion counts;
// zero-denominator metrics are 0 by convention.
EvalReport micro_scores(const std::vector<EvalInstance>& instances);

// Fraction of non-empty-ground-truth instances whose candidates (null marker
// excluded) intersect the ground truth.
double coverage(const std::vector<EvalInstance>& instances);

// micro_scores + coverage + diagnostics in one report.
EvalReport build_report(const std::vector<EvalInstance>& instances);

struct MetricDelta {
  std::string metric;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  // b - a
};

std::vector<MetricDelta> compare_reports(const EvalReport& a, const EvalReport& b);

struct SweepPoint {
  std::size_t param = 0;
  double coverage = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// CSV with the fixed header "param,coverage,precision,recall,f1"; doubles are
// shortest-round-trip formatted so the file parses back to identical values.
std::string sweep_csv(const std::vector<SweepPoint>& points);
std::vector<SweepPoint> parse_sweep_csv(const std::string& csv);

}  // namespace mvprag
