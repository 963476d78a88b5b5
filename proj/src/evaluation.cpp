#include "mvprag/evaluation.hpp"

#include <algorithm>
#include <charconv>

#include "mvprag/error.hpp"
#include "mvprag/text.hpp"

namespace mvprag {

namespace {

bool predicted_empty(const AttrOutcome& outcome) {
  // Null and Unknown both evaluate as "predicted empty set"; they stay
  // distinct in the diagnostics only.
  return outcome.kind != OutcomeKind::Value;
}

bool in_ground_truth(const std::vector<std::string>& ground_truth,
                     const std::string& value) {
  return std::find(ground_truth.begin(), ground_truth.end(), value) !=
         ground_truth.end();
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace

std::string_view cell_name(Cell cell) {
  switch (cell) {
    case Cell::TruePositive: return "tp";
    case Cell::FalsePositive: return "fp";
    case Cell::FalseNegative: return "fn";
    case Cell::TrueNegative: return "tn";
    case Cell::Mismatch: return "mismatch";
  }
  return "?";
}

Cell classify_instance(const std::vector<std::string>& ground_truth,
                       const AttrOutcome& outcome) {
  const bool empty_prediction = predicted_empty(outcome);
  if (ground_truth.empty()) {
    return empty_prediction ? Cell::TrueNegative : Cell::FalsePositive;
  }
  if (empty_prediction) return Cell::FalseNegative;
  return in_ground_truth(ground_truth, outcome.value) ? Cell::TruePositive
                                                      : Cell::Mismatch;
}

EvalReport micro_scores(const std::vector<EvalInstance>& instances) {
  if (instances.empty()) {
    raise(ErrorCode::NoInstances, "micro_scores: empty instance set");
  }
  EvalReport report;
  report.instance_count = instances.size();

  std::vector<std::string> ids;
  ids.reserve(instances.size());
  for (const EvalInstance& inst : instances) {
    const Cell cell = classify_instance(inst.ground_truth, inst.outcome);
    switch (cell) {
      case Cell::TruePositive:
        ++report.counts.tp;
        ++report.cells.tp;
        if (inst.outcome.ood) ++report.diagnostics.ood_tp;
        break;
      case Cell::FalsePositive:
        ++report.counts.fp;
        ++report.cells.fp_only;
        break;
      case Cell::FalseNegative:
        ++report.counts.fn;
        ++report.cells.fn_only;
        break;
      case Cell::TrueNegative:
        ++report.counts.tn;
        ++report.cells.tn;
        break;
      case Cell::Mismatch:
        ++report.counts.fp;
        ++report.counts.fn;
        ++report.cells.mismatch;
        break;
    }
    if (inst.outcome.kind == OutcomeKind::Null) ++report.diagnostics.null_predictions;
    if (inst.outcome.kind == OutcomeKind::Unknown) {
      ++report.diagnostics.unknown_predictions;
    }
    ids.push_back(inst.product_id + '\x1f' + inst.attribute);
  }

  const double tp = static_cast<double>(report.counts.tp);
  const double fp = static_cast<double>(report.counts.fp);
  const double fn = static_cast<double>(report.counts.fn);
  report.precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
  report.recall = (tp + fn) > 0.0 ? tp / (tp + fn) : 0.0;
  report.f1 = (report.precision + report.recall) > 0.0
                  ? 2.0 * report.precision * report.recall /
                        (report.precision + report.recall)
                  : 0.0;

  std::sort(ids.begin(), ids.end());
  std::string joined;
  for (const std::string& id : ids) {
    joined += id;
    joined += '\n';
  }
  report.universe_hash = text::fnv1a64_hex(joined);
  return report;
}

double coverage(const std::vector<EvalInstance>& instances) {
  std::uint64_t nonempty = 0;
  std::uint64_t covered = 0;
  for (const EvalInstance& inst : instances) {
    if (inst.ground_truth.empty()) continue;
    ++nonempty;
    for (const std::string& candidate : inst.candidates) {
      if (candidate == kNullMarker) continue;
      if (in_ground_truth(inst.ground_truth, candidate)) {
        ++covered;
        break;
      }
    }
  }
  if (nonempty == 0) {
    raise(ErrorCode::NoNonEmptyGroundTruth,
          "coverage: no instance has non-empty ground truth");
  }
  return static_cast<double>(covered) / static_cast<double>(nonempty);
}

EvalReport build_report(const std::vector<EvalInstance>& instances) {
  EvalReport report = micro_scores(instances);
  for (const EvalInstance& inst : instances) {
    if (inst.ground_truth.empty()) continue;
    ++report.diagnostics.nonempty_gt;
    for (const std::string& candidate : inst.candidates) {
      if (candidate == kNullMarker) continue;
      if (in_ground_truth(inst.ground_truth, candidate)) {
        ++report.diagnostics.covered;
        break;
      }
    }
  }
  report.coverage = coverage(instances);
  return report;
}

std::vector<MetricDelta> compare_reports(const EvalReport& a, const EvalReport& b) {
  if (a.instance_count != b.instance_count || a.universe_hash != b.universe_hash) {
    raise(ErrorCode::UniverseMismatch,
          "reports cover different instance universes (" +
              std::to_string(a.instance_count) + "/" + a.universe_hash + " vs " +
              std::to_string(b.instance_count) + "/" + b.universe_hash + ")");
  }
  auto row = [](const char* name, double x, double y) {
    return MetricDelta{name, x, y, y - x};
  };
  return {row("precision", a.precision, b.precision),
          row("recall", a.recall, b.recall), row("f1", a.f1, b.f1),
          row("coverage", a.coverage, b.coverage)};
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "param,coverage,precision,recall,f1\n";
  for (const SweepPoint& p : points) {
    out += std::to_string(p.param) + "," + format_double(p.coverage) + "," +
           format_double(p.precision) + "," + format_double(p.recall) + "," +
           format_double(p.f1) + "\n";
  }
  return out;
}

std::vector<SweepPoint> parse_sweep_csv(const std::string& csv) {
  std::vector<SweepPoint> points;
  const std::vector<std::string> lines = text::split_lines(csv);
  if (lines.empty() || lines[0] != "param,coverage,precision,recall,f1") {
    raise(ErrorCode::Parse, "sweep CSV: bad header");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = lines[i].find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(lines[i].substr(start));
        break;
      }
      fields.push_back(lines[i].substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 5) {
      raise(ErrorCode::Parse, "sweep CSV: row " + std::to_string(i) + " has " +
                                  std::to_string(fields.size()) + " fields");
    }
    SweepPoint p;
    p.param = static_cast<std::size_t>(std::stoull(fields[0]));
    p.coverage = std::stod(fields[1]);
    p.precision = std::stod(fields[2]);
    p.recall = std::stod(fields[3]);
    p.f1 = std::stod(fields[4]);
    points.push_back(p);
  }
  return points;
}

}  // namespace mvprag
