#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "mvprag/error.hpp"
#include "mvprag/evaluation.hpp"

using namespace mvprag;

namespace {

AttrOutcome value_of(std::string v, bool ood = false) {
  return AttrOutcome{OutcomeKind::Value, std::move(v), ood};
}

AttrOutcome null_outcome() { return AttrOutcome{OutcomeKind::Null, "", false}; }
AttrOutcome unknown_outcome() { return AttrOutcome{OutcomeKind::Unknown, "", false}; }

EvalInstance inst(std::string pid, std::string attr, std::vector<std::string> gt,
                  AttrOutcome outcome, std::vector<std::string> candidates = {}) {
  return EvalInstance{std::move(pid), std::move(attr), std::move(gt),
                      std::move(outcome), std::move(candidates)};
}

// The confusion grid written out the long way, as an independent reference.
void reference_tally(const EvalInstance& i, ConfusionCounts& c) {
  const bool has_gt = !i.ground_truth.empty();
  const bool has_pred = i.outcome.kind == OutcomeKind::Value;
  if (!has_gt && !has_pred) {
    ++c.tn;
  } else if (!has_gt && has_pred) {
    ++c.fp;
  } else if (has_gt && !has_pred) {
    ++c.fn;
  } else {
    const bool hit = std::find(i.ground_truth.begin(), i.ground_truth.end(),
                               i.outcome.value) != i.ground_truth.end();
    if (hit) {
      ++c.tp;
    } else {
      ++c.fp;  // a wrong value both asserts a falsehood...
      ++c.fn;  // ...and misses the annotated truth
    }
  }
}

}  // namespace

TEST_CASE("each confusion cell classifies as documented") {
  CHECK(classify_instance({"A"}, value_of("A")) == Cell::TruePositive);
  CHECK(classify_instance({"A", "B"}, value_of("B")) == Cell::TruePositive);
  CHECK(classify_instance({}, value_of("A")) == Cell::FalsePositive);
  CHECK(classify_instance({"A"}, null_outcome()) == Cell::FalseNegative);
  CHECK(classify_instance({"A"}, unknown_outcome()) == Cell::FalseNegative);
  CHECK(classify_instance({}, null_outcome()) == Cell::TrueNegative);
  CHECK(classify_instance({}, unknown_outcome()) == Cell::TrueNegative);
  CHECK(classify_instance({"A"}, value_of("B")) == Cell::Mismatch);

  CHECK(cell_name(Cell::TruePositive) == "tp");
  CHECK(cell_name(Cell::Mismatch) == "mismatch");
}

TEST_CASE("ground truth matching is exact, not case-folded") {
  CHECK(classify_instance({"Nikon"}, value_of("nikon")) == Cell::Mismatch);
  CHECK(classify_instance({"Nikon"}, value_of("Nikon ")) == Cell::Mismatch);
}

TEST_CASE("the five-instance worked example scores exactly one third") {
  const std::vector<EvalInstance> instances = {
      inst("p1", "Brand", {"Nikon"}, value_of("Nikon")),       // tp
      inst("p2", "Brand", {}, value_of("Canon")),              // fp
      inst("p3", "Brand", {"Sony"}, value_of("Canon")),        // fp + fn
      inst("p4", "Brand", {"Nikon"}, null_outcome()),          // fn
      inst("p5", "Brand", {}, unknown_outcome()),              // tn
  };
  const EvalReport report = micro_scores(instances);
  CHECK(report.counts == ConfusionCounts{1, 2, 2, 1});
  CHECK(report.cells == CellCounts{1, 1, 1, 1, 1});
  CHECK(report.cells.total() == 5);
  CHECK(report.instance_count == 5);
  // One wrong value inflates fp and fn together, dragging all three metrics
  // to exactly 1/3.
  CHECK(report.precision == 1.0 / 3.0);
  CHECK(report.recall == 1.0 / 3.0);
  CHECK(report.f1 == 1.0 / 3.0);
}

TEST_CASE("micro scores agree with a long-hand tally on random instances") {
  std::mt19937_64 rng(424242);
  std::vector<EvalInstance> instances;
  ConfusionCounts expect;
  const std::vector<std::string> values = {"A", "B", "C", "D"};
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> gt;
    for (const std::string& v : values) {
      if (rng() % 4 == 0) gt.push_back(v);
    }
    AttrOutcome outcome;
    switch (rng() % 4) {
      case 0: outcome = null_outcome(); break;
      case 1: outcome = unknown_outcome(); break;
      default: outcome = value_of(values[rng() % values.size()]); break;
    }
    EvalInstance in = inst("p" + std::to_string(i), "attr", gt, outcome);
    reference_tally(in, expect);
    instances.push_back(std::move(in));
  }
  const EvalReport report = micro_scores(instances);
  CHECK(report.counts == expect);
  const double tp = static_cast<double>(expect.tp);
  CHECK(report.precision == tp / static_cast<double>(expect.tp + expect.fp));
  CHECK(report.recall == tp / static_cast<double>(expect.tp + expect.fn));
}

TEST_CASE("zero denominators degrade to zero, not NaN") {
  // Only true negatives: no positive predictions, no positive truth.
  const EvalReport report =
      micro_scores({inst("p1", "a", {}, null_outcome()),
                    inst("p2", "a", {}, unknown_outcome())});
  CHECK(report.precision == 0.0);
  CHECK(report.recall == 0.0);
  CHECK(report.f1 == 0.0);
  CHECK(report.counts == ConfusionCounts{0, 0, 0, 2});
}

TEST_CASE("an empty instance set is an error, not a report of zeros") {
  CHECK_THROWS_WITH_AS(micro_scores({}), doctest::Contains("empty instance set"),
                       Error);
  try {
    micro_scores({});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoInstances);
  }
}

TEST_CASE("prediction-kind diagnostics are tracked separately from cells") {
  const EvalReport report = micro_scores({
      inst("p1", "a", {"A"}, null_outcome()),     // fn via null
      inst("p2", "a", {"A"}, unknown_outcome()),  // fn via unknown
      inst("p3", "a", {}, null_outcome()),        // tn via null
      inst("p4", "a", {"A"}, value_of("A", /*ood=*/true)),  // generated tp
  });
  CHECK(report.diagnostics.null_predictions == 2);
  CHECK(report.diagnostics.unknown_predictions == 1);
  CHECK(report.diagnostics.ood_tp == 1);
  CHECK(report.counts.fn == 2);
  CHECK(report.counts.tn == 1);
  CHECK(report.counts.tp == 1);
}

TEST_CASE("coverage counts candidate overlap over non-empty ground truth") {
  const std::vector<EvalInstance> instances = {
      inst("p1", "a", {"A"}, null_outcome(), {"A", "B", "None"}),   // covered
      inst("p2", "a", {"A"}, null_outcome(), {"B", "None"}),        // not covered
      inst("p3", "a", {"A", "C"}, null_outcome(), {"C"}),           // covered
      inst("p4", "a", {}, null_outcome(), {"A"}),                   // excluded
  };
  CHECK(coverage(instances) == 2.0 / 3.0);
}

TEST_CASE("the null marker never counts as covering") {
  // "None" is a protocol token; even if the annotation somehow contained it,
  // candidate overlap must come from a real value.
  const std::vector<EvalInstance> instances = {
      inst("p1", "a", {"None"}, null_outcome(), {"None"}),
  };
  CHECK(coverage(instances) == 0.0);
}

TEST_CASE("coverage requires at least one non-empty ground truth") {
  CHECK_THROWS_WITH_AS(coverage({inst("p1", "a", {}, null_outcome(), {"A"})}),
                       doctest::Contains("no instance has non-empty ground truth"),
                       Error);
  try {
    coverage({inst("p1", "a", {}, null_outcome(), {"A"})});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoNonEmptyGroundTruth);
  }
}

TEST_CASE("the full report ties scores, coverage, and diagnostics together") {
  const std::vector<EvalInstance> instances = {
      inst("p1", "a", {"A"}, value_of("A"), {"A", "None"}),
      inst("p2", "a", {"B"}, null_outcome(), {"C", "None"}),
      inst("p3", "a", {}, null_outcome(), {"C", "None"}),
  };
  const EvalReport report = build_report(instances);
  CHECK(report.counts == ConfusionCounts{1, 0, 1, 1});
  CHECK(report.coverage == 0.5);
  CHECK(report.diagnostics.nonempty_gt == 2);
  CHECK(report.diagnostics.covered == 1);
  CHECK(report.coverage ==
        static_cast<double>(report.diagnostics.covered) /
            static_cast<double>(report.diagnostics.nonempty_gt));
}

TEST_CASE("the universe hash depends on the instance set, not its order") {
  std::vector<EvalInstance> instances = {
      inst("p1", "a", {"A"}, value_of("A")),
      inst("p2", "b", {}, null_outcome()),
      inst("p3", "a", {"B"}, unknown_outcome()),
  };
  const std::string forward = micro_scores(instances).universe_hash;
  std::reverse(instances.begin(), instances.end());
  CHECK(micro_scores(instances).universe_hash == forward);
  // Outcomes do not perturb the hash; membership does.
  instances[0].outcome = null_outcome();
  CHECK(micro_scores(instances).universe_hash == forward);
  instances.pop_back();
  CHECK(micro_scores(instances).universe_hash != forward);
}

TEST_CASE("only reports over the same universe are comparable") {
  const std::vector<EvalInstance> base = {
      inst("p1", "a", {"A"}, value_of("A")),
      inst("p2", "a", {"B"}, null_outcome()),
  };
  std::vector<EvalInstance> improved = base;
  improved[1].outcome = value_of("B");

  const EvalReport before = micro_scores(base);
  const EvalReport after = micro_scores(improved);
  const auto deltas = compare_reports(before, after);
  REQUIRE(deltas.size() == 4);
  CHECK(deltas[0].metric == "precision");
  CHECK(deltas[1].metric == "recall");
  CHECK(deltas[1].a == 0.5);
  CHECK(deltas[1].b == 1.0);
  CHECK(deltas[1].delta == 0.5);

  const EvalReport other =
      micro_scores({inst("q9", "z", {"A"}, value_of("A"))});
  CHECK_THROWS_WITH_AS(compare_reports(before, other),
                       doctest::Contains("different instance universes"), Error);
  try {
    compare_reports(before, other);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UniverseMismatch);
  }
}

TEST_CASE("sweep tables round-trip through CSV exactly") {
  const std::vector<SweepPoint> points = {
      {1, 0.8879310344827587, 1.0, 0.8879310344827587, 0.9406392694063926},
      {2, 0.9664, 1.0, 0.9664, 0.982914},
      {8, 1.0, 1.0, 1.0, 1.0},
  };
  const std::string csv = sweep_csv(points);
  CHECK(csv.rfind("param,coverage,precision,recall,f1\n", 0) == 0);
  const auto parsed = parse_sweep_csv(csv);
  REQUIRE(parsed.size() == points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK(parsed[i].param == points[i].param);
    // Shortest-round-trip formatting: doubles come back bit-identical.
    CHECK(parsed[i].coverage == points[i].coverage);
    CHECK(parsed[i].precision == points[i].precision);
    CHECK(parsed[i].recall == points[i].recall);
    CHECK(parsed[i].f1 == points[i].f1);
  }
}

TEST_CASE("malformed sweep CSV is rejected") {
  CHECK_THROWS_WITH_AS(parse_sweep_csv("param,coverage\n1,0.5\n"),
                       doctest::Contains("bad header"), Error);
  CHECK_THROWS_WITH_AS(
      parse_sweep_csv("param,coverage,precision,recall,f1\n1,0.5,1.0\n"),
      doctest::Contains("has 3 fields"), Error);
  CHECK(parse_sweep_csv("param,coverage,precision,recall,f1\n").empty());
}
