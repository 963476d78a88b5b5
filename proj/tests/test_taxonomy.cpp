#include <doctest.h>

#include <fstream>

#include "mvprag/error.hpp"
#include "mvprag/io.hpp"
#include "mvprag/taxonomy.hpp"
#include "test_util.hpp"

using namespace mvprag;

namespace {

Taxonomy load_from_string(const testutil::TempDir& dir, const std::string& content) {
  const auto path = dir.file("taxonomy.jsonl");
  io::atomic_write(path, content);
  return Taxonomy::load(path);
}

}  // namespace

TEST_CASE("load basic record") {
  testutil::TempDir dir("tax");
  const Taxonomy t = load_from_string(
      dir,
      R"({"category":"Bag","attribute":"Brand","values":["LV","Dior","Channel"]})"
      "\n");
  CHECK(t.categories() == std::vector<std::string>{"Bag"});
  CHECK(t.attribute_set("Bag") == std::vector<std::string>{"Brand"});
  CHECK(t.values_of("Bag", "Brand") ==
        std::vector<std::string>{"LV", "Dior", "Channel"});
  CHECK(t.triple_count() == 3);
}

TEST_CASE("empty file is rejected") {
  testutil::TempDir dir("tax");
  CHECK_THROWS_WITH_AS(load_from_string(dir, ""), doctest::Contains("no categories"),
                       Error);
}

TEST_CASE("duplicate value is rejected") {
  testutil::TempDir dir("tax");
  CHECK_THROWS_WITH_AS(
      load_from_string(
          dir, R"({"category":"Bag","attribute":"Brand","values":["LV","LV"]})"),
      doctest::Contains("duplicate value"), Error);
}

TEST_CASE("duplicate attribute within a category is rejected") {
  testutil::TempDir dir("tax");
  CHECK_THROWS_WITH_AS(
      load_from_string(dir,
                       R"({"category":"Bag","attribute":"Brand","values":["LV"]})"
                       "\n"
                       R"({"category":"Bag","attribute":"Brand","values":["Dior"]})"),
      doctest::Contains("duplicate attribute"), Error);
}

TEST_CASE("empty value list is rejected") {
  testutil::TempDir dir("tax");
  CHECK_THROWS_WITH_AS(
      load_from_string(dir, R"({"category":"Bag","attribute":"Brand","values":[]})"),
      doctest::Contains("empty value list"), Error);
}

TEST_CASE("null marker is not a legal taxonomy value") {
  testutil::TempDir dir("tax");
  CHECK_THROWS_WITH_AS(
      load_from_string(
          dir, R"({"category":"Bag","attribute":"Brand","values":["LV","None"]})"),
      doctest::Contains("reserved null marker"), Error);
}

TEST_CASE("parse error carries the line number") {
  testutil::TempDir dir("tax");
  const std::string good = R"({"category":"Bag","attribute":"Brand","values":["LV"]})";
  CHECK_THROWS_WITH_AS(load_from_string(dir, good + "\nnot json\n"),
                       doctest::Contains(":2"), Error);
}

TEST_CASE("identifiers are NFC-normalized and trimmed at load") {
  testutil::TempDir dir("tax");
  // Decomposed e-acute in the value; surrounding spaces on the attribute.
  const Taxonomy t = load_from_string(
      dir,
      "{\"category\":\"Bag\",\"attribute\":\" Brand \",\"values\":[\"Caf\\u0065\\u0301\"]}");
  CHECK(t.values_of("Bag", "Brand") == std::vector<std::string>{"Caf\xc3\xa9"});
  CHECK(t.has_value("Bag", "Brand", "Caf\xc3\xa9"));
}

TEST_CASE("unknown category and attribute are distinguished") {
  const Taxonomy t = testutil::camera_taxonomy();
  CHECK_THROWS_AS(t.attribute_set("Purse"), Error);
  try {
    t.values_of("Purse", "Brand");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownCategory);
  }
  try {
    t.values_of("SLR body cover", "Nonexistent");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownAttribute);
  }
}

TEST_CASE("schema order follows the input file") {
  testutil::TempDir dir("tax");
  const Taxonomy t = load_from_string(
      dir,
      R"({"category":"C","attribute":"Z","values":["v1"]})"
      "\n"
      R"({"category":"C","attribute":"A","values":["v2"]})"
      "\n"
      R"({"category":"C","attribute":"M","values":["v3"]})"
      "\n");
  CHECK(t.attribute_set("C") == std::vector<std::string>{"Z", "A", "M"});
}

TEST_CASE("serialize round-trips") {
  testutil::TempDir dir("tax");
  const Taxonomy t = testutil::camera_taxonomy();
  const auto path = dir.file("out.jsonl");
  t.save(path);
  const Taxonomy reloaded = Taxonomy::load(path);
  CHECK(t == reloaded);
  CHECK(reloaded.serialize() == t.serialize());
}

TEST_CASE("lookups are pure") {
  const Taxonomy t = testutil::camera_taxonomy();
  const auto first = t.values_of("SLR body cover", "Brand");
  const auto second = t.values_of("SLR body cover", "Brand");
  CHECK(first == second);
  CHECK(t.max_partition_size() == 3);
}
