#include <doctest.h>

#include "mvprag/corpus.hpp"
#include "mvprag/error.hpp"
#include "mvprag/io.hpp"
#include "test_util.hpp"

using namespace mvprag;

namespace {

std::vector<Product> ingest_from_string(const testutil::TempDir& dir,
                                        const std::string& content,
                                        const Taxonomy& taxonomy) {
  const auto path = dir.file("corpus.jsonl");
  io::atomic_write(path, content);
  return ingest_products(path, taxonomy);
}

}  // namespace

TEST_CASE("ingest basic product") {
  testutil::TempDir dir("corpus");
  const auto products = ingest_from_string(
      dir,
      R"({"id":"p1","title":"Nikon D810 cover","description":"with button",)"
      R"("category":"SLR body cover","labels":{"Brand":["Nikon"],"Condition":[]}})"
      "\n",
      testutil::camera_taxonomy());
  REQUIRE(products.size() == 1);
  const Product& p = products[0];
  CHECK(p.id == "p1");
  CHECK(p.title == "Nikon D810 cover");
  CHECK(p.description == "with button");
  CHECK(p.category == "SLR body cover");
  REQUIRE(p.labels.size() == 2);
  CHECK(p.labels[0].attribute == "Brand");
  REQUIRE(p.labels[0].values.size() == 1);
  CHECK(p.labels[0].values[0].value == "Nikon");
  CHECK(p.labels[0].values[0].in_taxonomy);
  // Condition carries an explicit empty list: annotated as "no such value".
  CHECK(p.labels[1].attribute == "Condition");
  CHECK(p.labels[1].values.empty());
}

TEST_CASE("out-of-taxonomy label values are flagged, not rejected") {
  testutil::TempDir dir("corpus");
  const Taxonomy taxonomy = testutil::camera_taxonomy();
  const auto products = ingest_from_string(
      dir,
      R"({"id":"p1","title":"t","description":"d","category":"SLR body cover",)"
      R"("labels":{"Brand":["Tamron","Nikon"]}})",
      taxonomy);
  REQUIRE(products.size() == 1);
  const LabeledAttribute* brand = products[0].find_label("Brand");
  REQUIRE(brand != nullptr);
  REQUIRE(brand->values.size() == 2);
  CHECK_FALSE(brand->values[0].in_taxonomy);  // Tamron is not in the taxonomy
  CHECK(brand->values[1].in_taxonomy);
  // The flag must agree with direct taxonomy membership for every value.
  for (const LabelValue& lv : brand->values) {
    CHECK(lv.in_taxonomy == taxonomy.has_value("SLR body cover", "Brand", lv.value));
  }
}

TEST_CASE("products without labels and blank lines are accepted") {
  testutil::TempDir dir("corpus");
  const auto products = ingest_from_string(
      dir,
      "\n"
      R"({"id":"p1","title":"t","description":"d","category":"SLR body cover"})"
      "\n\n",
      testutil::camera_taxonomy());
  REQUIRE(products.size() == 1);
  CHECK(products[0].labels.empty());
}

TEST_CASE("ingest canonicalizes text fields") {
  testutil::TempDir dir("corpus");
  // "é" written as e + combining acute must compose, surrounding space must trim.
  const auto products = ingest_from_string(
      dir,
      "{\"id\":\"  p1  \",\"title\":\"Cam\\u00e9ra\",\"description\":\"d\","
      "\"category\":\"SLR body cover\",\"labels\":{\"Brand\":[\"Nikon\\u0301\"]}}",
      testutil::camera_taxonomy());
  REQUIRE(products.size() == 1);
  CHECK(products[0].id == "p1");
  CHECK(products[0].title == "Caméra");
  // NFC of "Nikon" + combining acute composes the trailing n into ń.
  CHECK(products[0].labels[0].values[0].value == "Nikoń");
  CHECK_FALSE(products[0].labels[0].values[0].in_taxonomy);
}

TEST_CASE("unknown category is rejected") {
  testutil::TempDir dir("corpus");
  CHECK_THROWS_WITH_AS(
      ingest_from_string(dir,
                         R"({"id":"p1","title":"t","description":"d","category":"Bag"})",
                         testutil::camera_taxonomy()),
      doctest::Contains("unknown category"), Error);
  try {
    ingest_from_string(dir,
                       R"({"id":"p1","title":"t","description":"d","category":"Bag"})",
                       testutil::camera_taxonomy());
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownCategory);
  }
}

TEST_CASE("label for attribute outside the category schema is rejected") {
  testutil::TempDir dir("corpus");
  CHECK_THROWS_WITH_AS(
      ingest_from_string(
          dir,
          R"({"id":"p1","title":"t","description":"d","category":"SLR body cover",)"
          R"("labels":{"Color":["red"]}})",
          testutil::camera_taxonomy()),
      doctest::Contains("not in schema"), Error);
}

TEST_CASE("label attributes that canonicalize to the same name are rejected") {
  testutil::TempDir dir("corpus");
  // Distinct JSON keys, same attribute after trimming.
  CHECK_THROWS_WITH_AS(
      ingest_from_string(
          dir,
          R"({"id":"p1","title":"t","description":"d","category":"SLR body cover",)"
          R"("labels":{"Brand":["Nikon"]," Brand ":["Canon"]}})",
          testutil::camera_taxonomy()),
      doctest::Contains("duplicate label attribute"), Error);
}

TEST_CASE("reserved null marker cannot be a label value") {
  testutil::TempDir dir("corpus");
  CHECK_THROWS_WITH_AS(
      ingest_from_string(
          dir,
          R"({"id":"p1","title":"t","description":"d","category":"SLR body cover",)"
          R"("labels":{"Brand":["None"]}})",
          testutil::camera_taxonomy()),
      doctest::Contains("reserved null marker"), Error);
}

TEST_CASE("empty and duplicate label values are rejected") {
  testutil::TempDir dir("corpus");
  CHECK_THROWS_WITH_AS(
      ingest_from_string(
          dir,
          R"({"id":"p1","title":"t","description":"d","category":"SLR body cover",)"
          R"("labels":{"Brand":["  "]}})",
          testutil::camera_taxonomy()),
      doctest::Contains("empty label value"), Error);
  CHECK_THROWS_WITH_AS(
      ingest_from_string(
          dir,
          R"({"id":"p1","title":"t","description":"d","category":"SLR body cover",)"
          R"("labels":{"Brand":["Nikon","Nikon "]}})",
          testutil::camera_taxonomy()),
      doctest::Contains("duplicate label value"), Error);
}

TEST_CASE("duplicate product ids are rejected") {
  testutil::TempDir dir("corpus");
  const std::string line =
      R"({"id":"p1","title":"t","description":"d","category":"SLR body cover"})";
  CHECK_THROWS_WITH_AS(
      ingest_from_string(dir, line + "\n" + line + "\n", testutil::camera_taxonomy()),
      doctest::Contains("duplicate product id"), Error);
}

TEST_CASE("malformed product records are rejected") {
  testutil::TempDir dir("corpus");
  const Taxonomy taxonomy = testutil::camera_taxonomy();
  CHECK_THROWS_WITH_AS(
      ingest_from_string(dir, R"({"id":"p1","title":"t","description":"d"})", taxonomy),
      doctest::Contains("missing or non-string field 'category'"), Error);
  CHECK_THROWS_WITH_AS(
      ingest_from_string(
          dir,
          R"({"id":"  ","title":"t","description":"d","category":"SLR body cover"})",
          taxonomy),
      doctest::Contains("empty product id"), Error);
  CHECK_THROWS_WITH_AS(
      ingest_from_string(
          dir,
          R"({"id":"p1","title":"t","description":"d","category":"SLR body cover",)"
          R"("labels":[]})",
          taxonomy),
      doctest::Contains("labels must be an object"), Error);
  CHECK_THROWS_WITH_AS(
      ingest_from_string(
          dir,
          R"({"id":"p1","title":"t","description":"d","category":"SLR body cover",)"
          R"("labels":{"Brand":"Nikon"}})",
          taxonomy),
      doctest::Contains("label values must be an array"), Error);
  CHECK_THROWS_WITH_AS(
      ingest_from_string(
          dir,
          R"({"id":"p1","title":"t","description":"d","category":"SLR body cover",)"
          R"("labels":{"Brand":[7]}})",
          taxonomy),
      doctest::Contains("label values must be strings"), Error);
}

TEST_CASE("parse errors carry the file position") {
  testutil::TempDir dir("corpus");
  try {
    ingest_from_string(dir, "{}\n{not json", testutil::camera_taxonomy());
    FAIL("expected parse failure");
  } catch (const Error& e) {
    // Line 1 already fails field validation, so point at it explicitly.
    CHECK(std::string(e.what()).find(":1") != std::string::npos);
  }
}

TEST_CASE("serialize and re-ingest is the identity") {
  testutil::TempDir dir("corpus");
  const Taxonomy taxonomy = testutil::camera_taxonomy();
  std::vector<Product> products;
  products.push_back(testutil::nikon_query_product());
  for (const Product& p : testutil::camera_pool()) products.push_back(p);
  // One out-of-taxonomy value: the flag is not serialized, it is recomputed.
  Product extra = testutil::make_product("p-ood", "Tamron lens cap", "round",
                                         "SLR body cover");
  testutil::add_label(extra, "Brand", {"Tamron"}, false);
  products.push_back(extra);

  const auto path = dir.file("roundtrip.jsonl");
  save_products(path, products);
  const auto again = ingest_products(path, taxonomy);
  CHECK(again == products);
  // Serialization itself is stable, too.
  CHECK(serialize_products(again) == serialize_products(products));
}

TEST_CASE("render_query joins title and description") {
  Product p = testutil::make_product("p1", "Canon 60d back cover set",
                                     "button set button", "SLR body cover");
  CHECK(render_query(p) == "Canon 60d back cover set button set button");
  p.description.clear();
  CHECK(render_query(p) == "Canon 60d back cover set");
  p.title.clear();
  CHECK(render_query(p).empty());
  p.description = "button set button";
  CHECK(render_query(p) == "button set button");
}

TEST_CASE("corpus stats count annotated and null pairs") {
  std::vector<Product> products;
  products.push_back(testutil::nikon_query_product());  // Brand + null Condition
  Product b = testutil::make_product("p2", "t", "d", "SLR body cover");
  testutil::add_label(b, "Brand", {"Canon"});
  testutil::add_label(b, "Condition", {"well used"});
  products.push_back(b);
  CHECK(corpus_stats(products) == CorpusStats{2, 4, 1});
  CHECK(corpus_stats({}) == CorpusStats{0, 0, 0});
}
