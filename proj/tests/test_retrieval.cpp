#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mvprag/embedding.hpp"
#include "mvprag/error.hpp"
#include "mvprag/io.hpp"
#include "mvprag/retrieval.hpp"
#include "test_util.hpp"

using namespace mvprag;

namespace {

Taxonomy gadget_taxonomy() {
  return Taxonomy::from_records(
      {{"gadget",
        "color",
        {"amber", "azure", "beige", "black", "bronze", "copper", "crimson", "cyan",
         "gold", "green", "indigo", "ivory"}},
       {"gadget", "material", {"steel", "brass", "oak"}}});
}

// Full-sort reference ranking over one value partition, sharing nothing with
// retrieve_values but the encoder and the scoring function.
std::vector<Candidate> rank_all_values(const std::string& query,
                                       const std::string& category,
                                       const std::string& attribute,
                                       const Taxonomy& taxonomy,
                                       const Encoder& encoder) {
  const Vec qv = encoder.encode(query);
  std::vector<Candidate> out;
  for (const std::string& value : taxonomy.values_of(category, attribute)) {
    const Vec vv = encoder.encode(value_prompt(category, attribute, value));
    out.push_back(Candidate{value, cosine(qv, vv)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.value < b.value;
  });
  return out;
}

bool same_candidates(const std::vector<Candidate>& a, const std::vector<Candidate>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].value != b[i].value) return false;
    // Scores must agree bit-for-bit: both sides run the identical float ops.
    if (a[i].score != b[i].score && !(std::isinf(a[i].score) && std::isinf(b[i].score)))
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("value prompts lowercase and collapse their fields") {
  CHECK(value_prompt("SLR body cover", "Brand", "Nikon") ==
        "a slr body cover with brand being nikon");
  CHECK(value_prompt(" Mixed  CASE ", "Attr\tName", "Two  Words") ==
        "a mixed case with attr name being two words");
}

TEST_CASE("retrieved values match a full-sort reference at every k") {
  const HashedNgramEncoder encoder(64);
  const Taxonomy taxonomy = gadget_taxonomy();
  const ValueIndex index = ValueIndex::build(taxonomy, encoder);
  CHECK(index.size() == taxonomy.triple_count());

  const std::vector<std::string> queries = {
      "a shiny copper gadget", "black and gold trim", "azure azure azure", "zzz"};
  for (const std::string& query : queries) {
    const auto reference = rank_all_values(query, "gadget", "color", taxonomy, encoder);
    for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{12},
                          std::size_t{50}}) {
      const CandidateSet got =
          retrieve_values(query, "gadget", "color", k, index, encoder);
      CHECK(got.attribute == "color");
      // The null marker trails every list exactly once, at minus infinity.
      REQUIRE(!got.candidates.empty());
      CHECK(got.candidates.back().value == kNullMarker);
      CHECK(got.candidates.back().score ==
            -std::numeric_limits<double>::infinity());
      CHECK(std::count_if(got.candidates.begin(), got.candidates.end(),
                          [](const Candidate& c) { return c.value == kNullMarker; }) ==
            1);

      auto expect = reference;
      if (expect.size() > k) expect.resize(k);
      auto head = got.candidates;
      head.pop_back();
      CHECK(same_candidates(head, expect));
    }
  }
}

TEST_CASE("equal-scoring values rank by ascending value id") {
  // Two distinct values whose corpus prompts coincide after lowercasing, so
  // their vectors and scores are bit-identical.
  const Taxonomy taxonomy =
      Taxonomy::from_records({{"gadget", "brand", {"Nikon", "NIKON", "Sony"}}});
  const HashedNgramEncoder encoder(64);
  const ValueIndex index = ValueIndex::build(taxonomy, encoder);
  const CandidateSet got =
      retrieve_values("nikon gear", "gadget", "brand", 3, index, encoder);
  REQUIRE(got.candidates.size() == 4);
  CHECK(got.candidates[0].score == got.candidates[1].score);
  CHECK(got.candidates[0].value == "NIKON");  // byte order: upper before lower
  CHECK(got.candidates[1].value == "Nikon");
  CHECK(got.candidates[2].value == "Sony");
}

TEST_CASE("degenerate queries score every value at minus infinity") {
  const HashedNgramEncoder encoder(32);
  const Taxonomy taxonomy = gadget_taxonomy();
  const ValueIndex index = ValueIndex::build(taxonomy, encoder);
  // "ab" is under three code points: the query vector is zero.
  const CandidateSet got = retrieve_values("ab", "gadget", "material", 2, index, encoder);
  REQUIRE(got.candidates.size() == 3);
  for (const Candidate& c : got.candidates) {
    CHECK(c.score == -std::numeric_limits<double>::infinity());
  }
  // All ties: ascending value order decides, marker still last.
  CHECK(got.candidates[0].value == "brass");
  CHECK(got.candidates[1].value == "oak");
  CHECK(got.candidates[2].value == kNullMarker);
}

TEST_CASE("value retrieval argument errors") {
  const HashedNgramEncoder encoder(32);
  const ValueIndex index = ValueIndex::build(gadget_taxonomy(), encoder);
  CHECK_THROWS_WITH_AS(retrieve_values("q", "gadget", "color", 0, index, encoder),
                       doctest::Contains("k must be >= 1"), Error);
  CHECK_THROWS_WITH_AS(retrieve_values("q", "widget", "color", 1, index, encoder),
                       doctest::Contains("no value partition"), Error);
  CHECK_THROWS_WITH_AS(retrieve_values("q", "gadget", "smell", 1, index, encoder),
                       doctest::Contains("no value partition"), Error);
  try {
    retrieve_values("q", "gadget", "smell", 1, index, encoder);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownPartition);
  }
}

TEST_CASE("value index snapshots round-trip") {
  testutil::TempDir dir("vidx");
  const HashedNgramEncoder encoder(32);
  const Taxonomy taxonomy = gadget_taxonomy();
  const ValueIndex built = ValueIndex::build(taxonomy, encoder);
  const auto path = dir.file("values.idx.jsonl");
  built.save(path);
  const ValueIndex loaded = ValueIndex::load(path, encoder);

  CHECK(loaded.size() == built.size());
  CHECK(loaded.encoder_identity() == built.encoder_identity());
  CHECK(loaded.dim() == built.dim());
  for (const char* attr : {"color", "material"}) {
    const auto& a = built.partition("gadget", attr);
    const auto& b = loaded.partition("gadget", attr);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].value == b[i].value);
      CHECK(a[i].prompt == b[i].prompt);
      CHECK(a[i].vector == b[i].vector);  // doubles survive JSON exactly
    }
  }
  // Same ranking either way.
  const auto q = "bronze or copper";
  CHECK(same_candidates(
      retrieve_values(q, "gadget", "color", 4, built, encoder).candidates,
      retrieve_values(q, "gadget", "color", 4, loaded, encoder).candidates));
}

TEST_CASE("snapshots refuse a different encoder") {
  testutil::TempDir dir("vidx");
  const auto path = dir.file("values.idx.jsonl");
  ValueIndex::build(gadget_taxonomy(), HashedNgramEncoder(32)).save(path);

  CHECK_THROWS_WITH_AS(ValueIndex::load(path, HashedNgramEncoder(64)),
                       doctest::Contains("does not match configured encoder"), Error);

  // Matching identity but doctored dimension field.
  io::atomic_write(path,
                   R"({"kind":"value_index","encoder":"hashed-ngram/dim=32",)"
                   R"("dim":16,"count":0})"
                   "\n");
  CHECK_THROWS_WITH_AS(ValueIndex::load(path, HashedNgramEncoder(32)),
                       doctest::Contains("snapshot dim"), Error);

  // Wrong snapshot kind entirely.
  io::atomic_write(path,
                   R"({"kind":"product_index","encoder":"hashed-ngram/dim=32",)"
                   R"("dim":32,"count":0})"
                   "\n");
  CHECK_THROWS_WITH_AS(ValueIndex::load(path, HashedNgramEncoder(32)),
                       doctest::Contains("not a value_index snapshot"), Error);

  io::atomic_write(path, "");
  CHECK_THROWS_WITH_AS(ValueIndex::load(path, HashedNgramEncoder(32)),
                       doctest::Contains("missing snapshot header"), Error);
}

TEST_CASE("few-shot retrieval matches a full-sort reference") {
  const HashedNgramEncoder encoder(64);
  const Taxonomy taxonomy = testutil::camera_taxonomy();
  std::vector<Product> pool = testutil::camera_pool();
  for (int i = 0; i < 6; ++i) {
    Product p = testutil::make_product("pool-x" + std::to_string(i),
                                       "camera cover variant " + std::to_string(i),
                                       "spare part", "SLR body cover");
    testutil::add_label(p, "Brand", {i % 2 ? "Nikon" : "Canon"});
    pool.push_back(p);
  }
  const ProductIndex index = ProductIndex::build(pool, encoder);
  CHECK(index.size() == pool.size());

  const std::string query = "Nikon D810 D800 body cover SLR body cover with button";
  // Reference: score every same-category pool product directly.
  struct Ref {
    std::string id;
    double score;
  };
  std::vector<Ref> reference;
  const Vec qv = encoder.encode(query);
  for (const Product& p : pool) {
    if (p.category != "SLR body cover") continue;
    reference.push_back(Ref{p.id, cosine(qv, encoder.encode(render_query(p)))});
  }
  std::sort(reference.begin(), reference.end(), [](const Ref& a, const Ref& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });

  for (std::size_t m : {std::size_t{1}, std::size_t{2}, std::size_t{100}}) {
    const auto shots =
        retrieve_products(query, "SLR body cover", m, index, encoder, "", taxonomy);
    REQUIRE(shots.size() == std::min(m, reference.size()));
    for (std::size_t i = 0; i < shots.size(); ++i) {
      CHECK(shots[i].product.id == reference[i].id);
      CHECK(shots[i].score == reference[i].score);
    }
  }
}

TEST_CASE("few-shot retrieval excludes the query product and other categories") {
  const HashedNgramEncoder encoder(64);
  const Taxonomy taxonomy = Taxonomy::from_records(
      {{"SLR body cover", "Brand", {"Nikon", "Canon", "Sony"}},
       {"Lens hood", "Brand", {"Nikon", "Canon", "Sony"}}});
  std::vector<Product> pool = testutil::camera_pool();
  Product other = testutil::make_product("pool-hood", "Nikon D810 D800 body cover",
                                         "SLR body cover with button", "Lens hood");
  pool.push_back(other);  // textually perfect match, wrong category

  const ProductIndex index = ProductIndex::build(pool, encoder);
  const auto shots = retrieve_products("Nikon D810 body cover", "SLR body cover", 10,
                                       index, encoder, "pool-sony", taxonomy);
  REQUIRE(shots.size() == 1);  // pool-sony excluded, pool-hood out of category
  CHECK(shots[0].product.id == "pool-canon");
}

TEST_CASE("equal-scoring products rank by ascending product id") {
  const HashedNgramEncoder encoder(32);
  const Taxonomy taxonomy = testutil::camera_taxonomy();
  std::vector<Product> pool;
  for (const char* id : {"pool-b", "pool-a", "pool-c"}) {
    pool.push_back(
        testutil::make_product(id, "identical title", "and text", "SLR body cover"));
  }
  const ProductIndex index = ProductIndex::build(pool, encoder);
  const auto shots = retrieve_products("identical title and text", "SLR body cover", 2,
                                       index, encoder, "", taxonomy);
  REQUIRE(shots.size() == 2);
  CHECK(shots[0].product.id == "pool-a");
  CHECK(shots[1].product.id == "pool-b");
  CHECK(shots[0].score == shots[1].score);
}

TEST_CASE("m of zero short-circuits before any partition lookup") {
  const HashedNgramEncoder encoder(32);
  const ProductIndex index = ProductIndex::build({}, encoder);
  // Even an unknown category is fine when no shots are requested.
  CHECK(retrieve_products("q", "no such category", 0, index, encoder, "",
                          testutil::camera_taxonomy())
            .empty());
  CHECK_THROWS_WITH_AS(retrieve_products("q", "no such category", 1, index, encoder,
                                         "", testutil::camera_taxonomy()),
                       doctest::Contains("no product partition"), Error);
}

TEST_CASE("few-shot labels cover the schema in order") {
  const HashedNgramEncoder encoder(64);
  const Taxonomy taxonomy = testutil::camera_taxonomy();
  const ProductIndex index = ProductIndex::build(testutil::camera_pool(), encoder);
  const auto shots = retrieve_products("Sony A7 camera body cover", "SLR body cover", 1,
                                       index, encoder, "", taxonomy);
  REQUIRE(shots.size() == 1);
  REQUIRE(shots[0].rendered_labels.size() == 2);
  CHECK(shots[0].rendered_labels[0].first == "Brand");
  CHECK(shots[0].rendered_labels[1].first == "Condition");
  for (const auto& [attr, value] : shots[0].rendered_labels) {
    CHECK(value == rendered_label_value(shots[0].product, attr));
  }
}

TEST_CASE("rendered label value picks the smallest, or the null marker") {
  Product p = testutil::make_product("p", "t", "d", "SLR body cover");
  testutil::add_label(p, "Brand", {"Sony", "Canon", "Nikon"});
  CHECK(rendered_label_value(p, "Brand") == "Canon");
  testutil::add_label(p, "Condition", {});
  CHECK(rendered_label_value(p, "Condition") == kNullMarker);  // empty ground truth
  CHECK(rendered_label_value(p, "Color") == kNullMarker);      // unannotated
}

TEST_CASE("product index snapshots round-trip") {
  testutil::TempDir dir("pidx");
  const HashedNgramEncoder encoder(32);
  const Taxonomy taxonomy = testutil::camera_taxonomy();
  std::vector<Product> pool = testutil::camera_pool();
  // One out-of-taxonomy label value survives the round trip with its flag.
  pool[0].labels[0].values.push_back(LabelValue{"Tamron", false});

  const ProductIndex built = ProductIndex::build(pool, encoder);
  const auto path = dir.file("products.idx.jsonl");
  built.save(path);
  const ProductIndex loaded = ProductIndex::load(path, encoder, taxonomy);

  CHECK(loaded.size() == built.size());
  const auto& a = built.partition("SLR body cover");
  const auto& b = loaded.partition("SLR body cover");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].product == b[i].product);
    CHECK(a[i].query == b[i].query);
    CHECK(a[i].vector == b[i].vector);
  }
  CHECK_THROWS_WITH_AS(ProductIndex::load(path, HashedNgramEncoder(64), taxonomy),
                       doctest::Contains("does not match configured encoder"), Error);
}
