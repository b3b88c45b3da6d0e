#include "fairml/csv.hpp"
#include "fairml/ingest.hpp"
#include "fairml/json_io.hpp"

#include "builders.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace fairml;

namespace {

Table table_of(const std::string& csv) {
  std::istringstream in(csv);
  return read_csv(in);
}

}  // namespace

TEST_CASE("read_csv parses header and rows, tolerating CRLF and blank lines") {
  const Table t = table_of("a,b\r\n1,2\n\n3,4\n");
  REQUIRE(t.names == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows() == 2);
  REQUIRE(t.cells[0][1] == "3");
  REQUIRE(t.cells[1][0] == "2");
}

TEST_CASE("read_csv rejects ragged rows") {
  REQUIRE_THROWS(table_of("a,b\n1\n"));
}

TEST_CASE("ingest builds the design matrix with a leading intercept") {
  const Dataset d = ingest_dataset(table_of("x,s,y\n2,0,1\n3,1,-1\n"),
                                   IngestSpec{"y", {"s"}, {}, LabelCoding::PlusMinusOne});
  REQUIRE(d.cols() == 3);
  REQUIRE(d.feature_names == std::vector<std::string>{"intercept", "x", "s"});
  REQUIRE(d.features(0, 0) == 1.0);
  REQUIRE(d.features(1, 1) == 3.0);
  REQUIRE(d.features(1, 2) == 1.0);
  REQUIRE((*d.labels)[1] == -1.0);
  REQUIRE(d.sensitive_column("s")[1] == 1.0);
}

TEST_CASE("ingest moves an existing all-ones column to the front") {
  const Dataset d = ingest_dataset(table_of("x,one,y\n2,1,1\n3,1,-1\n"),
                                   IngestSpec{"y", {}, {}, LabelCoding::PlusMinusOne});
  REQUIRE(d.cols() == 2);
  REQUIRE(d.feature_names == std::vector<std::string>{"one", "x"});
}

TEST_CASE("ingest recodes 0/1 labels to -1/+1") {
  const Dataset d = ingest_dataset(table_of("x,y\n2,0\n3,1\n"),
                                   IngestSpec{"y", {}, {}, LabelCoding::ZeroOne});
  REQUIRE((*d.labels)[0] == -1.0);
  REQUIRE((*d.labels)[1] == 1.0);
}

TEST_CASE("ingest rejects bad inputs by name") {
  REQUIRE_THROWS_WITH(
      ingest_dataset(table_of("x,y\n2,1\n3,-1\n"), IngestSpec{"z", {}, {}, {}}),
      Catch::Matchers::ContainsSubstring("z"));
  REQUIRE_THROWS_WITH(
      ingest_dataset(table_of("x,s,y\n2,2,1\n3,1,-1\n"), IngestSpec{"y", {"s"}, {}, {}}),
      Catch::Matchers::ContainsSubstring("s"));
  // three distinct label values
  REQUIRE_THROWS(ingest_dataset(table_of("x,y\n2,1\n3,-1\n4,0\n"), IngestSpec{"y", {}, {}, {}}));
  // non-numeric feature cell
  REQUIRE_THROWS_WITH(ingest_dataset(table_of("x,y\n2,1\nfoo,-1\n"), IngestSpec{"y", {}, {}, {}}),
                      Catch::Matchers::ContainsSubstring("foo"));
}

TEST_CASE("ingest maps a categorical group column by first appearance") {
  const Dataset d = ingest_dataset(table_of("x,g,y\n1,b,1\n2,a,-1\n3,b,1\n"),
                                   IngestSpec{"y", {}, "g", {}});
  REQUIRE(d.group_levels == std::vector<std::string>{"b", "a"});
  REQUIRE((*d.group_ids) == std::vector<int>{0, 1, 0});
  REQUIRE(d.cols() == 2);  // group column is not a design-matrix feature
}

TEST_CASE("dataset to csv and back is an identity") {
  Dataset d = builders::tiny({0.25, -3.5, 1e-9}, {0, 1, 1}, {1, -1, 1});
  d = builders::with_groups(std::move(d), {0, 1, 0}, 2);

  std::ostringstream out;
  write_dataset_csv(out, d);
  const Dataset back = ingest_dataset(table_of(out.str()),
                                      IngestSpec{"y", {"s"}, "group", LabelCoding::PlusMinusOne});

  REQUIRE(back.features == d.features);
  REQUIRE(*back.labels == *d.labels);
  REQUIRE(back.sensitive_column("s") == d.sensitive_column("s"));
  REQUIRE(*back.group_ids == *d.group_ids);
  REQUIRE(back.group_levels == d.group_levels);
}

TEST_CASE("coefficients serialize to json and back") {
  Coefficients c;
  c.beta = builders::vec({-2, 0.25, 1e-7});

  SECTION("plain model: group effects are null") {
    const Json j = coefficients_to_json(c, ModelFamily::LogisticRegression);
    REQUIRE(j["family"] == "lr");
    REQUIRE(j["group_effects"].is_null());
    const Coefficients back = coefficients_from_json(j);
    REQUIRE(back.beta == c.beta);
    REQUIRE_FALSE(back.group_effects);
  }
  SECTION("mixed model keeps effects and level names") {
    c.group_effects = builders::vec({0.5, -0.5});
    c.group_levels = {"a", "b"};
    const Json j = coefficients_to_json(c, ModelFamily::MixedLogisticRegression);
    const Coefficients back = coefficients_from_json(j);
    REQUIRE(*back.group_effects == *c.group_effects);
    REQUIRE(back.group_levels == c.group_levels);
  }
}

TEST_CASE("undefined metric values serialize as null") {
  MetricsBundle m;  // all rates undefined by default
  m.accuracy = 0.75;
  const Json j = metrics_to_json(m);
  REQUIRE(j["accuracy"] == 0.75);
  REQUIRE(j["fpr"].is_null());
  REQUIRE(j["recall"].is_null());
}
