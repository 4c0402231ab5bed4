#include "rocs/substitution.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace rocs;
using namespace rocs::substitution;
using knowledge::ConceptTuple;
using knowledge::KnowledgeBase;

namespace {

KnowledgeBase tiny_kb() {
  KnowledgeBase kb;
  kb.models = {{"size", 3, 0, {{0.1}, {0.5}, {0.9}}}, {"flatness", 2, 0, {{0.0}, {1.0}}}};
  kb.concepts = {
      {"a", {"size", 0}, 1.0},  {"a", {"flatness", 1}, 1.0},
      {"b", {"size", 0}, 0.5},  {"b", {"size", 1}, 0.5},    {"b", {"flatness", 1}, 1.0},
      {"c", {"size", 2}, 1.0},  {"c", {"flatness", 0}, 1.0},
  };
  return kb;
}

}  // namespace

TEST(Vocabulary, ModelOrder) {
  EXPECT_EQ(vocabulary(tiny_kb()),
            (std::vector<std::string>{"size_0", "size_1", "size_2", "flatness_0", "flatness_1"}));
  EXPECT_EQ(class_vector(tiny_kb(), "b"), (std::vector<double>{0.5, 0.5, 0, 0, 1}));
}

TEST(Cosine, HandComputed) {
  auto kb = tiny_kb();
  Cosine cos;
  // a = (1,0,0,0,1), b = (.5,.5,0,0,1): dot 1.5, |a|^2 2, |b|^2 1.5
  EXPECT_NEAR(cos(class_vector(kb, "a"), class_vector(kb, "b")), 1.5 / std::sqrt(3.0), 1e-15);
  EXPECT_EQ(cos(class_vector(kb, "a"), class_vector(kb, "c")), 0.0);  // disjoint vocabularies
  EXPECT_EQ(cos(class_vector(kb, "a"), class_vector(kb, "a")), 1.0);
  EXPECT_EQ(cos({0, 0}, {1, 0}), 0.0);
}

TEST(Cosine, PropertiesOnRandomVectors) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Cosine cos;
  for (int t = 0; t < 500; ++t) {
    std::vector<double> a(12), b(12);
    for (auto& x : a) x = u(rng) < 0.5 ? 0.0 : u(rng);
    for (auto& x : b) x = u(rng) < 0.5 ? 0.0 : u(rng);
    double s = cos(a, b);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_EQ(s, cos(b, a));
    std::vector<double> a2 = a;
    for (auto& x : a2) x *= 3.0;
    EXPECT_NEAR(cos(a2, b), s, 1e-12);
  }
}

TEST(Substitute, RanksAndThresholds) {
  auto r = substitute(tiny_kb(), {"a", {"c", "b", "a"}}, 0.8);
  ASSERT_EQ(r.ranking.size(), 3u);
  EXPECT_EQ(r.ranking[0].candidate, "a");
  EXPECT_EQ(r.ranking[0].similarity, 1.0);
  EXPECT_EQ(r.ranking[1].candidate, "b");
  EXPECT_EQ(r.ranking[2].candidate, "c");
  EXPECT_EQ(r.selected(), (std::vector<std::string>{"a", "b"}));  // 0.866 >= 0.8
  EXPECT_EQ(substitute(tiny_kb(), {"a", {"b"}}, 0.9).selected(), std::vector<std::string>{});
}

TEST(Substitute, TiesBrokenByName) {
  auto kb = tiny_kb();
  kb.concepts.push_back({"d", {"size", 2}, 1.0});
  kb.concepts.push_back({"d", {"flatness", 0}, 1.0});
  auto r = substitute(kb, {"a", {"d", "c"}});
  EXPECT_EQ(r.ranking[0].candidate, "c");
}

TEST(Substitute, Errors) {
  auto code = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io_error;
  };
  EXPECT_EQ(code([] { substitute(tiny_kb(), {"zzz", {"a"}}); }), ErrorCode::unknown_class);
  EXPECT_EQ(code([] { substitute(tiny_kb(), {"a", {"zzz"}}); }), ErrorCode::unknown_class);
  EXPECT_EQ(code([] { substitute(tiny_kb(), {"a", {}}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code([] { substitute(tiny_kb(), {"a", {"b"}}, 1.5); }), ErrorCode::out_of_range);
}

TEST(Substitute, CustomMetric) {
  struct Dot {
    double operator()(const std::vector<double>& a, const std::vector<double>& b) const {
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    }
  };
  auto r = substitute(tiny_kb(), {"a", {"b", "c"}}, 0.0, Dot{});
  EXPECT_DOUBLE_EQ(r.ranking[0].similarity, 1.5);
}

TEST(Matrix, SymmetricWithUnitDiagonal) {
  auto kb = knowledge::build(test::random_records(31, 7, 6, 2), {2, 3, {}});
  auto classes = kb.classes();
  auto m = similarity_matrix(kb, classes);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    EXPECT_EQ(m[i][i], 1.0);
    for (std::size_t j = 0; j < classes.size(); ++j) EXPECT_NEAR(m[i][j], m[j][i], 1e-12);
  }
}

TEST(QueryFile, AcceptedShapes) {
  auto one = nlohmann::ordered_json::parse(R"({"missing":"a","candidates":["b","c"]})");
  EXPECT_EQ(parse_queries(one).size(), 1u);
  auto arr = nlohmann::ordered_json::parse(R"([{"missing":"a","candidates":["b"]},{"missing":"b","candidates":["a"]}])");
  EXPECT_EQ(parse_queries(arr).size(), 2u);
  auto wrapped = nlohmann::ordered_json::parse(R"({"queries":[{"missing":"a","candidates":["b"]}]})");
  EXPECT_EQ(parse_queries(wrapped)[0].missing, "a");
  EXPECT_THROW(parse_queries(nlohmann::ordered_json::parse(R"({"missing":3})")), Error);
  EXPECT_THROW(parse_queries(nlohmann::ordered_json::parse("[]")), Error);
}

TEST(Output, JsonAndHeatmap) {
  std::vector<Result> rs{substitute(tiny_kb(), {"a", {"b", "c"}}), substitute(tiny_kb(), {"c", {"a"}})};
  auto j = to_json(rs, 0.8);
  EXPECT_EQ(j["results"].size(), 2u);
  EXPECT_EQ(j["results"][0]["ranking"][0]["candidate"], "b");
  std::ostringstream ss;
  write_heatmap_csv(ss, rs);
  EXPECT_EQ(ss.str(), "missing,a,b,c\na,," + format_double(1.5 / std::sqrt(3.0)) + ",0\nc,0,,\n");
}
