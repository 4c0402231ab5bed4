#include "rocs/core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

using namespace rocs;

TEST(Seeds, DeriveIsDeterministicAndStreamSensitive) {
  EXPECT_EQ(derive_seed(7, "kmeans", 3), derive_seed(7, "kmeans", 3));
  EXPECT_NE(derive_seed(7, "kmeans", 3), derive_seed(7, "kmeans", 4));
  EXPECT_NE(derive_seed(7, "kmeans", 3), derive_seed(8, "kmeans", 3));
  EXPECT_NE(derive_seed(7, "kmeans", 3), derive_seed(7, "pyramid", 3));
}

TEST(Seeds, NoCollisionsOverManyStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t root = 0; root < 20; ++root)
    for (const char* s : {"a", "b", "simulate", "extract", "kmeans"})
      for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(root, s, i));
  EXPECT_EQ(seen.size(), 20u * 5u * 50u);
}

TEST(Numbers, FormatRoundTripsRandomDoubles) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 5000; ++i) {
    double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    auto back = parse_double(format_double(v));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, v);
  }
}

TEST(Numbers, FormatIsShortest) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(0.00053), "0.00053");
}

TEST(Numbers, ParseRejectsJunk) {
  EXPECT_FALSE(parse_double("").has_value());
  EXPECT_FALSE(parse_double("1.0x").has_value());
  EXPECT_FALSE(parse_double("abc").has_value());
  EXPECT_FALSE(parse_double("nan").has_value());
  EXPECT_FALSE(parse_double("inf").has_value());
  EXPECT_DOUBLE_EQ(*parse_double(" 0.25 "), 0.25);
  EXPECT_EQ(*parse_int("12"), 12);
  EXPECT_FALSE(parse_int("1.5").has_value());
}

TEST(Numbers, Clamp01) {
  EXPECT_EQ(clamp01(-0.5), 0.0);
  EXPECT_EQ(clamp01(1.5), 1.0);
  EXPECT_EQ(clamp01(0.3), 0.3);
}

TEST(Errors, CodeNamesAreDistinct) {
  std::set<std::string_view> names;
  for (int c = 0; c <= static_cast<int>(ErrorCode::unknown_class); ++c)
    names.insert(code_name(static_cast<ErrorCode>(c)));
  EXPECT_EQ(names.size(), static_cast<std::size_t>(ErrorCode::unknown_class) + 1);
  try {
    fail(ErrorCode::unknown_class, "nope");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_class);
    EXPECT_STREQ(e.what(), "nope");
  }
}
