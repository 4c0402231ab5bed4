#include "rocs/functional.hpp"

#include <gtest/gtest.h>

using namespace rocs;

TEST(Functional, Projections) {
  PhysicalVector p{1.0, 0.5, 0.2, 0.8, 0.1, 0.3, 0.05, 0.4};
  auto f = derive_functional(p);
  EXPECT_EQ(f.su, (Support{1.0, 0.5, 0.2, 0.8, 0.05}));
  EXPECT_EQ(f.co, (Containment{1.0, 0.5, 0.2, 0.1}));
  ASSERT_TRUE(f.mo);
  EXPECT_EQ(*f.mo, (Movability{0.3, 0.4}));
  ASSERT_TRUE(f.bl);
  EXPECT_EQ(*f.bl, (Blockage{-0.3, -0.4}));
}

TEST(Functional, BlockageNegatesMovability) {
  for (double he : {0.0, 0.25, 1.0})
    for (double ro : {0.0, 0.6, 1.0}) {
      PhysicalVector p;
      p.he = he;
      p.ro = ro;
      auto mo = *derive_movability(p);
      auto bl = *derive_blockage(p);
      EXPECT_EQ(mo[0] + bl[0], 0.0);
      EXPECT_EQ(mo[1] + bl[1], 0.0);
    }
}

TEST(Functional, MissingRoughnessLeavesMovabilityUndefined) {
  PhysicalVector p;
  EXPECT_FALSE(derive_movability(p));
  EXPECT_FALSE(derive_blockage(p));
  EXPECT_EQ(derive_support(p).size(), 5u);
}
