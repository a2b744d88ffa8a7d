// Copyright 2026 The floss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "floss/graph_spec.h"

#include <string>

#include <gtest/gtest.h>

#include "floss/mdag.h"
#include "testing/status_testing.h"

namespace floss {
namespace {

std::string GraphPath(const std::string& name) {
  return std::string(FLOSS_GRAPH_DIR) + "/" + name;
}

TEST(ParseGraphSpecTest, ParsesVerticesEdgesAndComments) {
  ASSERT_OK_AND_ASSIGN(MDag g, ParseGraphSpec(R"(
# a comment
vertex A observed
vertex B hidden   # trailing comment
vertex R observed
vertex M missing R

edge A B
edge B M deterministic
)"));
  EXPECT_EQ(g.num_vertices(), 4);
  ASSERT_EQ(g.edges().size(), 2u);
  EXPECT_TRUE(g.edges()[1].deterministic);
  EXPECT_EQ(g.vertex(3).visibility, Visibility::kMissing);
  EXPECT_EQ(*g.vertex(3).indicator, "R");
}

TEST(ParseGraphSpecTest, ReportsLineNumbers) {
  struct Case {
    const char* text;
    const char* needle;
  };
  const Case cases[] = {
      {"vertex A observed\nfrobnicate A\n", "line 2"},
      {"vertex A observed\nedge A B\n", "line 2"},
      {"vertex A observed\nvertex A hidden\n", "line 2"},
      {"vertex A observed\n\nedge A A\n", "line 3"},
      {"vertex M missing\n", "line 1"},
      {"vertex A sometimes\n", "line 1"},
      {"vertex A observed\nvertex B observed\nedge A B\nedge A B\n", "line 4"},
  };
  for (const Case& c : cases) {
    absl::StatusOr<MDag> g = ParseGraphSpec(c.text);
    ASSERT_FALSE(g.ok()) << c.text;
    EXPECT_NE(g.status().message().find(c.needle), absl::string_view::npos)
        << g.status();
  }
}

TEST(ParseGraphSpecTest, RejectsCycles) {
  EXPECT_FALSE(ParseGraphSpec("vertex A observed\nvertex B observed\n"
                              "edge A B\nedge B A\n")
                   .ok());
}

TEST(LoadGraphSpecTest, MissingFileIsNotFound) {
  EXPECT_EQ(LoadGraphSpec("/nonexistent/graph").status().code(),
            absl::StatusCode::kNotFound);
}

TEST(LoadGraphSpecTest, ShippedGraphsLoad) {
  ASSERT_OK_AND_ASSIGN(MDag a, LoadGraphSpec(GraphPath("mnar_gradients.graph")));
  EXPECT_EQ(a.num_vertices(), 5);
  EXPECT_EQ(a.edges().size(), 8u);
  ASSERT_OK_AND_ASSIGN(MDag b, LoadGraphSpec(GraphPath("shadow_variable.graph")));
  EXPECT_EQ(b.num_vertices(), 7);
  EXPECT_EQ(b.edges().size(), 13u);
}

}  // namespace
}  // namespace floss
