#include <gtest/gtest.h>

#include "hankel/config.hpp"

namespace cfg = hankel::config;

TEST(Config, TablesArraysAndValues) {
  const auto doc = cfg::parse(R"toml(# scenarios
title = "demo"

[defaults]
n1 = 20        # per sample
alpha = 0.05
replications = 1_000
strict = true

[grid]
rows = [
  "W(d=2,a=2.5,sigma=I)",   # first
  "CMU(d=2)",
]

[[scenario]]
row = "W(d=2,a=2.5,sigma=I)"
col = "IW(d=2,a=4,sigma=2.5*I)"
sizes = [[20, 20], [50, 50]]

[[scenario]]
row = "a \"quoted\" name"
col = "x"
)toml");
  EXPECT_EQ(doc.root.find("title")->as_string("title"), "demo");
  const auto* d = doc.table("defaults");
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->find("n1")->as_integer("n1"), 20);
  EXPECT_DOUBLE_EQ(d->find("alpha")->as_number("alpha"), 0.05);
  EXPECT_EQ(d->find("replications")->as_integer("replications"), 1000);
  EXPECT_TRUE(d->find("strict")->as_bool("strict"));
  EXPECT_EQ(d->find("n1")->line, 5);
  const auto& rows = doc.table("grid")->find("rows")->as_array("rows");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].as_string("rows"), "CMU(d=2)");
  const auto& sc = doc.array("scenario");
  ASSERT_EQ(sc.size(), 2u);
  EXPECT_EQ(sc[0].line, 16);
  EXPECT_EQ(sc[0].find("sizes")->as_array("sizes")[1].as_array("sizes")[0].as_integer("n1"), 50);
  EXPECT_EQ(sc[1].find("row")->as_string("row"), "a \"quoted\" name");
  EXPECT_TRUE(doc.array("missing").empty());
  EXPECT_EQ(doc.table("missing"), nullptr);
}

TEST(Config, ErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    try {
      cfg::parse(text);
    } catch (const hankel::input_error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("a = 1\nb = oops\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("[t]\nx = 1\nx = 2\n").find("duplicate key"), std::string::npos);
  EXPECT_NE(message("[t]\n[t]\n").find("defined twice"), std::string::npos);
  EXPECT_NE(message("x = \"open\n").find("unterminated string"), std::string::npos);
  EXPECT_NE(message("x = [1, 2\n").find("unterminated array"), std::string::npos);
  EXPECT_NE(message("[t\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("x = 1 2\n").find("line 1"), std::string::npos);
}

TEST(Config, TypeErrorsNameTheKey) {
  const auto doc = cfg::parse("n = 2.5\ns = \"x\"\n");
  try {
    doc.root.find("n")->as_integer("n");
    FAIL();
  } catch (const hankel::input_error& e) {
    EXPECT_NE(std::string(e.what()).find("'n' must be an integer"), std::string::npos);
  }
  EXPECT_THROW(doc.root.find("s")->as_number("s"), hankel::input_error);
  EXPECT_THROW(cfg::parse_file("/nonexistent/file.toml"), hankel::input_error);
}
