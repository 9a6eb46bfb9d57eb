#include <cmath>
#include <filesystem>
#include <limits>

#include "helpers.hpp"
#include "spl/kv.hpp"

using namespace spl;

TEST_SUITE("kv") {

TEST_CASE("parse, comments and order") {
  const auto doc = KvDocument::parse("# header\nb = 2\n\na = hello world  \nlist = 1, 2,3\n", "cfg");
  CHECK(doc.entries().size() == 3);
  CHECK(doc.entries()[0].first == "b");
  CHECK(doc.get_int("b") == 2);
  CHECK(doc.get_string("a") == "hello world");
  CHECK(doc.get_int_list("list") == std::vector<std::int64_t>{1, 2, 3});
  CHECK(doc.get_double_or("missing", 1.5) == 1.5);
  CHECK_FALSE(doc.contains("missing"));
}

TEST_CASE("errors name the field and source") {
  const auto doc = KvDocument::parse("x = abc\nflag = maybe\n", "run.kv");
  try {
    doc.get_double("x");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Parse);
    const std::string msg = e.what();
    CHECK(msg.find("'x'") != std::string::npos);
    CHECK(msg.find("run.kv") != std::string::npos);
  }
  CHECK_THROWS_CODE(doc.get_bool("flag"), Errc::Parse);
  CHECK_THROWS_CODE(doc.get_string("nope"), Errc::Parse);
  CHECK_THROWS_CODE(KvDocument::parse("no equals sign\n", "bad.kv"), Errc::Parse);
  CHECK_THROWS_CODE(KvDocument::load("/nonexistent/x.kv"), Errc::Io);
}

TEST_CASE("doubles round trip") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0}) {
    CHECK(parse_double(format_double(x), "t") == x);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::isinf(parse_double("inf", "t")));
  CHECK(parse_double("+2", "t") == 2.0);
  CHECK_THROWS_CODE(parse_double("2x", "t"), Errc::Parse);
}

TEST_CASE("set, subtree, merge, save") {
  KvDocument doc;
  doc.set("a.x", 1.5);
  doc.set("a.y", 3);
  doc.set("b", true);
  doc.set("a.x", 2.5);  // overwrite keeps position
  CHECK(doc.entries()[0].second == "2.5");
  const auto sub = doc.subtree("a");
  CHECK(sub.entries().size() == 2);
  CHECK(sub.get_double("x") == 2.5);
  KvDocument other;
  other.merge("c", sub);
  CHECK(other.get_int("c.y") == 3);
  CHECK(doc.get_bool("b"));

  const auto path = (std::filesystem::temp_directory_path() / "spl_test.kv").string();
  doc.save(path);
  const auto back = KvDocument::load(path);
  CHECK(back.render() == doc.render());
  CHECK(back.source() == path);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
