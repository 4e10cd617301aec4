#include <doctest.h>

#include <fstream>

#include "strata/config.hpp"
#include "strata/error.hpp"
#include "test_util.hpp"

using namespace strata;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("flat key=value parsing with comments") {
  testutil::TempDir tmp("cfg");
  write_text(tmp.str("a.cfg"),
             "# a comment\n"
             "lr = 0.000001\n"
             "epochs=30\n"
             "attention = bi   # trailing comment\n"
             "\n"
             "quiet = true\n");
  const auto map = config::load(tmp.str("a.cfg"));
  CHECK(config::get_double(map, "lr", 0.0) == doctest::Approx(1e-6));
  CHECK(config::get_long(map, "epochs", 0) == 30);
  CHECK(config::get_string(map, "attention", "") == "bi");
  CHECK(config::get_bool(map, "quiet", false));
  CHECK(config::get_long(map, "runs", 5) == 5);  // fallback
}

TEST_CASE("include splices another file; later keys win") {
  testutil::TempDir tmp("cfginc");
  write_text(tmp.str("base.cfg"), "lr = 0.5\nruns = 7\n");
  write_text(tmp.str("top.cfg"),
             "include base.cfg\n"
             "lr = 0.25\n");
  const auto map = config::load(tmp.str("top.cfg"));
  CHECK(config::get_double(map, "lr", 0.0) == doctest::Approx(0.25));
  CHECK(config::get_long(map, "runs", 0) == 7);
}

TEST_CASE("config errors carry line information") {
  testutil::TempDir tmp("cfgerr");
  write_text(tmp.str("bad.cfg"), "lr 0.5\n");
  try {
    (void)config::load(tmp.str("bad.cfg"));
    FAIL("expected bad_config");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_config);
    CHECK(std::string(e.what()).find(":1") != std::string::npos);
  }
  CHECK_THROWS_AS((void)config::load(tmp.str("missing.cfg")), Error);

  write_text(tmp.str("loop.cfg"), "include loop.cfg\n");
  CHECK_THROWS_AS((void)config::load(tmp.str("loop.cfg")), Error);

  write_text(tmp.str("nan.cfg"), "lr = fast\n");
  const auto map = config::load(tmp.str("nan.cfg"));
  CHECK_THROWS_AS((void)config::get_double(map, "lr", 0.0), Error);
}
