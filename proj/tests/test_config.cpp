#include <string>

#include "doctest.h"
#include "frontctrl/config.hpp"
#include "frontctrl/csv.hpp"
#include "frontctrl/errors.hpp"
#include "frontctrl/phase_plane.hpp"

using namespace frontctrl;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("cubic model from config") {
  const auto cfg = parse_config("model.kind = cubic\nmodel.a = 0.6667\n");
  const auto m = cfg.model.build();
  CHECK(m.bistable());
  CHECK(m.u_star() == doctest::Approx(0.6667));
}

TEST_CASE("empty config gives the documented defaults") {
  const auto cfg = parse_config("");
  CHECK(cfg.model.kind == "cubic");
  CHECK(find_cstar(cfg.model.build()) == doctest::Approx(0.2357023).epsilon(1e-6));
  CHECK(cfg.limit.n == 200);
  CHECK(cfg.output_dir == ".");
}

TEST_CASE("comments, blanks and lists") {
  const auto cfg = parse_config("# header\n\n  limit.eps = 0.2, 0.1  # two\nsimulate.snapshots = 1,2,3\n");
  CHECK(cfg.limit.eps == std::vector<double>{0.2, 0.1});
  CHECK(cfg.simulate.snapshots.size() == 3);
}

TEST_CASE("errors name the line and the key") {
  CHECK(config_error("model.a = 1.5\n").find("line 1: model.a") != std::string::npos);
  CHECK(config_error("model.kind = cubic\nnope.key = 1\n").find("line 2: unknown key 'nope.key'") != std::string::npos);
  CHECK(config_error("numerics.grid = many\n").find("line 1: numerics.grid expects") != std::string::npos);
  CHECK(config_error("problem.c = 1\nproblem.c = 2\n").find("line 2: repeated key") != std::string::npos);
  CHECK(config_error("just text\n").find("line 1") != std::string::npos);
  CHECK(config_error("model.kind = quartic\n").find("expects one of") != std::string::npos);
}

TEST_CASE("missing required keys") {
  CHECK(config_error("model.kind = polynomial\n").find("model.coeffs") != std::string::npos);
  CHECK(config_error("set.kind = csv\n").find("set.file") != std::string::npos);
  CHECK_NOTHROW(parse_config("model.kind = polynomial\nmodel.coeffs = 0, 1, -1\n"));
}

TEST_CASE("overrides go through the same checks") {
  RunConfig cfg;
  apply_override(cfg, "problem.c", "0.75");
  CHECK(cfg.problem.c == 0.75);
  CHECK_THROWS_AS(apply_override(cfg, "model.a", "2"), Error);
  CHECK_THROWS_AS(apply_override(cfg, "problem.speed", "1"), Error);
}

TEST_CASE("reference lists every section") {
  const auto ref = config_reference();
  for (const char* key : {"model.a", "numerics.threads", "output.dir", "simulate.dim", "set.kind", "limit.eps"})
    CHECK(ref.find(key) != std::string::npos);
}

TEST_CASE("csv checksum line") {
  CsvWriter w({"a", "b"});
  w.row({1.0, 0.5});
  w.row({0.0, 1e-20});
  const auto text = w.text();
  CHECK(text.find("a,b\n1,0.5\n0,1e-20\n# checksum=") == 0);
  const auto chk = check_csv_checksum(text);
  CHECK(chk.present);
  CHECK(chk.matches);
  auto tampered = text;
  tampered[4] = '2';
  CHECK_FALSE(check_csv_checksum(tampered).matches);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
