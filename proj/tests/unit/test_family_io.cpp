#include "doctest.h"

#include "permuta/errors.hpp"
#include "permuta/family_io.hpp"
#include "support.hpp"

using namespace permuta;
using nlohmann::json;

TEST_CASE("family JSON round trip") {
  const auto j = json::parse(R"({"dimension": 1, "lattice": {"torus": [8]},
    "permutations": [{"cycles": [[0, 1, 2]], "rate": 1.0}, {"cycles": [[[0], [2], [1]]], "rate": 1.0}]})");
  const auto fam = family_from_json(j);
  CHECK(fam.base().size() == 2);
  CHECK(fam.lattice().side(0) == 8);
  const auto again = family_from_json(family_to_json(fam));
  CHECK(family_hash(again) == family_hash(fam));
  CHECK(family_hash(fam).size() == 16);
  CHECK(family_hash(testsupport::three_cycle(8)) == family_hash(fam));
  CHECK(family_hash(testsupport::three_cycle(10)) != family_hash(fam));

  const auto rep = report_to_json(report(fam));
  CHECK(rep["M_PL"] == 6.0);
  CHECK(rep["M_I"] == 3);
  CHECK(rep["M_II"] == 1.0);
  CHECK(rep["symmetric"] == true);
}

TEST_CASE("two-dimensional and unbounded families") {
  const auto j = json::parse(R"({"dimension": 2, "lattice": "unbounded",
    "permutations": [{"cycles": [[[0,0],[1,0]]], "rate": 1}, {"cycles": [[[0,0],[0,1]]], "rate": 1}]})");
  const auto fam = family_from_json(j);
  CHECK_FALSE(fam.lattice().is_torus());
  CHECK(compute_M_PL(fam) == 4.0);
}

TEST_CASE("malformed families") {
  auto kind_of = [](const char* text) {
    try {
      family_from_json(json::parse(text));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Precondition;
  };
  CHECK(kind_of(R"({"lattice": "unbounded", "permutations": []})") == ErrorKind::Parse);
  CHECK(kind_of(R"({"dimension": 1, "lattice": "sphere", "permutations": []})") == ErrorKind::Parse);
  CHECK(kind_of(R"({"dimension": 1, "lattice": {"torus": [8, 8]}, "permutations": []})") == ErrorKind::Parse);
  CHECK(kind_of(R"({"dimension": 1, "lattice": {"torus": [8]}, "permutations": [{"cycles": [[0, 1]]}]})") ==
        ErrorKind::Parse);
  CHECK(kind_of(R"({"dimension": 1, "lattice": {"torus": [4]},
    "permutations": [{"cycles": [[0, 1, 2]], "rate": 1}]})") == ErrorKind::TorusTooSmall);
  CHECK_THROWS_AS(load_family("/nonexistent/family.json"), Error);
}
