#include "permuta/family_io.hpp"

#include <cstdio>
#include <fstream>

#include "permuta/errors.hpp"

namespace permuta {

using nlohmann::json;

namespace {

Site parse_offset(const json& j, int dim) {
  Site s;
  if (j.is_number_integer() && dim == 1) {
    s[0] = j.get<std::int64_t>();
    return s;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw Error(ErrorKind::Parse, "offset " + j.dump() + " must be an array of " + std::to_string(dim) + " integers");
  for (int i = 0; i < dim; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number_integer()) throw Error(ErrorKind::Parse, "offset coordinates must be integers");
    s[static_cast<std::size_t>(i)] = j[static_cast<std::size_t>(i)].get<std::int64_t>();
  }
  return s;
}

}  // namespace

RateFamily family_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "family must be a JSON object");
  if (!j.contains("dimension") || !j["dimension"].is_number_integer())
    throw Error(ErrorKind::Parse, "missing integer 'dimension'");
  const int dim = j["dimension"].get<int>();
  if (dim < 1 || dim > 3) throw Error(ErrorKind::Parse, "dimension must be 1, 2 or 3");

  if (!j.contains("lattice")) throw Error(ErrorKind::Parse, "missing 'lattice'");
  const auto& lj = j["lattice"];
  Lattice lat = Lattice::unbounded(dim);
  if (lj.is_string()) {
    if (lj.get<std::string>() != "unbounded") throw Error(ErrorKind::Parse, "lattice must be \"unbounded\" or {\"torus\": [...]}");
  } else if (lj.is_object() && lj.contains("torus") && lj["torus"].is_array()) {
    std::vector<std::int64_t> sides;
    for (const auto& s : lj["torus"]) {
      if (!s.is_number_integer()) throw Error(ErrorKind::Parse, "torus sides must be integers");
      sides.push_back(s.get<std::int64_t>());
    }
    if (static_cast<int>(sides.size()) != dim) throw Error(ErrorKind::Parse, "torus needs one side per dimension");
    lat = Lattice::torus(sides);
  } else {
    throw Error(ErrorKind::Parse, "lattice must be \"unbounded\" or {\"torus\": [...]}");
  }

  if (!j.contains("permutations") || !j["permutations"].is_array())
    throw Error(ErrorKind::Parse, "missing array 'permutations'");
  std::vector<BasePermutation> base;
  for (const auto& pj : j["permutations"]) {
    if (!pj.is_object() || !pj.contains("cycles") || !pj.contains("rate") || !pj["rate"].is_number())
      throw Error(ErrorKind::Parse, "each permutation needs 'cycles' and a numeric 'rate'");
    std::vector<std::vector<Site>> cycles;
    for (const auto& cj : pj["cycles"]) {
      if (!cj.is_array()) throw Error(ErrorKind::Parse, "cycles are arrays of offsets");
      std::vector<Site> cyc;
      for (const auto& oj : cj) cyc.push_back(parse_offset(oj, dim));
      cycles.push_back(std::move(cyc));
    }
    base.push_back({FinitePermutation(std::move(cycles)), pj["rate"].get<double>()});
  }
  return RateFamily(lat, std::move(base));
}

RateFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open family file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
  }
  return family_from_json(j);
}

json family_to_json(const RateFamily& fam) {
  const auto& lat = fam.lattice();
  const int dim = lat.dim();
  json j;
  j["dimension"] = dim;
  if (lat.is_torus())
    j["lattice"] = {{"torus", lat.sides()}};
  else
    j["lattice"] = "unbounded";
  json perms = json::array();
  for (const auto& b : fam.base()) {
    json cycles = json::array();
    for (const auto& cyc : b.perm.cycles()) {
      json cj = json::array();
      for (const auto& s : cyc) {
        json o = json::array();
        for (int i = 0; i < dim; ++i) o.push_back(s[static_cast<std::size_t>(i)]);
        cj.push_back(o);
      }
      cycles.push_back(cj);
    }
    perms.push_back({{"cycles", cycles}, {"rate", b.rate}});
  }
  j["permutations"] = perms;
  return j;
}

std::string family_hash(const RateFamily& fam) {
  const std::string text = family_to_json(fam).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json report_to_json(const FamilyReport& rep) {
  json j;
  j["M_PL"] = rep.M_PL;
  j["M_I"] = rep.M_I;
  j["M_II"] = rep.M_II ? json(*rep.M_II) : json(nullptr);
  j["symmetric"] = rep.symmetric;
  j["range_closed"] = rep.range_closed;
  j["range_closed_relaxed"] = rep.range_closed_relaxed;
  j["irreducible"] = rep.irreducible;
  j["success_bound_consistent"] = rep.success_bound_consistent;
  return j;
}

}  // namespace permuta
