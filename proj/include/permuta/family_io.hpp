#ifndef PERMUTA_FAMILY_IO_HPP
#define PERMUTA_FAMILY_IO_HPP

#include <string>

#include "json.hpp"
#include "permuta/rates.hpp"

namespace permuta {

/// Family file layout:
///   { "dimension": d,
///     "lattice": {"torus": [L...]} | "unbounded",
///     "permutations": [ {"cycles": [[offset, ...], ...], "rate": q}, ... ] }
/// Offsets are coordinate arrays (a bare integer is accepted when d = 1).
RateFamily family_from_json(const nlohmann::json& j);
RateFamily load_family(const std::string& path);
nlohmann::json family_to_json(const RateFamily& fam);

/// FNV-1a of the canonical JSON form, as 16 hex digits.
std::string family_hash(const RateFamily& fam);

nlohmann::json report_to_json(const FamilyReport& rep);

}  // namespace permuta

#endif  // PERMUTA_FAMILY_IO_HPP
