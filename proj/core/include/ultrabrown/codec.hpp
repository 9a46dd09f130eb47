#pragma once

#include <nlohmann/json.hpp>

#include "ultrabrown/padic.hpp"
#include "ultrabrown/tree.hpp"

namespace ultrabrown::padic {

// JSON form of a scalar: {"p":2,"v":1,"digits":"1","prec":8}. digits are the
// significant digits least significant first, one base-36 character each
// (p <= 36) or an integer array (larger p). Zero has "v": null.
// from_json also accepts the canonical text "p^v * (d0 d1 ... | m)".
void to_json(nlohmann::json& j, const PadicScalar& x);
void from_json(const nlohmann::json& j, PadicScalar& x);

// A vector is an array of scalars.
void to_json(nlohmann::json& j, const PadicVector& x);
void from_json(const nlohmann::json& j, PadicVector& x);

// {"p":2,"N":1,"level":3,"path":"1:011"} using BallAddress::to_string.
void to_json(nlohmann::json& j, const BallAddress& a);

}  // namespace ultrabrown::padic
