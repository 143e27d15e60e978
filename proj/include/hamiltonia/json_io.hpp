#pragma once

#include <json.hpp>

#include "hamiltonia/lindstedt.hpp"
#include "hamiltonia/trees.hpp"

namespace hamiltonia::io {

using Json = nlohmann::ordered_json;

/// List of {nu: [...], re: .., im: ..} records, sorted lexicographically by
/// nu for byte-stable output.
Json to_json(const FourierSeries& f);
FourierSeries series_from_json(const Json& j);

/// Vector-valued series: {nu: [...], re: [...], im: [...]}.
Json to_json(const VecFourierSeries& f);

/// Nested {nu: [...], children: [...]} encoding for debugging dumps.
Json to_json(const trees::LabeledTree& t);

/// {omega: [...], K: .., orders: [series...]}.
Json to_json(const lindstedt::TorusSeries& T);

}  // namespace hamiltonia::io
