#pragma once

#include "qlpairs/averages.hpp"
#include "qlpairs/bump.hpp"
#include "qlpairs/counterexamples.hpp"
#include "qlpairs/counting.hpp"
#include "qlpairs/forms.hpp"
#include "qlpairs/lattice.hpp"
#include "qlpairs/lie.hpp"
#include "qlpairs/volumetrics.hpp"

#include <json.hpp>

#include <string>

namespace qlpairs {

using Json = nlohmann::ordered_json;

// forms: {"n": int, "gram": [[...]], "linear": [...]}; entries are numbers
// or exact-rational strings "p/q"
Json to_json(const QuadraticForm& q);
Json to_json(const LinearForm& l);
Json pair_to_json(const FormPair& pair);
FormPair pair_from_json(const Json& j);
FormPair load_pair(const std::string& path);
void save_json(const Json& j, const std::string& path);

Json to_json(const Lattice& lattice);
Lattice lattice_from_json(const Json& j);

Json to_json(const AlphaResult& r);
Json to_json(const CountReport& r);
Json to_json(const VolumeReport& r);
Json to_json(const ConstantFit& r);
Json to_json(const KernelLimitReport& r);
Json to_json(const LimitIntegralReport& r);
Json to_json(const AverageEstimate& r);
Json to_json(const BoundednessReport& r);
Json to_json(const EquidistributionReport& r);
Json to_json(const SpikeReport& r);
Json to_json(const IntermediateReport& r);
Json to_json(const PairClass& c);
Json to_json(const CanonicalReduction& r);
Json to_json(const RationalityReport& r);

Json bump_to_json(const ProductBump& f);
ProductBump bump_from_json(const Json& j);

/// FNV-1a 64-bit over the bytes, hex-encoded; used for input provenance.
std::string content_hash(const std::string& bytes);

/// CSV writer: header + rows of preformatted cells.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Canonical double formatting (shortest round-trip via nlohmann).
std::string canonical_dump(const Json& j);

}  // namespace qlpairs
