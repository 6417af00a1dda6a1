#include "qlpairs/io.hpp"

#include <fstream>
#include <sstream>

namespace qlpairs {

namespace {

double entry_to_double(const Json& e) {
  if (e.is_number()) return e.get<double>();
  if (e.is_string()) {
    const std::string s = e.get<std::string>();
    auto slash = s.find('/');
    if (slash == std::string::npos) return std::stod(s);
    double num = std::stod(s.substr(0, slash));
    double den = std::stod(s.substr(slash + 1));
    return num / den;
  }
  throw std::invalid_argument("matrix entries must be numbers or 'p/q' strings");
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const int rows = int(j.size());
  const int cols = int(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) m(i, k) = entry_to_double(j.at(i).at(k));
  return m;
}

std::string kind_name(PairKind k) {
  switch (k) {
    case PairKind::TypeI: return "type-I";
    case PairKind::TypeII: return "type-II";
    case PairKind::Degenerate: return "degenerate";
  }
  return "?";
}

Json interval_to_json(const Interval& i) {
  return Json{{"lo", i.lo}, {"hi", i.hi}};
}

Json vec_to_json(const Eigen::VectorXi& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

Json to_json(const QuadraticForm& q) {
  return matrix_to_json(q.gram());
}

Json to_json(const LinearForm& l) {
  Json a = Json::array();
  for (int i = 0; i < l.n(); ++i) a.push_back(l.coeffs()[i]);
  return a;
}

Json pair_to_json(const FormPair& pair) {
  Json j;
  j["n"] = pair.n();
  j["gram"] = to_json(pair.q);
  j["linear"] = to_json(pair.l);
  return j;
}

FormPair pair_from_json(const Json& j) {
  const int n = j.at("n").get<int>();
  Eigen::MatrixXd gram = matrix_from_json(j.at("gram"));
  if (gram.rows() != n) throw std::invalid_argument("gram size disagrees with n");
  Eigen::VectorXd l(n);
  for (int i = 0; i < n; ++i) l[i] = entry_to_double(j.at("linear").at(i));
  return FormPair(QuadraticForm(gram), LinearForm(l));
}

FormPair load_pair(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read pair file: " + path);
  Json j;
  in >> j;
  return pair_from_json(j);
}

void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write: " + path);
  out << j.dump(2) << "\n";
}

Json to_json(const Lattice& lattice) {
  return Json{{"basis", matrix_to_json(lattice.basis())}};
}

Lattice lattice_from_json(const Json& j) {
  return Lattice(matrix_from_json(j.at("basis")));
}

Json to_json(const AlphaResult& r) {
  Json j;
  j["value"] = r.value;
  j["witness_rank"] = r.witness_rank;
  j["mode"] = r.mode == AlphaMode::Exact ? "exact" : "certified";
  if (r.mode == AlphaMode::Certified) {
    j["lower"] = r.lower;
    j["upper"] = r.upper;
    j["gap_factor"] = r.gap_factor;
  }
  Json wits = Json::array();
  for (const auto& w : r.witness_vectors) wits.push_back(vec_to_json(w));
  j["witness_vectors"] = wits;
  j["rank_minima"] = r.rank_minima;
  return j;
}

Json to_json(const CountReport& r) {
  Json j;
  j["N"] = r.N;
  j["T"] = r.T;
  j["I"] = interval_to_json(r.I);
  j["J"] = interval_to_json(r.J);
  Json shards = Json::array();
  for (const auto& s : r.shards)
    shards.push_back(Json{{"lo", s.lo}, {"hi", s.hi}, {"count", s.count}});
  j["shards"] = shards;
  j["boundary_hits"] = r.boundary_hits;
  if (!r.witnesses.empty()) {
    Json wits = Json::array();
    for (const auto& w : r.witnesses) wits.push_back(vec_to_json(w));
    j["witnesses"] = wits;
  }
  // volatile timing lives outside the deterministic payload
  j["runtime"] = Json{{"wall_seconds", r.wall_seconds}};
  return j;
}

Json to_json(const VolumeReport& r) {
  return Json{{"V", r.V},
              {"method", r.method == VolumeMethod::Quadrature ? "quadrature" : "monte-carlo"},
              {"error_estimate", r.error_estimate},
              {"T", r.T},
              {"I", interval_to_json(r.I)},
              {"J", interval_to_json(r.J)},
              {"constraints_inactive", r.constraints_inactive}};
}

Json to_json(const ConstantFit& r) {
  return Json{{"C", r.C},
              {"slope", r.slope},
              {"T_list", r.T_list},
              {"normalized", r.normalized},
              {"residuals", r.residuals}};
}

Json to_json(const KernelLimitReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"t", row.t},
                        {"lhs", row.lhs},
                        {"rhs", row.rhs},
                        {"rel_gap", row.rel_gap},
                        {"mc_stderr", row.mc_stderr},
                        {"fitted_constant", row.fitted_constant}});
  return Json{{"rows", rows},
              {"gap_decreasing", r.gap_decreasing},
              {"final_within_tol", r.final_within_tol},
              {"tol", r.tol}};
}

Json to_json(const LimitIntegralReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"T", row.T}, {"lhs", row.lhs}, {"rel_gap", row.rel_gap}});
  return Json{{"rhs", r.rhs},
              {"rhs_stderr", r.rhs_stderr},
              {"rows", rows},
              {"final_within_tol", r.final_within_tol},
              {"tol", r.tol}};
}

Json to_json(const AverageEstimate& r) {
  return Json{{"mean", r.mean},
              {"stderr", r.stderr_},
              {"samples", r.samples},
              {"t", r.t},
              {"seed", r.seed}};
}

Json to_json(const BoundednessReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json e = to_json(row.estimate);
    e["running_max"] = row.running_max;
    rows.push_back(e);
  }
  return Json{{"rows", rows}, {"verdict", r.verdict}};
}

Json to_json(const EquidistributionReport& r) {
  Json j;
  switch (r.detection.orbit_case) {
    case OrbitCase::Dense: j["orbit_case"] = "dense"; break;
    case OrbitCase::FixedVector: j["orbit_case"] = "fixed-vector"; break;
    case OrbitCase::Ambiguous: j["orbit_case"] = "ambiguous-direction"; break;
  }
  if (r.detection.orbit_case == OrbitCase::FixedVector)
    j["primitive_point"] = vec_to_json(r.detection.primitive_point);
  j["integral_f"] = r.integral_f;
  j["correction"] = r.correction;
  j["predicted_dense"] = r.predicted_dense;
  j["predicted_fixed"] = r.predicted_fixed;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back(Json{{"t", row.t},
                        {"mean", row.estimate.mean},
                        {"stderr", row.estimate.stderr_},
                        {"samples", row.estimate.samples},
                        {"predicted", row.predicted},
                        {"abs_gap", row.abs_gap},
                        {"rel_gap", row.rel_gap}});
  }
  j["rows"] = rows;
  j["final_within_tol"] = r.final_within_tol;
  j["tol"] = r.tol;
  return j;
}

Json to_json(const SpikeReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"T", row.T},
                        {"N", row.N},
                        {"N_aux_window", row.N_aux_window},
                        {"ratio", row.ratio},
                        {"witness_count", row.witness_count}});
  Json wits = Json::array();
  for (const auto& w : r.sample_witnesses)
    wits.push_back(Json{{"v", vec_to_json(w.v)},
                        {"q", w.q_value},
                        {"l", w.l_value},
                        {"norm", w.norm}});
  return Json{{"beta", r.family.beta},
              {"variant", r.family.variant == BetaVariant::Sig22 ? "sig22" : "sig23"},
              {"beta_in_range", r.family.beta_in_range},
              {"rows", rows},
              {"sample_witnesses", wits},
              {"witnesses_valid", r.witnesses_valid},
              {"non_stabilizing", r.non_stabilizing},
              {"ratio_spread", r.ratio_spread},
              {"total_witnesses", r.total_witnesses}};
}

Json to_json(const IntermediateReport& r) {
  Json rows = Json::array();
  for (const auto& res : r.results) {
    Json e{{"relation", res.name}, {"pass", res.pass}};
    if (!res.pass) e["witness"] = res.witness;
    rows.push_back(e);
  }
  return Json{{"p", r.p}, {"q", r.q}, {"relations", rows}, {"all_pass", r.all_pass()}};
}

Json to_json(const PairClass& c) {
  Json j;
  j["kind"] = kind_name(c.kind);
  j["p"] = c.p;
  j["restriction_signature"] =
      Json{{"positive", c.restriction.positive},
           {"negative", c.restriction.negative},
           {"zero", c.restriction.zero}};
  j["flipped"] = c.flipped;
  j["reducible"] = c.reducible;
  return j;
}

Json to_json(const CanonicalReduction& r) {
  return Json{{"g", matrix_to_json(r.g)},
              {"lambda", r.lambda},
              {"mu", r.mu},
              {"target_p", r.target_p}};
}

Json to_json(const RationalityReport& r) {
  Json hits = Json::array();
  for (const auto& h : r.hits)
    hits.push_back(Json{{"alpha", std::to_string(h.alpha_num) + "/" + std::to_string(h.alpha_den)},
                        {"beta", std::to_string(h.beta_num) + "/" + std::to_string(h.beta_den)}});
  return Json{{"denominator_bound", r.denominator_bound},
              {"detected", r.detected()},
              {"hits", hits}};
}

Json bump_to_json(const ProductBump& f) {
  Json centers = Json::array(), widths = Json::array();
  for (const auto& w : f.windows) {
    centers.push_back(w.center);
    widths.push_back(w.half_width);
  }
  return Json{{"type", "cosine-window-product"}, {"centers", centers}, {"half_widths", widths}};
}

ProductBump bump_from_json(const Json& j) {
  ProductBump f;
  const auto& c = j.at("centers");
  const auto& h = j.at("half_widths");
  for (std::size_t i = 0; i < c.size(); ++i)
    f.windows.push_back({c.at(i).get<double>(), h.at(i).get<double>()});
  return f;
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write: " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

std::string canonical_dump(const Json& j) {
  return j.dump(2);
}

}  // namespace qlpairs
