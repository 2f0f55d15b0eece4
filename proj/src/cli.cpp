#include "vessel/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "vessel/elliptic.hpp"
#include "vessel/errors.hpp"
#include "vessel/feedback.hpp"
#include "vessel/placement_genus0.hpp"
#include "vessel/transfer.hpp"
#include "vessel/vessel.hpp"

namespace vessel::cli {

namespace {

const std::set<std::string> kCommands = {
    "validate",  "curve",       "spectrum",       "transfer", "feedback-check",
    "feedback-apply", "factor-check", "place",    "fbdim",    "ec",
    "achievable"};

void check_fields(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where, std::vector<std::string>& errors) {
  if (!obj.is_object()) {
    errors.push_back(where + ": expected an object");
    return;
  }
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) errors.push_back(where + ": unknown field '" + it.key() + "'");
}

}  // namespace

ConfigError::ConfigError(const std::vector<std::string>& items_in)
    : std::runtime_error([&] {
        std::string msg = "configuration errors:";
        for (const auto& i : items_in) msg += "\n  - " + i;
        return msg;
      }()),
      items(items_in) {}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError({where + ": complex values must be [re, im] number pairs"});
  return Complex(j[0].get<double>(), j[1].get<double>());
}

json matrix_to_json(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

CMat matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError({where + ": expected a nonempty matrix"});
  const size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw ConfigError({where + ": matrix rows must be nonempty arrays"});
  const size_t cols = j[0].size();
  CMat m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ConfigError({where + ": ragged matrix rows"});
    for (size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          complex_from_json(j[i][c], where);
  }
  return m;
}

namespace {

Vessel vessel_from_json(const json& j, std::vector<std::string>& errors) {
  Vessel v;
  check_fields(j,
               {"n", "m", "m_star", "declared_r", "declared_s", "A1", "A2", "B_tilde", "C", "D",
                "D_tilde", "sigma1", "sigma2", "gamma", "sigma1_star", "sigma2_star",
                "gamma_star"},
               "vessel", errors);
  const std::vector<std::string> required = {
      "n", "m", "m_star", "A1", "A2", "B_tilde", "C", "D", "D_tilde",
      "sigma1", "sigma2", "gamma", "sigma1_star", "sigma2_star", "gamma_star"};
  for (const auto& f : required)
    if (!j.contains(f)) errors.push_back("vessel: missing field '" + f + "'");
  if (!errors.empty()) return v;
  try {
    v.n = j["n"].get<int>();
    v.m = j["m"].get<int>();
    v.m_star = j["m_star"].get<int>();
    v.declared_r = j.value("declared_r", 1);
    v.declared_s = j.value("declared_s", 1);
    v.A1 = matrix_from_json(j["A1"], "vessel.A1");
    v.A2 = matrix_from_json(j["A2"], "vessel.A2");
    v.B_tilde = matrix_from_json(j["B_tilde"], "vessel.B_tilde");
    v.C = matrix_from_json(j["C"], "vessel.C");
    v.D = matrix_from_json(j["D"], "vessel.D");
    v.D_tilde = matrix_from_json(j["D_tilde"], "vessel.D_tilde");
    v.sigma1 = matrix_from_json(j["sigma1"], "vessel.sigma1");
    v.sigma2 = matrix_from_json(j["sigma2"], "vessel.sigma2");
    v.gamma = matrix_from_json(j["gamma"], "vessel.gamma");
    v.sigma1_star = matrix_from_json(j["sigma1_star"], "vessel.sigma1_star");
    v.sigma2_star = matrix_from_json(j["sigma2_star"], "vessel.sigma2_star");
    v.gamma_star = matrix_from_json(j["gamma_star"], "vessel.gamma_star");
  } catch (const ConfigError& e) {
    errors.insert(errors.end(), e.items.begin(), e.items.end());
    return v;
  }
  if (!v.dimensions_consistent()) errors.push_back("vessel: inconsistent operator dimensions");
  return v;
}

json vessel_to_json(const Vessel& v) {
  return json{{"n", v.n},
              {"m", v.m},
              {"m_star", v.m_star},
              {"declared_r", v.declared_r},
              {"declared_s", v.declared_s},
              {"A1", matrix_to_json(v.A1)},
              {"A2", matrix_to_json(v.A2)},
              {"B_tilde", matrix_to_json(v.B_tilde)},
              {"C", matrix_to_json(v.C)},
              {"D", matrix_to_json(v.D)},
              {"D_tilde", matrix_to_json(v.D_tilde)},
              {"sigma1", matrix_to_json(v.sigma1)},
              {"sigma2", matrix_to_json(v.sigma2)},
              {"gamma", matrix_to_json(v.gamma)},
              {"sigma1_star", matrix_to_json(v.sigma1_star)},
              {"sigma2_star", matrix_to_json(v.sigma2_star)},
              {"gamma_star", matrix_to_json(v.gamma_star)}};
}

json divisor_to_json(const Divisor& d) {
  json out = json::array();
  for (const auto& e : d.entries) {
    json entry{{"point", complex_to_json(e.point)}, {"mult", e.mult}};
    if (e.direction) {
      json dir = json::array();
      for (Eigen::Index i = 0; i < e.direction->size(); ++i)
        dir.push_back(complex_to_json((*e.direction)(i)));
      entry["direction"] = dir;
    }
    out.push_back(entry);
  }
  return out;
}

json curve_point_to_json(const CurvePoint& p) {
  if (p.is_affine())
    return json::array({p.lambda1.real(), p.lambda1.imag(), p.lambda2.real(), p.lambda2.imag()});
  return json::array({p.l1.real(), p.l1.imag(), p.l2.real(), p.l2.imag()});
}

ECPoint ec_point_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "O") return ECPoint::O();
    throw ConfigError({where + ": points are [x_re, x_im, y_re, y_im] or \"O\""});
  }
  if (!j.is_array() || j.size() != 4)
    throw ConfigError({where + ": points are [x_re, x_im, y_re, y_im] or \"O\""});
  for (const auto& c : j)
    if (!c.is_number()) throw ConfigError({where + ": point components must be numbers"});
  return ECPoint::affine(Complex(j[0].get<double>(), j[1].get<double>()),
                         Complex(j[2].get<double>(), j[3].get<double>()));
}

json ec_point_to_json(const ECPoint& p) {
  if (p.is_infinity()) return json("O");
  return json::array({p.x.real(), p.x.imag(), p.y.real(), p.y.imag()});
}

ECDivisor ec_divisor_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("points") || !j.contains("mults"))
    throw ConfigError({where + ": divisors are {points: [...], mults: [...]}"});
  std::vector<std::string> errors;
  check_fields(j, {"points", "mults"}, where, errors);
  if (!errors.empty()) throw ConfigError(errors);
  const json& pts = j["points"];
  const json& mults = j["mults"];
  if (!pts.is_array() || !mults.is_array() || pts.size() != mults.size())
    throw ConfigError({where + ": points and mults must be arrays of equal length"});
  ECDivisor d;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (!mults[i].is_number_integer())
      throw ConfigError({where + ": multiplicities must be integers"});
    d.entries.emplace_back(ec_point_from_json(pts[i], where), mults[i].get<int>());
  }
  return d;
}

EllipticCurve curve_from_json(const json& doc, std::vector<std::string>& errors) {
  EllipticCurve e;
  if (!doc.contains("curve")) {
    errors.push_back("document: command requires a 'curve' block");
    return e;
  }
  const json& c = doc["curve"];
  check_fields(c, {"a", "b"}, "curve", errors);
  if (!c.contains("a") || !c.contains("b")) {
    errors.push_back("curve: fields 'a' and 'b' are required");
    return e;
  }
  e.a = complex_from_json(c["a"], "curve.a");
  e.b = complex_from_json(c["b"], "curve.b");
  return e;
}

}  // namespace

json Report::to_json() const {
  return json{{"command", command},
              {"status", status},
              {"payload", payload},
              {"provenance",
               json{{"seed", seed},
                    {"tolerances",
                     json{{"residual_tol", tol.residual_tol},
                          {"rank_tol", tol.rank_tol},
                          {"eig_cluster_tol", tol.eig_cluster_tol}}},
                    {"version", version}}}};
}

Report Report::from_json(const json& j) {
  Report r;
  r.command = j.at("command").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.payload = j.at("payload");
  const json& prov = j.at("provenance");
  r.seed = prov.at("seed").get<unsigned>();
  r.version = prov.at("version").get<std::string>();
  const json& t = prov.at("tolerances");
  r.tol.residual_tol = t.at("residual_tol").get<double>();
  r.tol.rank_tol = t.at("rank_tol").get<double>();
  r.tol.eig_cluster_tol = t.at("eig_cluster_tol").get<double>();
  return r;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig cfg = parse_config(args, json());
  std::ifstream in(cfg.input_path);
  if (!in) throw ConfigError({"cannot open input file: " + cfg.input_path});
  try {
    in >> cfg.input;
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("malformed input document: ") + e.what()});
  }
  std::vector<std::string> errors;
  if (!cfg.input.is_object() || !cfg.input.contains("schema_version") ||
      cfg.input["schema_version"] != 1)
    errors.push_back("document: schema_version must be 1");
  check_fields(cfg.input, {"schema_version", "vessel", "feedback", "problem", "curve"},
               "document", errors);
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

RunConfig parse_config(const std::vector<std::string>& args, const json& document) {
  RunConfig cfg;
  cfg.input = document;
  CLI::App app{"operator-vessel toolkit"};
  std::string command;
  app.add_option("command", command, "one of: validate curve spectrum transfer feedback-check feedback-apply factor-check place fbdim ec achievable")
      ->required();
  app.add_option("--in", cfg.input_path, "input JSON document");
  app.add_option("--out", cfg.output_path, "output path (default: stdout)");
  app.add_option("--seed", cfg.seed, "seed for sampled computations");
  app.add_option("--tol-residual", cfg.tol.residual_tol, "residual tolerance");
  app.add_option("--tol-rank", cfg.tol.rank_tol, "rank tolerance");
  app.add_option("--tol-cluster", cfg.tol.eig_cluster_tol, "eigenvalue cluster tolerance");
  app.add_option("--format", cfg.format, "text | structured")
      ->check(CLI::IsMember({"text", "structured"}));
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw ConfigError({std::string("argument error: ") + e.what()});
  }
  std::vector<std::string> errors;
  if (!kCommands.count(command)) errors.push_back("unknown command: " + command);
  if (!cfg.tol.valid()) errors.push_back("tolerances must lie in [0, 1)");
  if (cfg.input_path.empty() && document.is_null())
    errors.push_back("--in <file> is required");
  if (!errors.empty()) throw ConfigError(errors);
  cfg.command = command;
  return cfg;
}

namespace {

Vessel require_vessel(const RunConfig& cfg) {
  std::vector<std::string> errors;
  if (!cfg.input.contains("vessel")) throw ConfigError({"document: command requires a 'vessel' block"});
  Vessel v = vessel_from_json(cfg.input["vessel"], errors);
  if (!errors.empty()) throw ConfigError(errors);
  return v;
}

FeedbackOp require_feedback(const RunConfig& cfg) {
  if (!cfg.input.contains("feedback"))
    throw ConfigError({"document: command requires a 'feedback' block"});
  std::vector<std::string> errors;
  check_fields(cfg.input["feedback"], {"F"}, "feedback", errors);
  if (!cfg.input["feedback"].contains("F")) errors.push_back("feedback: missing field 'F'");
  if (!errors.empty()) throw ConfigError(errors);
  return FeedbackOp{matrix_from_json(cfg.input["feedback"]["F"], "feedback.F")};
}

const json& problem_block(const RunConfig& cfg, const std::set<std::string>& allowed) {
  static const json empty = json::object();
  if (!cfg.input.contains("problem")) return empty;
  std::vector<std::string> errors;
  check_fields(cfg.input["problem"], allowed, "problem", errors);
  if (!errors.empty()) throw ConfigError(errors);
  return cfg.input["problem"];
}

Report run_validate(const RunConfig& cfg) {
  Report r;
  Vessel v = require_vessel(cfg);
  ValidationReport rep = validate_vessel(v, cfg.tol);
  json conds = json::array();
  for (const auto& c : rep.conditions)
    conds.push_back(json{{"name", c.name},
                         {"residual", c.residual},
                         {"scale", c.scale},
                         {"pass", c.pass}});
  r.payload = json{{"conditions", conds},
                   {"structural_ok", rep.structural_ok},
                   {"d_invertible", rep.d_invertible},
                   {"d_tilde_invertible", rep.d_tilde_invertible},
                   {"pass", rep.pass}};
  if (!rep.structural_message.empty()) r.payload["structural_message"] = rep.structural_message;
  r.status = rep.pass ? "pass" : "fail";
  return r;
}

Report run_curve(const RunConfig& cfg) {
  Report r;
  Vessel v = require_vessel(cfg);
  const json& prob = problem_block(cfg, {"count"});
  const int count = prob.value("count", 25);
  DiscriminantResult disc = discriminant_polys(v, cfg.tol);
  CurveSample sample = sample_curve_points(disc.p_in, count, cfg.seed, cfg.tol);
  json aff = json::array(), inf = json::array();
  for (const auto& p : sample.affine) aff.push_back(curve_point_to_json(p));
  for (const auto& p : sample.at_infinity) inf.push_back(curve_point_to_json(p));
  r.payload = json{{"p_in", matrix_to_json(disc.p_in.coeffs())},
                   {"p_out", matrix_to_json(disc.p_out.coeffs())},
                   {"samples", json{{"affine", aff}, {"at_infinity", inf}}}};
  if (disc.mu) r.payload["mu"] = complex_to_json(*disc.mu);
  r.status = "pass";
  return r;
}

Report run_spectrum(const RunConfig& cfg) {
  Report r;
  Vessel v = require_vessel(cfg);
  SpectrumReport rep = vessel_spectrum(v, cfg.tol);
  json pts = json::array();
  bool all_ok = true;
  for (const auto& p : rep.points) {
    pts.push_back(json{{"lambda1", complex_to_json(p.lambda1)},
                       {"lambda2", complex_to_json(p.lambda2)},
                       {"mult", p.mult},
                       {"on_curve", p.on_curve},
                       {"smooth", p.smooth}});
    all_ok = all_ok && p.on_curve && p.smooth;
  }
  r.payload = json{{"points", pts}, {"all_on_curve_and_smooth", all_ok}};
  r.status = all_ok ? "pass" : "fail";
  return r;
}

Report run_transfer(const RunConfig& cfg) {
  Report r;
  Vessel v = require_vessel(cfg);
  const json& prob = problem_block(cfg, {"count"});
  const int count = prob.value("count", 25);
  DiscriminantResult disc = discriminant_polys(v, cfg.tol);
  CurveSample sample = sample_curve_points(disc.p_in, count, cfg.seed, cfg.tol);

  double max_gap = 0.0, max_fiber = 0.0;
  int checked = 0, skipped = 0;
  for (const auto& p : sample.affine) {
    FiberBasis fb;
    try {
      fb = curve_fiber(v, p, FiberSide::input, cfg.tol);
    } catch (const std::exception&) {
      ++skipped;
      continue;
    }
    const CVec vec = fb.basis.col(0);
    std::vector<TransferValue> vals;
    for (int k = 0; k < 16 && vals.size() < 2; ++k) {
      double th = std::numbers::pi * k / 16.0;
      try {
        vals.push_back(
            transfer_eval_with_direction(v, p, vec, Direction(std::cos(th), std::sin(th)), cfg.tol));
      } catch (const PoleError&) {
        continue;
      }
    }
    if (vals.size() < 2) {
      ++skipped;
      continue;
    }
    const double denom = std::max(vals[0].value.norm(), vals[1].value.norm()) + 1e-300;
    max_gap = std::max(max_gap, (vals[0].value - vals[1].value).norm() / denom);
    max_fiber = std::max({max_fiber, vals[0].out_residual, vals[1].out_residual});
    ++checked;
  }
  const bool pass = checked > 0 && max_gap <= 1e-8 && max_fiber <= 1e-8;
  r.payload = json{{"points_checked", checked},
                   {"points_skipped", skipped},
                   {"max_direction_gap", max_gap},
                   {"max_fiber_residual", max_fiber}};
  r.status = pass ? "pass" : "fail";
  return r;
}

Report run_feedback_check(const RunConfig& cfg) {
  Report r;
  Vessel v = require_vessel(cfg);
  FeedbackOp f = require_feedback(cfg);
  AdmissibilityReport rep = is_admissible(v, f, cfg.tol);
  r.payload = json{{"admissible", rep.admissible},
                   {"residual_state", rep.residual_state},
                   {"residual_input", rep.residual_input},
                   {"scale_state", rep.scale_state},
                   {"scale_input", rep.scale_input}};
  r.status = rep.admissible ? "pass" : "fail";
  return r;
}

Report run_feedback_apply(const RunConfig& cfg) {
  Report r;
  Vessel v = require_vessel(cfg);
  FeedbackOp f = require_feedback(cfg);
  Vessel cl = closed_loop(v, f, cfg.tol);  // throws (-> error) when inadmissible
  ValidationReport rep = validate_vessel(cl, cfg.tol);
  r.payload = json{{"closed_loop", vessel_to_json(cl)}, {"validation_pass", rep.pass}};
  r.status = rep.pass ? "pass" : "fail";
  return r;
}

Report run_factor_check(const RunConfig& cfg) {
  Report r;
  Vessel v = require_vessel(cfg);
  FeedbackOp f = require_feedback(cfg);
  const json& prob = problem_block(cfg, {"count"});
  const int count = prob.value("count", 25);
  DiscriminantResult disc = discriminant_polys(v, cfg.tol);
  CurveSample sample = sample_curve_points(disc.p_in, count, cfg.seed, cfg.tol);
  FactorizationReport rep = factorization_check(v, f, sample.affine, cfg.tol);
  r.payload = json{{"max_residual", rep.max_residual},
                   {"points_checked", rep.points_checked},
                   {"skipped", rep.skipped}};
  r.status = rep.points_checked > 0 && rep.max_residual <= 1e-8 ? "pass" : "fail";
  return r;
}

Report run_place(const RunConfig& cfg) {
  Report r;
  const json& prob = problem_block(cfg, {"line_vessel", "desired"});
  if (!prob.contains("line_vessel") || !prob.contains("desired"))
    throw ConfigError({"problem: 'place' requires 'line_vessel' and 'desired'"});
  const json& lv = prob["line_vessel"];
  std::vector<std::string> errors;
  check_fields(lv, {"n", "A1", "c", "d", "sigma1", "b", "c_row", "D", "D_tilde"},
               "problem.line_vessel", errors);
  for (const auto& f : {"n", "A1", "c", "d", "b", "c_row"})
    if (!lv.contains(f)) errors.push_back(std::string("problem.line_vessel: missing field '") + f + "'");
  if (!errors.empty()) throw ConfigError(errors);

  LineVesselSpec spec;
  spec.n = lv["n"].get<int>();
  spec.A1 = matrix_from_json(lv["A1"], "line_vessel.A1");
  spec.c = complex_from_json(lv["c"], "line_vessel.c");
  spec.d = complex_from_json(lv["d"], "line_vessel.d");
  if (lv.contains("sigma1")) spec.sigma1 = complex_from_json(lv["sigma1"], "line_vessel.sigma1");
  if (lv.contains("D")) spec.D = complex_from_json(lv["D"], "line_vessel.D");
  if (lv.contains("D_tilde")) spec.D_tilde = complex_from_json(lv["D_tilde"], "line_vessel.D_tilde");
  CMat b = matrix_from_json(lv["b"], "line_vessel.b");
  if (b.cols() != 1) throw ConfigError({"line_vessel.b: expected a column vector"});
  spec.b = b.col(0);
  spec.c_row = matrix_from_json(lv["c_row"], "line_vessel.c_row");

  std::vector<Complex> desired;
  for (const auto& dj : prob["desired"]) desired.push_back(complex_from_json(dj, "problem.desired"));

  Vessel v = build_line_vessel(spec, cfg.tol);
  PlacementOutcome out = place_poles_genus0(v, desired, cfg.tol);
  json achieved = json::array(), want = json::array();
  for (Complex z : out.achieved) achieved.push_back(complex_to_json(z));
  for (Complex z : out.desired) want.push_back(complex_to_json(z));
  r.payload = json{{"F", matrix_to_json(out.F.F)},
                   {"route", out.route},
                   {"achieved", achieved},
                   {"desired", want},
                   {"open_loop_poles", divisor_to_json(out.open_loop_poles)},
                   {"spectrum_mismatch", out.spectrum_mismatch},
                   {"spectra_match", out.spectra_match},
                   {"admissible", out.admissible},
                   {"condition_checked", out.condition_checked}};
  if (out.f_result) {
    json induced = json::array();
    for (Complex z : out.f_result->induced_poles) induced.push_back(complex_to_json(z));
    r.payload["f_certificate"] = json{{"mark_certificate", out.f_result->mark_certificate},
                                      {"certificate_ok", out.f_result->certificate_ok},
                                      {"induced_poles", induced},
                                      {"cancellations", out.f_result->cancellations.size()}};
  }
  if (out.condition_checked) {
    r.payload["conditions_hold"] = out.condition.conditions_hold;
    r.payload["zero_divisors"] = json{{"open_loop", divisor_to_json(out.condition.lz_s)},
                                      {"closed_loop", divisor_to_json(out.condition.lz_t)}};
  }
  r.status = out.spectra_match && out.admissible ? "pass" : "fail";
  return r;
}

Report run_fbdim(const RunConfig& cfg) {
  Report r;
  const json& prob = problem_block(cfg, {"genus", "n", "m", "ell_correction"});
  for (const auto& f : {"genus", "n", "m"})
    if (!prob.contains(f)) throw ConfigError({std::string("problem: 'fbdim' requires '") + f + "'"});
  FeedbackDimension fd = feedback_dimension(prob["genus"].get<int>(), prob["n"].get<int>(),
                                            prob["m"].get<int>(), prob.value("ell_correction", 0));
  r.payload = json{{"value", fd.value}, {"exact", fd.exact}};
  r.status = "pass";
  return r;
}

Report run_ec(const RunConfig& cfg) {
  Report r;
  std::vector<std::string> errors;
  EllipticCurve e = curve_from_json(cfg.input, errors);
  if (!errors.empty()) throw ConfigError(errors);
  if (!e.nonsingular(cfg.tol)) throw ConfigError({"curve: discriminant vanishes (singular curve)"});
  const json& prob = problem_block(cfg, {"op", "P", "Q", "divisor", "Z", "D_inf", "partial"});
  const std::string op = prob.value("op", "");
  if (op == "add" || op == "negate") {
    ECPoint p = ec_point_from_json(prob.at("P"), "problem.P");
    ECPoint result = op == "negate"
                         ? ec_negate(p)
                         : ec_group_op(e, p, ec_point_from_json(prob.at("Q"), "problem.Q"), cfg.tol);
    r.payload = json{{"op", op}, {"result", ec_point_to_json(result)}};
    r.status = "pass";
  } else if (op == "phi" || op == "principal") {
    ECDivisor d = ec_divisor_from_json(prob.at("divisor"), "problem.divisor");
    if (op == "phi") {
      r.payload = json{{"op", op}, {"result", ec_point_to_json(phi_of_divisor(e, d, cfg.tol))}};
      r.status = "pass";
    } else {
      const bool principal = is_principal(e, d, cfg.tol);
      r.payload = json{{"op", op}, {"principal", principal}, {"degree", d.degree()}};
      r.status = principal ? "pass" : "fail";
    }
  } else if (op == "miller") {
    ECDivisor d = ec_divisor_from_json(prob.at("divisor"), "problem.divisor");
    MillerFunction f = miller_build(e, d, cfg.tol);
    json factors = json::array();
    for (const auto& [line, exp] : f.factors)
      factors.push_back(json{{"alpha", complex_to_json(line.alpha)},
                             {"beta", complex_to_json(line.beta)},
                             {"gamma", complex_to_json(line.gamma)},
                             {"exp", exp}});
    r.payload = json{{"op", op}, {"scale", complex_to_json(f.scale)}, {"factors", factors}};
    r.status = "pass";
  } else if (op == "forbidden") {
    ECDivisor z = ec_divisor_from_json(prob.at("Z"), "problem.Z");
    ECDivisor d_inf = ec_divisor_from_json(prob.at("D_inf"), "problem.D_inf");
    std::vector<ECPoint> partial;
    if (prob.contains("partial"))
      for (const auto& pj : prob["partial"]) partial.push_back(ec_point_from_json(pj, "problem.partial"));
    ECPoint result = forbidden_point(e, z, d_inf, partial, cfg.tol);
    r.payload = json{{"op", op}, {"result", ec_point_to_json(result)}};
    r.status = "pass";
  } else {
    throw ConfigError({"problem.op: expected one of add, negate, phi, principal, miller, forbidden"});
  }
  return r;
}

Report run_achievable(const RunConfig& cfg) {
  Report r;
  std::vector<std::string> errors;
  EllipticCurve e = curve_from_json(cfg.input, errors);
  if (!errors.empty()) throw ConfigError(errors);
  const json& prob = problem_block(cfg, {"Z", "P", "D_inf"});
  for (const auto& f : {"Z", "P", "D_inf"})
    if (!prob.contains(f)) throw ConfigError({std::string("problem: 'achievable' requires '") + f + "'"});
  ECDivisor z = ec_divisor_from_json(prob["Z"], "problem.Z");
  ECDivisor p = ec_divisor_from_json(prob["P"], "problem.P");
  ECDivisor d_inf = ec_divisor_from_json(prob["D_inf"], "problem.D_inf");
  Genus1Achievability out = genus1_achievability(e, z, p, d_inf, cfg.tol);
  r.payload = json{{"achievable", out.achievable}, {"certificate", out.certificate}};
  if (out.f) r.payload["miller_factors"] = static_cast<int>(out.f->factors.size());
  r.status = out.achievable ? "pass" : "fail";
  return r;
}

}  // namespace

Report dispatch(const RunConfig& cfg) {
  Report r;
  r.command = cfg.command;
  r.seed = cfg.seed;
  r.tol = cfg.tol;
  try {
    if (cfg.command == "validate") r = run_validate(cfg);
    else if (cfg.command == "curve") r = run_curve(cfg);
    else if (cfg.command == "spectrum") r = run_spectrum(cfg);
    else if (cfg.command == "transfer") r = run_transfer(cfg);
    else if (cfg.command == "feedback-check") r = run_feedback_check(cfg);
    else if (cfg.command == "feedback-apply") r = run_feedback_apply(cfg);
    else if (cfg.command == "factor-check") r = run_factor_check(cfg);
    else if (cfg.command == "place") r = run_place(cfg);
    else if (cfg.command == "fbdim") r = run_fbdim(cfg);
    else if (cfg.command == "ec") r = run_ec(cfg);
    else if (cfg.command == "achievable") r = run_achievable(cfg);
    else throw ConfigError({"unknown command: " + cfg.command});
  } catch (const ConfigError& e) {
    r.payload = json{{"error", e.what()}, {"kind", "config"}};
    r.status = "error";
  } catch (const std::invalid_argument& e) {
    r.payload = json{{"error", e.what()}, {"kind", "precondition"}};
    r.status = "error";
  } catch (const PoleError& e) {
    r.payload = json{{"error", e.what()}, {"kind", "pole"}, {"distance", e.distance_to_pole}};
    r.status = "error";
  } catch (const NumericalError& e) {
    r.payload = json{{"error", e.what()}, {"kind", "numerical"}};
    r.status = "error";
  } catch (const std::exception& e) {
    r.payload = json{{"error", e.what()}, {"kind", "internal"}};
    r.status = "error";
  }
  r.command = cfg.command;
  r.seed = cfg.seed;
  r.tol = cfg.tol;
  return r;
}

namespace {

void render_value(std::ostream& os, const json& v, int indent);

void render_table(std::ostream& os, const json& rows, int indent) {
  std::vector<std::string> cols;
  for (auto it = rows[0].begin(); it != rows[0].end(); ++it) cols.push_back(it.key());
  std::vector<size_t> widths;
  auto cell = [](const json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  for (const auto& c : cols) widths.push_back(c.size());
  for (const auto& row : rows)
    for (size_t i = 0; i < cols.size(); ++i)
      if (row.contains(cols[i])) widths[i] = std::max(widths[i], cell(row[cols[i]]).size());
  std::string pad(indent, ' ');
  os << pad;
  for (size_t i = 0; i < cols.size(); ++i)
    os << cols[i] << std::string(widths[i] - cols[i].size() + 2, ' ');
  os << "\n";
  for (const auto& row : rows) {
    os << pad;
    for (size_t i = 0; i < cols.size(); ++i) {
      std::string s = row.contains(cols[i]) ? cell(row[cols[i]]) : "";
      os << s << std::string(widths[i] - s.size() + 2, ' ');
    }
    os << "\n";
  }
}

void render_value(std::ostream& os, const json& v, int indent) {
  std::string pad(indent, ' ');
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (it.value().is_object() ||
          (it.value().is_array() && !it.value().empty() && it.value()[0].is_object())) {
        os << pad << it.key() << ":\n";
        if (it.value().is_array())
          render_table(os, it.value(), indent + 2);
        else
          render_value(os, it.value(), indent + 2);
      } else {
        os << pad << it.key() << ": " << it.value().dump() << "\n";
      }
    }
  } else {
    os << pad << v.dump() << "\n";
  }
}

}  // namespace

std::string emit_report(const Report& r, const std::string& format) {
  if (format == "structured") return r.to_json().dump(2) + "\n";
  std::ostringstream os;
  os << "command: " << r.command << "\n";
  os << "status:  " << r.status << "\n";
  render_value(os, r.payload, 0);
  os << "seed: " << r.seed << "  tolerances: residual " << r.tol.residual_tol << ", rank "
     << r.tol.rank_tol << ", cluster " << r.tol.eig_cluster_tol << "  version: " << r.version
     << "\n";
  return os.str();
}

}  // namespace vessel::cli
