#include "tred/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tred/errors.hpp"
#include "tred/kernels.hpp"
#include "tred/models.hpp"
#include "tred/propagation.hpp"
#include "tred/quantum.hpp"
#include "tred/reduction.hpp"

namespace tred {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kToolVersion = "0.3.0";

// ------------------------------------------------------------------ params

// Default params per experiment. The defaults double as the schema: a user
// value must have the same JSON kind as the default.
json default_params(const std::string& experiment) {
  if (experiment == "linear-testbed") {
    return {{"n", 20}, {"m", 4}, {"norm_terms", 20}, {"oracle_panels", 16}};
  }
  if (experiment == "spin-boson") {
    return {{"g", 1.8},         {"omega_c", 0.2},
            {"Lambda", 0.5},    {"beta", 10.0},
            {"n_modes", 100},   {"tau_cg", 160.0},
            {"ohmicities", {0.5, 1.0, 1.5}},
            {"second_order_rate", "recursion"},
            {"output_stride", 20}};
  }
  if (experiment == "central-spin") {
    return {{"n_bath", 3},   {"delta", 0.3}, {"lambda", 0.1},
            {"gamma", 1.0},  {"a_x", 1.2},   {"a_y", 1.5},
            {"a_z", 1.3},    {"beta", 50.0}, {"Lambda_diss", {0.0, 0.8}},
            {"exit_tol", 1e-9}};
  }
  if (experiment == "ising-chain") {
    return {{"n_spins", 4}, {"h", 0.36}, {"A", 0.3}, {"exit_tol", 1e-9}};
  }
  if (experiment == "reduce") return {{"model", ""}};
  throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
}

bool same_kind(const json& dflt, const json& value) {
  if (dflt.is_number_integer()) return value.is_number_integer() && value.get<long long>() >= 0;
  if (dflt.is_number()) return value.is_number();
  if (dflt.is_array()) {
    if (!value.is_array() || value.empty()) return false;
    return std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_number(); });
  }
  return dflt.type() == value.type();
}

const char* kind_name(const json& dflt) {
  if (dflt.is_number_integer()) return "a nonnegative integer";
  if (dflt.is_number()) return "a number";
  if (dflt.is_array()) return "a nonempty array of numbers";
  if (dflt.is_string()) return "a string";
  return "a value of the default's type";
}

double num(const json& params, const char* key) { return params.at(key).get<double>(); }
std::size_t count(const json& params, const char* key) {
  return params.at(key).get<std::size_t>();
}
std::vector<double> nums(const json& params, const char* key) {
  return params.at(key).get<std::vector<double>>();
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

// ------------------------------------------------------------------ output

std::string label(double x) {
  // Column and file suffixes such as s0.5 or L0.8.
  return format_double(x);
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<double> row) { rows_.push_back(std::move(row)); }

  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
    out << '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
      out << '\n';
    }
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

struct Output {
  fs::path dir;
  std::vector<fs::path> files;
  json manifest = json::object();
  bool breakdown = false;

  void save(const CsvTable& table, const std::string& name) {
    const fs::path p = dir / name;
    table.write(p);
    files.push_back(p);
  }
  void save(const json& doc, const std::string& name) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << doc.dump(2) << '\n';
    files.push_back(p);
  }
};

// ------------------------------------------------------------------ experiments

void run_linear_testbed(const ExperimentConfig& cfg, Output& out) {
  const json& p = cfg.params;
  const std::size_t n = count(p, "n"), m = count(p, "m");
  require(m >= 1 && m < n, "params.m", "need 1 <= m < n");
  const std::size_t norm_terms = count(p, "norm_terms");
  require(norm_terms >= 1, "params.norm_terms", "must be >= 1");
  const std::size_t panels = count(p, "oracle_panels");
  require(panels >= 1, "params.oracle_panels", "must be >= 1");

  const LinearTestbed tb = linear_testbed(n, m, cfg.seed);
  const ComplexMatrix& L = tb.generator;
  ComplexMatrix z0(m, 1);
  for (std::size_t i = 0; i < m; ++i) z0(i, 0) = 1.0 / std::sqrt(static_cast<double>(m));

  const Trajectory exact = exact_reduced_trajectory(L, tb.proj, z0, cfg.t_max, cfg.steps);
  const std::size_t rows = exact.times.size();
  const std::size_t n_orders = cfg.orders.size();
  std::vector<std::vector<double>> err_poly(n_orders), err_taylor(n_orders), err_rk4(n_orders);
  std::vector<json> warnings(n_orders);

#pragma omp parallel for schedule(dynamic) num_threads(kernels::team_size())
  for (std::ptrdiff_t oi = 0; oi < static_cast<std::ptrdiff_t>(n_orders); ++oi) {
    const auto o = static_cast<std::size_t>(oi);
    const std::size_t order = cfg.orders[o];
    const PolyGenerator gen = build_F_terms(L, tb.proj, order);
    const PropagatorSeries series = build_E_terms(gen, cfg.series_terms);
    const std::vector<ComplexMatrix> moments = reduced_moments(L, tb.proj, order);
    const Trajectory rk4 = integrate_ltv(gen, z0, cfg.t_max, cfg.steps);
    std::vector<double> ep(rows), et(rows), er(rows, std::nan(""));
    std::optional<double> first_truncation;
    for (std::size_t i = 0; i < rows; ++i) {
      const double t = exact.times[i];
      SeriesDiagnostics diag;
      const ComplexMatrix z = eval_series(series, t, &diag) * z0;
      if (diag.truncation_dominates && !first_truncation) first_truncation = t;
      ep[i] = hs_norm(exact.states[i] - z);
      ComplexMatrix taylor = ComplexMatrix::identity(m);
      double c = 1.0;
      for (std::size_t k = 1; k <= order; ++k) {
        c *= t / static_cast<double>(k);
        taylor.add_scaled(moments[k - 1], c);
      }
      et[i] = hs_norm(exact.states[i] - taylor * z0);
      if (i < rk4.states.size()) er[i] = hs_norm(exact.states[i] - rk4.states[i]);
    }
    err_poly[o] = std::move(ep);
    err_taylor[o] = std::move(et);
    err_rk4[o] = std::move(er);
    json w = json::object();
    if (first_truncation) w["series_truncation_from_t"] = *first_truncation;
    if (rk4.diverged) w["rk4_diverged_after_t"] = rk4.times.back();
    warnings[o] = std::move(w);
  }

  std::vector<std::string> header{"t"};
  for (const char* kind : {"err_poly_N", "err_taylor_N", "err_rk4_N"}) {
    for (std::size_t order : cfg.orders) header.push_back(kind + std::to_string(order));
  }
  CsvTable curves(header);
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> row{exact.times[i]};
    for (const auto* family : {&err_poly, &err_taylor, &err_rk4}) {
      for (std::size_t o = 0; o < n_orders; ++o) row.push_back((*family)[o][i]);
    }
    curves.add_row(std::move(row));
  }
  out.save(curves, "error_curves.csv");

  CsvTable norms({"k", "hs", "op", "hs_bound", "op_bound"});
  bool hs_bound_holds = true;
  for (const NormRow& r : norm_study(build_F_terms(L, tb.proj, norm_terms - 1), L)) {
    norms.add_row({static_cast<double>(r.k), r.hs, r.op, r.hs_bound, r.op_bound});
    hs_bound_holds = hs_bound_holds && r.hs <= r.hs_bound;
  }
  out.save(norms, "norms.csv");

  // Generator against the exact time-local generator on a short window.
  std::vector<std::string> oheader{"t"};
  for (std::size_t order : cfg.orders) oheader.push_back("gen_err_N" + std::to_string(order));
  CsvTable oracle(oheader);
  std::vector<PolyGenerator> gens;
  for (std::size_t order : cfg.orders) gens.push_back(build_F_terms(L, tb.proj, order));
  for (int i = 1; i <= 10; ++i) {
    const double t = 0.1 * i;
    try {
      const ComplexMatrix f = exact_tcl_oracle(L, tb.proj, t, panels);
      std::vector<double> row{t};
      for (const auto& g : gens) row.push_back(op_norm(f - g.at(t)));
      oracle.add_row(std::move(row));
    } catch (const NumericalBreakdown& e) {
      out.breakdown = true;
      out.manifest["breakdowns"].push_back({{"where", "exact_tcl_oracle"}, {"t", e.time()},
                                            {"message", e.what()}});
      break;
    }
  }
  out.save(oracle, "generator_oracle.csv");

  json diag = json::object();
  for (std::size_t o = 0; o < n_orders; ++o) {
    if (!warnings[o].empty()) diag["N" + std::to_string(cfg.orders[o])] = warnings[o];
  }
  out.manifest["diagnostics"] = diag;
  out.manifest["results"] = {{"op_norm_L", op_norm(L)},
                             {"hs_norm_bound_holds", hs_bound_holds},
                             {"initial_state", "ones / sqrt(m)"}};
}

void run_spin_boson(const ExperimentConfig& cfg, Output& out) {
  const json& p = cfg.params;
  SpinBosonParams sb;
  sb.g = num(p, "g");
  sb.omega_c = num(p, "omega_c");
  sb.Lambda = num(p, "Lambda");
  sb.beta = num(p, "beta");
  sb.n_modes = count(p, "n_modes");
  sb.tau_cg = num(p, "tau_cg");
  const std::string rate_name = p.at("second_order_rate").get<std::string>();
  require(rate_name == "recursion" || rate_name == "closed-form", "params.second_order_rate",
          "must be \"recursion\" or \"closed-form\"");
  const SecondOrderRate rate =
      rate_name == "recursion" ? SecondOrderRate::kRecursion : SecondOrderRate::kClosedForm;
  const std::size_t stride = count(p, "output_stride");
  require(stride >= 1, "params.output_stride", "must be >= 1");
  const std::vector<double> ohm = nums(p, "ohmicities");

  std::vector<SpinBosonRun> runs(ohm.size());
  for (std::size_t i = 0; i < ohm.size(); ++i) {
    SpinBosonParams q = sb;
    q.s = ohm[i];
    try {
      q.validate();
    } catch (const PreconditionError& e) {
      throw ConfigError("params", e.what());
    }
    runs[i] = simulate_spin_boson(q, cfg.t_max, cfg.steps, rate);
  }
  json results = json::array();
  for (std::size_t i = 0; i < ohm.size(); ++i) {
    const SpinBosonRun& r = runs[i];
    CsvTable table({"t", "sx_exact", "sx_second", "sx_coarse", "err_second", "err_coarse"});
    for (std::size_t j = 0; j < r.times.size(); j += stride) {
      table.add_row({r.times[j], r.sx_exact[j], r.sx_second[j], r.sx_coarse[j], r.err_second[j],
                     r.err_coarse[j]});
    }
    out.save(table, "spin_boson_s" + label(ohm[i]) + ".csv");
    SpinBosonParams q = sb;
    q.s = ohm[i];
    const SpinBosonCoefficients c = spin_boson_coefficients(q);
    results.push_back({{"s", ohm[i]},
                       {"phi_used", r.phi},
                       {"phi_closed_form", c.phi_closed_form},
                       {"phi_recursion", c.phi_recursion},
                       {"xi_slope_at_0", c.phi_recursion},
                       {"gamma_tau", r.gamma_tau}});
  }
  out.manifest["results"] = results;
}

void run_central_spin(const ExperimentConfig& cfg, Output& out) {
  const json& p = cfg.params;
  CentralSpinParams cs;
  cs.n_bath = count(p, "n_bath");
  require(cs.n_bath >= 1 && cs.n_bath <= 6, "params.n_bath", "must be in 1..6");
  cs.delta = num(p, "delta");
  cs.lambda = num(p, "lambda");
  cs.gamma = num(p, "gamma");
  cs.a_x = num(p, "a_x");
  cs.a_y = num(p, "a_y");
  cs.a_z = num(p, "a_z");
  cs.beta = num(p, "beta");
  require(cs.beta >= 0.0, "params.beta", "must be >= 0");
  const double exit_tol = num(p, "exit_tol");
  json results = json::array();
  for (double lam : nums(p, "Lambda_diss")) {
    CentralSpinParams q = cs;
    q.Lambda_diss = lam;
    const ReducedRun run = simulate_central_spin(q, cfg.orders, cfg.t_max, cfg.steps, exit_tol);
    std::vector<std::string> header{"t", "sx_exact", "sy_exact", "sz_exact"};
    for (std::size_t order : cfg.orders) {
      const std::string n = "_N" + std::to_string(order);
      for (const char* col : {"sx", "sy", "sz", "err", "exit_flag"}) header.push_back(col + n);
    }
    CsvTable table(header);
    for (std::size_t i = 0; i < run.exact.times.size(); ++i) {
      const auto b = bloch_vector(run.exact.states[i]);
      std::vector<double> row{run.exact.times[i], b[0], b[1], b[2]};
      for (std::size_t o = 0; o < run.orders.size(); ++o) {
        const Trajectory& tr = run.approx[o];
        if (i < tr.states.size()) {
          const auto a = bloch_vector(tr.states[i]);
          row.insert(row.end(), {a[0], a[1], a[2]});
        } else {
          row.insert(row.end(), {std::nan(""), std::nan(""), std::nan("")});
        }
        row.push_back(run.error[o][i]);
        const auto& exit = run.exit_time[o];
        row.push_back(exit && run.exact.times[i] >= *exit ? 1.0 : 0.0);
      }
      table.add_row(std::move(row));
    }
    out.save(table, "central_spin_L" + label(lam) + ".csv");
    json per_order = json::object();
    for (std::size_t o = 0; o < run.orders.size(); ++o) {
      json entry = {{"exit_time", run.exit_time[o] ? json(*run.exit_time[o]) : json(nullptr)},
                    {"diverged", run.approx[o].diverged}};
      per_order["N" + std::to_string(run.orders[o])] = entry;
    }
    results.push_back({{"Lambda_diss", lam}, {"orders", per_order}});
  }
  out.manifest["results"] = results;
}

void run_ising_chain(const ExperimentConfig& cfg, Output& out) {
  const json& p = cfg.params;
  IsingParams ip;
  ip.n_spins = count(p, "n_spins");
  require(ip.n_spins >= 2 && ip.n_spins <= 6, "params.n_spins", "must be in 2..6");
  ip.h = num(p, "h");
  ip.A = num(p, "A");
  const double exit_tol = num(p, "exit_tol");

  const IsingModel model = ising_chain_model(ip);
  const PolyGenerator gen = build_F_terms(model.generator, model.proj, 2);
  const ComplexMatrix& f2 = gen.term(2);
  const std::size_t d = f2.rows();
  std::vector<std::string> header{"row"};
  for (std::size_t j = 0; j < d; ++j) header.push_back("c" + std::to_string(j));
  CsvTable matrix(header);
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (std::size_t j = 0; j < d; ++j) row.push_back(f2(i, j).real());
    matrix.add_row(std::move(row));
  }

  const ReducedRun run = simulate_ising(ip, cfg.orders, cfg.t_max, cfg.steps, exit_tol);
  std::vector<std::string> cols{"t"};
  for (std::size_t order : cfg.orders) {
    cols.push_back("err_N" + std::to_string(order));
    cols.push_back("exit_flag_N" + std::to_string(order));
  }
  CsvTable table(cols);
  for (std::size_t i = 0; i < run.exact.times.size(); ++i) {
    std::vector<double> row{run.exact.times[i]};
    for (std::size_t o = 0; o < run.orders.size(); ++o) {
      row.push_back(run.error[o][i]);
      const auto& exit = run.exit_time[o];
      row.push_back(exit && run.exact.times[i] >= *exit ? 1.0 : 0.0);
    }
    table.add_row(std::move(row));
  }
  out.save(table, "ising_chain.csv");
  out.save(matrix, "f2_matrix.csv");

  const ClassicalVerdict v = classical_generator_checks(f2, 1e-10);
  const LindbladVerdict lv = is_lindblad_type(classical_embedding(f2), 1e-9);
  json exits = json::object();
  for (std::size_t o = 0; o < run.orders.size(); ++o) {
    exits["N" + std::to_string(run.orders[o])] =
        run.exit_time[o] ? json(*run.exit_time[o]) : json(nullptr);
  }
  const json checks = {{"f1_hs_norm", hs_norm(gen.term(1))},
                       {"f3_hs_norm", hs_norm(gen.term(3))},
                       {"f2_real", v.real},
                       {"f2_metzler", v.metzler},
                       {"f2_zero_column_sums", v.zero_column_sums},
                       {"f2_min_off_diagonal", v.min_off_diagonal},
                       {"f2_max_column_sum", v.max_column_sum},
                       {"f2_embedding_lindblad_type", lv.ok()},
                       {"exit_times", exits}};
  out.save(checks, "checks.json");
  out.manifest["results"] = checks;
}

ComplexMatrix read_matrix(const json& doc, const char* key, std::size_t rows, std::size_t cols) {
  const std::string field = std::string("model.") + key;
  require(doc.contains(key) && doc.at(key).is_array(), field, "missing matrix");
  const json& a = doc.at(key);
  require(a.size() == rows, field, "expected " + std::to_string(rows) + " rows");
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    require(a[i].is_array() && a[i].size() == cols, field,
            "row " + std::to_string(i) + " must have " + std::to_string(cols) + " entries");
    for (std::size_t j = 0; j < cols; ++j) {
      const json& e = a[i][j];
      if (e.is_number()) {
        m(i, j) = e.get<double>();
      } else {
        require(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number(), field,
                "entries must be numbers or [re, im] pairs");
        m(i, j) = cplx(e[0].get<double>(), e[1].get<double>());
      }
    }
  }
  return m;
}

void run_reduce(const ExperimentConfig& cfg, Output& out) {
  const std::string path = cfg.params.at("model").get<std::string>();
  require(!path.empty(), "params.model", "path to a model JSON is required");
  std::ifstream in(path);
  require(static_cast<bool>(in), "params.model", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("params.model", e.what());
  }
  for (const auto& [key, _] : doc.items()) {
    require(key == "n" || key == "m" || key == "L" || key == "R" || key == "J", "model." + key,
            "unknown key");
  }
  require(doc.contains("n") && doc["n"].is_number_integer(), "model.n", "integer required");
  require(doc.contains("m") && doc["m"].is_number_integer(), "model.m", "integer required");
  const auto n = doc["n"].get<std::size_t>();
  const auto m = doc["m"].get<std::size_t>();
  require(m >= 1 && m <= n, "model.m", "need 1 <= m <= n");
  const ComplexMatrix L = read_matrix(doc, "L", n, n);
  const ComplexMatrix R = read_matrix(doc, "R", m, n);
  const ComplexMatrix J = read_matrix(doc, "J", n, m);
  std::optional<ProjectorFactorization> proj;
  try {
    proj.emplace(R, J);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
  const std::size_t order = *std::max_element(cfg.orders.begin(), cfg.orders.end());
  const PolyGenerator gen = build_F_terms(L, *proj, order);
  CsvTable table({"k", "row", "col", "re", "im"});
  for (std::size_t k = 1; k <= order + 1; ++k) {
    const ComplexMatrix& f = gen.term(k);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        table.add_row({static_cast<double>(k), static_cast<double>(i), static_cast<double>(j),
                       f(i, j).real(), f(i, j).imag()});
  }
  out.save(table, "f_terms.csv");
  out.manifest["results"] = {{"n", n}, {"m", m}, {"order", order}};
}

json config_to_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment}, {"orders", c.orders}, {"series_terms", c.series_terms},
          {"t_max", c.t_max},           {"steps", c.steps},   {"seed", c.seed},
          {"params", c.params},         {"output_dir", c.output_dir.string()}};
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"linear-testbed", "spin-boson", "central-spin",
                                              "ising-chain", "reduce"};
  return names;
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.params = default_params(experiment);
  c.output_dir = fs::path("out") / experiment;
  if (experiment == "linear-testbed") {
    c.orders = {1, 2, 5, 10, 20};
    c.t_max = 10.0;
    c.steps = 1000;
    c.seed = 1;
  } else if (experiment == "spin-boson") {
    c.orders = {2};
    c.t_max = 5.0;
    c.steps = 20000;
  } else if (experiment == "central-spin") {
    c.orders = {1, 2, 3, 4, 10, 20};
    c.t_max = 8.0;
    c.steps = 1600;
  } else if (experiment == "ising-chain") {
    c.orders = {2, 3, 4, 10, 20};
    c.t_max = 10.0;
    c.steps = 2000;
  } else {  // reduce
    c.orders = {2};
    c.t_max = 1.0;
    c.steps = 1;
  }
  return c;
}

void ExperimentConfig::validate() const {
  const auto& names = experiment_names();
  require(std::find(names.begin(), names.end(), experiment) != names.end(), "experiment",
          "unknown experiment '" + experiment + "'");
  require(!orders.empty(), "orders", "must be nonempty");
  require(series_terms >= 1, "series_terms", "must be >= 1");
  require(t_max > 0.0 && std::isfinite(t_max), "t_max", "must be > 0");
  require(steps >= 1, "steps", "must be >= 1");
  if (experiment == "spin-boson") {
    require(orders.size() == 1 && orders[0] == 2, "orders",
            "the spin-boson comparison is second order only");
  }
  const json schema = default_params(experiment);
  require(params.is_object(), "params", "must be an object");
  for (const auto& [key, value] : params.items()) {
    require(schema.contains(key), "params." + key, "unknown key for " + experiment);
    require(same_kind(schema.at(key), value), "params." + key,
            std::string("must be ") + kind_name(schema.at(key)));
  }
  for (const auto& [key, _] : schema.items()) {
    require(params.contains(key), "params." + key, "missing");
  }
}

ExperimentConfig parse_config(const json& doc, const std::string& experiment) {
  require(doc.is_object(), "config", "top level must be an object");
  std::string name = experiment;
  if (doc.contains("experiment")) {
    require(doc["experiment"].is_string(), "experiment", "must be a string");
    const std::string named = doc["experiment"].get<std::string>();
    require(name.empty() || name == named, "experiment",
            "config is for '" + named + "' but '" + name + "' was requested");
    name = named;
  }
  require(!name.empty(), "experiment", "not specified");
  ExperimentConfig c = default_config(name);

  static const std::vector<std::string> keys{"experiment", "orders", "series_terms", "t_max",
                                             "steps",      "seed",   "params",       "output_dir"};
  for (const auto& [key, value] : doc.items()) {
    require(std::find(keys.begin(), keys.end(), key) != keys.end(), key, "unknown key");
  }
  auto uint_field = [&](const char* key) {
    const json& v = doc.at(key);
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), key,
            "must be a nonnegative integer");
    return v.get<std::uint64_t>();
  };
  if (doc.contains("orders")) {
    const json& v = doc["orders"];
    require(v.is_array(), "orders", "must be an array of nonnegative integers");
    c.orders.clear();
    for (const json& e : v) {
      require(e.is_number_integer() && e.get<long long>() >= 0, "orders",
              "must be an array of nonnegative integers");
      c.orders.push_back(e.get<std::size_t>());
    }
  }
  if (doc.contains("series_terms")) c.series_terms = uint_field("series_terms");
  if (doc.contains("steps")) c.steps = uint_field("steps");
  if (doc.contains("seed")) c.seed = uint_field("seed");
  if (doc.contains("t_max")) {
    require(doc["t_max"].is_number(), "t_max", "must be a number");
    c.t_max = doc["t_max"].get<double>();
  }
  if (doc.contains("output_dir")) {
    require(doc["output_dir"].is_string(), "output_dir", "must be a string");
    c.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("params")) {
    require(doc["params"].is_object(), "params", "must be an object");
    for (const auto& [key, value] : doc["params"].items()) c.params[key] = value;
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path, const std::string& experiment) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", e.what());
  }
  return parse_config(doc, experiment);
}

RunResult run(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  Output out;
  out.dir = config.output_dir;
  fs::create_directories(out.dir);
  out.manifest["breakdowns"] = json::array();

  if (config.experiment == "linear-testbed") {
    run_linear_testbed(config, out);
  } else if (config.experiment == "spin-boson") {
    run_spin_boson(config, out);
  } else if (config.experiment == "central-spin") {
    run_central_spin(config, out);
  } else if (config.experiment == "ising-chain") {
    run_ising_chain(config, out);
  } else {
    run_reduce(config, out);
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {{"tool", "tred"},
                   {"version", kToolVersion},
                   {"config", config_to_json(config)},
                   {"threads", kernels::team_size()},
                   {"wall_clock_seconds", seconds}};
  for (auto& [key, value] : out.manifest.items()) manifest[key] = value;
  json files = json::array();
  for (const auto& f : out.files) files.push_back(f.filename().string());
  manifest["files"] = files;
  out.save(manifest, "manifest.json");
  return {out.files, manifest, out.breakdown};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

SlopeFit fit_log_slope(std::span<const double> t, std::span<const double> err, double t_lo,
                       double t_hi) {
  if (t.size() != err.size()) throw DimensionError("fit_log_slope: column lengths differ");
  SlopeFit fit;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi || !(t[i] > 0.0)) continue;
    if (!(err[i] > kErrorFloor) || !std::isfinite(err[i])) continue;
    x.push_back(std::log(t[i]));
    y.push_back(std::log(err[i]));
  }
  fit.points = x.size();
  if (x.size() < 5) {
    fit.reason = "only " + std::to_string(x.size()) + " points above the error floor in window";
    return fit;
  }
  const double nx = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= nx;
  my /= nx;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) {
    fit.reason = "all usable points share one time";
    return fit;
  }
  fit.slope = sxy / sxx;
  const double icpt = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - icpt - fit.slope * x[i];
    rss += r * r;
  }
  fit.std_error = std::sqrt(rss / (nx - 2.0) / sxx);
  fit.ci_low = fit.slope - 2.0 * fit.std_error;
  fit.ci_high = fit.slope + 2.0 * fit.std_error;
  fit.fitted = true;
  return fit;
}

std::vector<SlopeFit> fit_order_slope(const fs::path& csv, double t_lo, double t_hi) {
  std::ifstream in(csv);
  if (!in) throw ConfigError("csv", "cannot open " + csv.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv", "empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header[0] != "t") throw ConfigError("csv", "first column must be t");
  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (!std::getline(ss, cell, ',')) throw ConfigError("csv", "short row");
      double v = std::nan("");
      if (cell != "nan") {
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() && cell != "inf" && cell != "-inf") {
          throw ConfigError("csv", "unparsable value '" + cell + "'");
        }
        if (cell == "inf") v = INFINITY;
        if (cell == "-inf") v = -INFINITY;
      }
      cols[c].push_back(v);
    }
  }
  std::vector<SlopeFit> fits;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].rfind("err", 0) != 0) continue;
    SlopeFit f = fit_log_slope(cols[0], cols[c], t_lo, t_hi);
    f.series = header[c];
    fits.push_back(std::move(f));
  }
  return fits;
}

}  // namespace tred
