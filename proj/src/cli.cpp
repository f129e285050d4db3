#include "mhd/cli.hpp"

#include "mhd/diagnostics.hpp"
#include "mhd/exact_solution.hpp"
#include "mhd/norms.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace mhd::cli
{

namespace
{

std::string fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const std::map<std::string, std::string>& aliases()
{
  static const std::map<std::string, std::string> table{
      {"s", "s-coupling"}, {"t", "tfinal"},     {"t-final", "tfinal"},
      {"output", "out"},   {"mesh", "n"},       {"solver-tolerance", "solver-tol"},
  };
  return table;
}

const std::set<std::string>& known_keys()
{
  static const std::set<std::string> keys{
      "command", "problem",    "re",         "rm",              "s-coupling",
      "tau",     "tfinal",     "n",          "out",             "vtk-every",
      "solver-tol", "solver-max-iter", "direct-limit", "meshes", "step-divisors",
  };
  return keys;
}

double parse_double(const std::string& key, const std::string& text)
{
  const std::string s = trim(text);
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text)
{
  const std::string s = trim(text);
  int v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end)
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  return v;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text)
{
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_int(key, item));
  if (out.empty())
    throw ConfigError(key, "expected a comma separated list of integers");
  return out;
}

Command parse_command(const std::string& text)
{
  static const std::map<std::string, Command> table{
      {"run", Command::Run},
      {"mms-spatial", Command::MmsSpatial},
      {"mms-temporal", Command::MmsTemporal},
      {"stability", Command::Stability},
      {"infsup", Command::Infsup},
  };
  const auto it = table.find(trim(text));
  if (it == table.end())
    throw ConfigError("command", "unknown command '" + text + "'");
  return it->second;
}

void ensure_writable(const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ConfigError("out", "cannot create directory '" + dir.string() + "'");
  const auto probe = dir / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f || !(f << 'x') || !f.flush())
      throw ConfigError("out", "directory '" + dir.string() + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

std::ofstream open_output(const std::filesystem::path& path)
{
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return f;
}

// ---------------------------------------------------------------------------
// Commands

struct RunOutcome
{
  std::vector<StepRecord> records;
  std::vector<double> b_norms;
  /// Energy residual relative to the largest balance term, NaN where undefined.
  std::vector<double> relative_residuals;
  MHDState last;
  std::shared_ptr<const Discretization> disc;
};

void write_records(const std::filesystem::path& path, const std::vector<StepRecord>& records)
{
  std::ofstream f = open_output(path);
  f << "n,t,energy,div_inf,energy_residual,solver_residual\n";
  for (const auto& r : records)
    f << r.step << ',' << fmt(r.time) << ',' << fmt(r.energy) << ',' << fmt(r.div_inf) << ','
      << fmt(r.energy_residual) << ',' << fmt(r.solver_residual) << '\n';
  if (!f)
    throw std::runtime_error("write failed: " + path.string());
}

RunOutcome time_march(const RunConfig& config, const ExactSolution& exact, bool forced,
                      std::ostream& log)
{
  const SchemeParams params = config.scheme_params();
  RunOutcome out;
  out.disc = std::make_shared<Discretization>(
      std::make_shared<Mesh>(build_structured_cube(params.n)));
  MHDScheme scheme(out.disc, params, forced ? manufactured_sources(exact) : Sources{},
                   config.solver);
  const MHDState initial = scheme.initialize(initial_data(exact));
  log << command_name(config.command) << ": n=" << params.n << " tau=" << fmt(params.tau)
      << " steps=" << params.steps() << " unknowns=" << out.disc->system_size() << '\n';
  MHDState prev = initial;
  out.last = scheme.run(initial, [&](const MHDState& s, const StepRecord& r) {
    out.records.push_back(r);
    out.b_norms.push_back(l2_norm(s.b));
    out.relative_residuals.push_back(
        std::isnan(r.energy_residual)
            ? std::nan("")
            : energy_residual(s, prev, scheme.sources().f, params, *out.disc).relative());
    prev = s;
    if (config.vtk_every > 0 && s.step % config.vtk_every == 0)
      write_vtu(s, config.out / snapshot_name(s.step));
  });
  return out;
}

int cmd_run(const RunConfig& config, std::ostream& log)
{
  const ManufacturedSolution exact(config.re, config.rm, config.s);
  const bool forced = config.problem == Problem::Mms;
  const RunOutcome r = time_march(config, exact, forced, log);
  write_records(config.out / "run.csv", r.records);
  if (forced)
  {
    const ErrorReport e = error_norms(r.last, exact, *r.disc, config.tau);
    std::ofstream f = open_output(config.out / "run_errors.csv");
    f << "n,tau,t,u_l2,u_h1,b_l2,b_curl,e_l2,p_l2\n"
      << e.n << ',' << fmt(e.tau) << ',' << fmt(e.t) << ',' << fmt(e.u_l2) << ','
      << fmt(e.u_h1) << ',' << fmt(e.b_l2) << ',' << fmt(e.b_curl) << ',' << fmt(e.e_l2)
      << ',' << fmt(e.p_l2) << '\n';
    log << "final errors: u_l2=" << fmt(e.u_l2) << " b_l2=" << fmt(e.b_l2) << '\n';
  }
  return 0;
}

int cmd_stability(const RunConfig& config, std::ostream& log)
{
  const ManufacturedSolution exact(config.re, config.rm, config.s);
  const RunOutcome r = time_march(config, exact, false, log);
  write_records(config.out / "stability.csv", r.records);

  bool monotone = true, solenoidal = true, balanced = true;
  const double e0 = r.records.front().energy;
  for (std::size_t i = 0; i < r.records.size(); ++i)
  {
    const StepRecord& rec = r.records[i];
    if (i > 0 && rec.energy > r.records[i - 1].energy + 1e-12 * std::max(1.0, e0))
      monotone = false;
    if (rec.div_inf > 1e-11 * std::max(1.0, r.b_norms[i]))
      solenoidal = false;
    if (i > 0 && !(r.relative_residuals[i] <= 1e-9))
      balanced = false;
  }
  log << "energy monotone: " << (monotone ? "PASS" : "FAIL") << '\n'
      << "divergence free: " << (solenoidal ? "PASS" : "FAIL") << '\n'
      << "energy identity: " << (balanced ? "PASS" : "FAIL") << '\n';
  return monotone && solenoidal && balanced ? 0 : 1;
}

int cmd_study(const RunConfig& config, std::ostream& log)
{
  const bool spatial = config.command == Command::MmsSpatial;
  StudyConfig study = spatial ? StudyConfig::spatial() : StudyConfig::temporal();
  study.re = config.re;
  study.rm = config.rm;
  study.s = config.s;
  if (config.is_set("tfinal"))
    study.t_final = config.t_final;
  if (spatial)
  {
    if (config.is_set("tau"))
      study.tau = config.tau;
    if (!config.meshes.empty())
      study.meshes = config.meshes;
  }
  else
  {
    if (config.is_set("n"))
      study.n = config.n;
    const std::vector<int> divisors =
        config.step_divisors.empty() ? std::vector<int>{4, 8, 16, 32} : config.step_divisors;
    study.taus.clear();
    for (int k : divisors)
      study.taus.push_back(study.t_final / k);
  }

  const ManufacturedSolution exact(study.re, study.rm, study.s);
  const StudyResult result = convergence_study(study, exact);

  std::vector<double> ns, second;
  for (const auto& rep : result.reports)
  {
    ns.push_back(rep.n);
    second.push_back(spatial ? rep.tau : std::round(rep.t / rep.tau));
  }
  const std::filesystem::path path =
      config.out / (spatial ? "mms_spatial.csv" : "mms_temporal.csv");
  {
    std::ofstream f = open_output(path);
    result.table.write_csv(f, {{"n", ns}, {spatial ? "tau" : "steps", second}});
  }

  struct Gate
  {
    const char* norm;
    double min;
  };
  const std::vector<Gate> gates = spatial
                                      ? std::vector<Gate>{{"u_l2", 1.8}, {"b_l2", 1.8}, {"energy", 0.9}}
                                      : std::vector<Gate>{{"u_b_l2", 0.8}};
  bool ok = true;
  for (const auto& name : result.table.norms())
    log << "slope " << name << " = " << fmt(result.table.slope(name)) << '\n';
  for (const auto& g : gates)
  {
    const double s = result.table.slope(g.norm);
    const bool pass = s >= g.min;
    ok = ok && pass;
    log << (pass ? "PASS " : "FAIL ") << g.norm << " slope " << fmt(s) << " >= " << g.min << '\n';
  }
  return ok ? 0 : 1;
}

int cmd_infsup(const RunConfig& config, std::ostream& log)
{
  auto mesh = std::make_shared<const Mesh>(build_structured_cube(config.n));
  auto v = build_space(mesh, Family::LagrangeP2);
  auto q = build_space(mesh, Family::LagrangeP1);
  const double kappa = estimate_infsup(v, q, false);
  const double kappa_mf = estimate_infsup(v, q, true);
  std::ofstream f = open_output(config.out / "infsup.csv");
  f << "n,h,kappa,kappa_mean_free\n"
    << config.n << ',' << fmt(mesh->mesh_size()) << ',' << fmt(kappa) << ',' << fmt(kappa_mf)
    << '\n';
  log << "inf-sup estimate " << fmt(kappa) << '\n';
  return kappa > 0.0 ? 0 : 1;
}

} // namespace

std::string command_name(Command c)
{
  switch (c)
  {
  case Command::Run:
    return "run";
  case Command::MmsSpatial:
    return "mms-spatial";
  case Command::MmsTemporal:
    return "mms-temporal";
  case Command::Stability:
    return "stability";
  case Command::Infsup:
    return "infsup";
  }
  return "?";
}

SchemeParams RunConfig::scheme_params() const
{
  SchemeParams p;
  p.re = re;
  p.rm = rm;
  p.s = s;
  p.tau = tau;
  p.t_final = t_final;
  p.n = n;
  return p;
}

std::string canonical_key(const std::string& key)
{
  std::string k = trim(key);
  while (!k.empty() && k.front() == '-')
    k.erase(k.begin());
  for (char& ch : k)
  {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ch == '_')
      ch = '-';
  }
  if (const auto it = aliases().find(k); it != aliases().end())
    k = it->second;
  if (!known_keys().count(k))
    throw ConfigError(key, "unknown key");
  return k;
}

void apply_setting(RunConfig& config, const std::string& raw_key, const std::string& value)
{
  const std::string key = canonical_key(raw_key);
  if (key == "command")
    config.command = parse_command(value);
  else if (key == "problem")
  {
    const std::string v = trim(value);
    if (v == "mms")
      config.problem = Problem::Mms;
    else if (v == "decay")
      config.problem = Problem::Decay;
    else
      throw ConfigError(key, "expected 'mms' or 'decay', got '" + value + "'");
  }
  else if (key == "re")
    config.re = parse_double(key, value);
  else if (key == "rm")
    config.rm = parse_double(key, value);
  else if (key == "s-coupling")
    config.s = parse_double(key, value);
  else if (key == "tau")
    config.tau = parse_double(key, value);
  else if (key == "tfinal")
    config.t_final = parse_double(key, value);
  else if (key == "n")
    config.n = parse_int(key, value);
  else if (key == "out")
  {
    if (trim(value).empty())
      throw ConfigError(key, "empty path");
    config.out = trim(value);
  }
  else if (key == "vtk-every")
    config.vtk_every = parse_int(key, value);
  else if (key == "solver-tol")
    config.solver.tolerance = parse_double(key, value);
  else if (key == "solver-max-iter")
    config.solver.max_iterations = parse_int(key, value);
  else if (key == "direct-limit")
    config.solver.direct_limit = parse_int(key, value);
  else if (key == "meshes")
    config.meshes = parse_int_list(key, value);
  else if (key == "step-divisors")
    config.step_divisors = parse_int_list(key, value);
  config.explicit_keys.insert(key);
}

void read_config(RunConfig& config, std::istream& in)
{
  std::string line;
  int lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    if (trim(line).empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(trim(line), "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("", "line " + std::to_string(lineno) + ": missing key");
    apply_setting(config, key, line.substr(eq + 1));
  }
}

void read_config_file(RunConfig& config, const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("config", "cannot read '" + path.string() + "'");
  read_config(config, in);
}

void validate(RunConfig& config)
{
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0))
      throw ConfigError(key, "must be positive, got " + fmt(v));
  };
  positive(config.re, "re");
  positive(config.rm, "rm");
  positive(config.tau, "tau");
  positive(config.t_final, "tfinal");
  positive(config.solver.tolerance, "solver-tol");
  if (config.s < 0.0)
    throw ConfigError("s-coupling", "must be non-negative, got " + fmt(config.s));
  if (config.n < 1)
    throw ConfigError("n", "must be >= 1");
  if (config.vtk_every < 0)
    throw ConfigError("vtk-every", "must be >= 0");
  if (config.solver.max_iterations < 1)
    throw ConfigError("solver-max-iter", "must be >= 1");
  if (config.solver.direct_limit < 0)
    throw ConfigError("direct-limit", "must be >= 0");
  for (int m : config.meshes)
    if (m < 1)
      throw ConfigError("meshes", "mesh sizes must be >= 1");
  if (!config.meshes.empty() && config.meshes.size() < 3)
    throw ConfigError("meshes", "a study needs at least 3 meshes");
  for (int k : config.step_divisors)
    if (k < 1)
      throw ConfigError("step-divisors", "divisors must be >= 1");
  if (!config.step_divisors.empty() && config.step_divisors.size() < 3)
    throw ConfigError("step-divisors", "a study needs at least 3 time steps");

  const bool marches = config.command == Command::Run || config.command == Command::Stability;
  if (marches)
  {
    const SchemeParams p = config.scheme_params();
    if (std::abs(p.steps() * p.tau - p.t_final) > 1e-12 * std::max(1.0, p.t_final))
      throw ConfigError("tau", "tfinal must be an integer multiple of tau");
  }
  if (config.command == Command::Infsup)
  {
    // Kuhn cube: vertices plus edge midpoints form a (2n+1)^3 lattice.
    const long long side = 2LL * config.n + 1;
    if (3 * side * side * side > kInfsupMaxVelocityDofs)
      throw ConfigError("n", "the dense inf-sup probe supports n <= 4");
  }
  if (config.s == 0.0)
    config.warnings.push_back("s-coupling = 0: fluid and magnetic field are decoupled");
  ensure_writable(config.out);
}

RunConfig parse_config(const std::vector<std::string>& args)
{
  CLI::App app{"Structure-preserving finite element solver for incompressible MHD"};
  std::string command;
  std::optional<std::string> config_path;
  std::vector<std::pair<std::string, std::optional<std::string>>> flags{
      {"re", {}},  {"rm", {}},  {"s-coupling", {}}, {"tau", {}},
      {"tfinal", {}}, {"n", {}}, {"out", {}},   {"vtk-every", {}},
  };
  app.add_option("command", command, "run | mms-spatial | mms-temporal | stability | infsup");
  app.add_option("--config", config_path, "key = value configuration file");
  for (auto& [name, value] : flags)
    app.add_option("--" + name, value);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try
  {
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp&)
  {
    throw;
  }
  catch (const CLI::ParseError& e)
  {
    throw ConfigError("", e.what());
  }

  RunConfig config;
  if (config_path)
    read_config_file(config, *config_path);
  if (!command.empty())
    apply_setting(config, "command", command);
  for (const auto& [name, value] : flags)
    if (value)
      apply_setting(config, name, *value);
  return config;
}

int run_command(const RunConfig& config, std::ostream& log)
{
  try
  {
    switch (config.command)
    {
    case Command::Run:
      return cmd_run(config, log);
    case Command::Stability:
      return cmd_stability(config, log);
    case Command::MmsSpatial:
    case Command::MmsTemporal:
      return cmd_study(config, log);
    case Command::Infsup:
      return cmd_infsup(config, log);
    }
  }
  catch (const SolverError& e)
  {
    log << "solver error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

int main_entry(const std::vector<std::string>& args, std::ostream& log, std::ostream& err)
{
  RunConfig config;
  try
  {
    config = parse_config(args);
    validate(config);
  }
  catch (const CLI::CallForHelp&)
  {
    log << "usage: mhd [command] [--config FILE] [--re X] [--rm X] [--s-coupling X]\n"
           "           [--tau X] [--tfinal X] [--n N] [--out DIR] [--vtk-every K]\n"
           "commands: run (default), mms-spatial, mms-temporal, stability, infsup\n";
    return 0;
  }
  catch (const ConfigError& e)
  {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  for (const auto& w : config.warnings)
    err << "warning: " << w << '\n';
  try
  {
    const int code = run_command(config, log);
    if (code == 3)
      err << "solver failure\n";
    return code;
  }
  catch (const std::exception& e)
  {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

std::string snapshot_name(int step)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "state_%06d.vtk", step);
  return buf;
}

void write_vtu(const MHDState& state, const std::filesystem::path& path)
{
  if (!state.u.space || !state.p.space || !state.b.space || !state.e.space)
    throw std::invalid_argument("write_vtu: state has unset fields");
  const Mesh& mesh = state.u.space->mesh();
  const int nv = mesh.num_vertices();
  const int nc = mesh.num_cells();

  // Reference vertices of the canonical frame and the barycentre.
  const std::vector<Vec3> corners{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  const std::vector<Vec3> centre{Vec3(0.25, 0.25, 0.25)};

  std::vector<Vec3> u(nv, Vec3::Zero());
  std::vector<double> p(nv, 0.0);
  std::vector<char> seen(nv, 0);
  std::vector<Vec3> b(nc), e(nc);
  const std::vector<double> divb = cell_divergence(state.b);
  for (int c = 0; c < nc; ++c)
  {
    const auto& local = state.u.space->element_map(c).vertices;
    const FieldValues fu = evaluate(state.u, c, corners);
    const FieldValues fp = evaluate(state.p, c, corners);
    for (int i = 0; i < 4; ++i)
      if (!seen[local[i]])
      {
        seen[local[i]] = 1;
        u[local[i]] = fu.value[i];
        p[local[i]] = fp.scalar[i];
      }
    // B and E are affine per cell, so the centre value is the cell average.
    b[c] = evaluate(state.b, c, centre).value[0];
    e[c] = evaluate(state.e, c, centre).value[0];
  }

  std::ofstream f = open_output(path);
  f << "# vtk DataFile Version 3.0\n"
    << "MHD state step " << state.step << " t=" << fmt(state.time) << '\n'
    << "ASCII\nDATASET UNSTRUCTURED_GRID\n"
    << "POINTS " << nv << " double\n";
  auto vec = [&f](const Vec3& x) { f << fmt(x[0]) << ' ' << fmt(x[1]) << ' ' << fmt(x[2]) << '\n'; };
  for (int i = 0; i < nv; ++i)
    vec(mesh.vertex(i));
  f << "CELLS " << nc << ' ' << 5 * nc << '\n';
  for (int c = 0; c < nc; ++c)
  {
    const auto& cell = mesh.cell(c);
    f << 4 << ' ' << cell[0] << ' ' << cell[1] << ' ' << cell[2] << ' ' << cell[3] << '\n';
  }
  f << "CELL_TYPES " << nc << '\n';
  for (int c = 0; c < nc; ++c)
    f << "10\n";

  f << "POINT_DATA " << nv << "\nVECTORS u double\n";
  for (const auto& x : u)
    vec(x);
  f << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (double x : p)
    f << fmt(x) << '\n';

  f << "CELL_DATA " << nc << "\nVECTORS B double\n";
  for (const auto& x : b)
    vec(x);
  f << "VECTORS E double\n";
  for (const auto& x : e)
    vec(x);
  f << "SCALARS divB double 1\nLOOKUP_TABLE default\n";
  for (double x : divb)
    f << fmt(x) << '\n';
  if (!f.flush())
    throw std::runtime_error("write failed: " + path.string());
}

} // namespace mhd::cli
