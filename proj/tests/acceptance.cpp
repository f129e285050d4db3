// Acceptance driver: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include "mhd/diagnostics.hpp"
#include "mhd/norms.hpp"
#include "mhd/projections.hpp"
#include "mhd/scheme.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace mhd;

namespace
{

std::shared_ptr<const Mesh> cube(int n)
{
  return std::make_shared<const Mesh>(build_structured_cube(n));
}

std::shared_ptr<const Discretization> discretization(int n)
{
  return std::make_shared<Discretization>(std::make_shared<Mesh>(build_structured_cube(n)));
}

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Collects named checks of one criterion.
struct Checks
{
  bool ok = true;
  std::ostringstream detail;

  void require(bool pass, const std::string& what)
  {
    if (!pass)
    {
      ok = false;
      detail << " [fail: " << what << ']';
    }
  }
  void note(const std::string& s) { detail << ' ' << s; }
};

std::shared_ptr<const Mesh> random_cell(std::mt19937& rng)
{
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  for (auto& x : v)
    x += Vec3(u(rng), u(rng), u(rng));
  return std::make_shared<const Mesh>(Mesh::from_cells(v, {{0, 1, 2, 3}}));
}

// ---------------------------------------------------------------------------

struct DecayRun
{
  std::vector<double> energy, div_ratio, residual;
};

DecayRun decay_run(int n, double tau, double t_final)
{
  const ManufacturedSolution mms(1, 1, 1);
  SchemeParams params;
  params.n = n;
  params.tau = tau;
  params.t_final = t_final;
  auto disc = discretization(n);
  MHDScheme scheme(disc, params, Sources{});
  DecayRun out;
  MHDState prev = scheme.initialize(initial_data(mms));
  scheme.run(prev, [&](const MHDState& s, const StepRecord& r) {
    out.energy.push_back(r.energy);
    out.div_ratio.push_back(r.div_inf / std::max(1.0, l2_norm(s.b)));
    if (s.step > 0)
      out.residual.push_back(energy_residual(s, prev, {}, params, *disc).relative());
    prev = s;
  });
  return out;
}

void criterion_1(Checks& c)
{
  const DecayRun r = decay_run(4, 0.05, 1.0);
  double worst = 0;
  for (double d : r.div_ratio)
    worst = std::max(worst, d);
  c.require(r.div_ratio.size() == 21, "21 time levels");
  c.require(worst <= 1e-11, "max |div B| <= 1e-11 max(1, |B|)");
  c.note("max div ratio " + num(worst));
}

void criterion_2(Checks& c)
{
  const DecayRun r = decay_run(4, 0.05, 1.0);
  double worst = 0;
  for (double x : r.residual)
    worst = std::isfinite(x) ? std::max(worst, x) : INFINITY;
  c.require(worst <= 1e-9, "energy identity residual <= 1e-9");
  c.note("max relative residual " + num(worst));

  for (double tau : {0.5, 0.1, 0.02})
  {
    const DecayRun s = decay_run(4, tau, 1.0);
    double rise = 0;
    for (std::size_t i = 1; i < s.energy.size(); ++i)
      rise = std::max(rise, s.energy[i] - s.energy[i - 1]);
    c.require(rise <= 1e-12 * s.energy.front(), "monotone energy at tau=" + num(tau));
    c.note("tau=" + num(tau) + " max rise " + num(rise) + " E0 " + num(s.energy.front()));
  }
}

void report_study(Checks& c, const StudyResult& r,
                  const std::vector<std::pair<std::string, double>>& gates)
{
  for (const auto& name : study_norms())
    c.note(name + "=" + num(r.table.slope(name)));
  for (const auto& [name, min] : gates)
    c.require(r.table.slope(name) >= min, name + " slope >= " + num(min));
  for (int i = 0; i < r.table.rows(); ++i)
  {
    std::ostringstream row;
    row << "(" << num(r.table.steps()[i]);
    for (const auto& name : r.table.norms())
      row << ' ' << name << '=' << num(r.table.error(i, name));
    row << ')';
    c.note(row.str());
  }
}

void criterion_3(Checks& c)
{
  const ManufacturedSolution mms(1, 1, 1);
  const StudyResult r = convergence_study(StudyConfig::spatial(), mms);
  report_study(c, r, {{"u_l2", 1.8}, {"b_l2", 1.8}, {"energy", 0.9}});
}

void criterion_4(Checks& c)
{
  const ManufacturedSolution mms(1, 1, 1);
  const StudyResult r = convergence_study(StudyConfig::temporal(), mms);
  report_study(c, r, {{"u_b_l2", 0.8}});
}

void criterion_5(Checks& c)
{
  std::mt19937 rng(2024);
  double worst_bound = -INFINITY, worst_proj = 0;
  for (int n : {2, 4})
  {
    auto m = cube(n);
    CurlProjector curl(build_space(m, Family::Nedelec2), build_space(m, Family::BDM1));
    for (int k = 0; k < 20; ++k)
    {
      const testing::RandomPolyField field(3, rng);
      const VectorField curl_exact = [&field](const Vec3& x, double) { return field.curl(x); };
      const FEField h = curl.curl(field.field(), 0.0);
      const FEField ph = curl.project(curl_exact, 0.0);
      const double discrete = mass_norm(curl.mass(), h.coeffs);
      const double exact = curl_error(FEField(curl.space()), curl_exact, 0.0);
      worst_bound = std::max(worst_bound, discrete - exact);
      worst_proj = std::max(worst_proj, mass_norm(curl.mass(), h.coeffs - ph.coeffs));
    }
  }
  c.require(worst_bound <= 1e-10, "|curl_h C| <= |curl C| + 1e-10");
  c.require(worst_proj <= 1e-10, "|curl_h C - P(curl C)| <= 1e-10");
  c.note("max(|curl_h C| - |curl C|) " + num(worst_bound) + ", max projection gap "
         + num(worst_proj));
}

void criterion_6(Checks& c)
{
  const ManufacturedSolution mms(1, 1, 1);
  double idem = 0, div = 0, curl_gap = 0;
  for (int n : {2, 4})
  {
    auto m = cube(n);
    auto v = build_space(m, Family::LagrangeP2);
    auto q = build_space(m, Family::LagrangeP1);
    auto d = build_space(m, Family::BDM1);
    DivFreeProjector pd(d);
    CurlProjector curl(build_space(m, Family::Nedelec2), d);

    const ProjectionReport b = pd.project(mms.b(), 0.4);
    div = std::max({div, b.divergence_inf, max_abs(cell_divergence(b.field))});
    idem = std::max(idem, l2_distance(pd.project(b.field).field, b.field));
    curl_gap = std::max(curl_gap, mass_norm(curl.mass(), curl.curl(b.field).coeffs
                                                             - curl.curl(mms.b(), 0.4).coeffs));

    const ProjectionReport s = stokes_project({mms.u(), mms.grad_u(), mms.p()}, 0.4, v, q, 1.0);
    const ProjectionReport again = stokes_project(s.field, *s.pressure, 1.0);
    idem = std::max({idem, l2_distance(again.field, s.field),
                     l2_distance(*again.pressure, *s.pressure)});
  }
  c.require(idem <= 1e-10, "idempotence");
  c.require(div <= 1e-12, "divergence of the projection");
  c.require(curl_gap <= 1e-10, "curl_h of the projection defect");
  c.note("idempotence " + num(idem) + ", div " + num(div) + ", curl_h defect " + num(curl_gap));

  // Initial data errors over n = 2, 4, 8.
  std::vector<double> h, u_l2, u_h1, b_l2;
  for (int n : {2, 4, 8})
  {
    auto disc = discretization(n);
    SchemeParams params;
    params.n = n;
    MHDScheme scheme(disc, params, manufactured_sources(mms));
    const MHDState s0 = scheme.initialize(initial_data(mms));
    const ErrorReport e = error_norms(s0, mms, *disc, params.tau);
    h.push_back(1.0 / n);
    u_l2.push_back(e.u_l2);
    u_h1.push_back(e.u_h1);
    b_l2.push_back(e.b_l2);
  }
  for (const auto& [name, err] : {std::pair{"u_l2", &u_l2}, {"u_h1", &u_h1}, {"b_l2", &b_l2}})
  {
    const double rate = least_squares_slope(h, *err);
    c.require(rate >= 1.8, std::string("initial ") + name + " rate >= 1.8");
    c.note(std::string("initial ") + name + " rate " + num(rate));
  }
}

void criterion_7(Checks& c)
{
  // Quadrature against closed-form barycentric monomial integrals.
  double quad = 0;
  for (int degree = 1; degree <= 10; ++degree)
  {
    const QuadratureRule& rule = quadrature(degree);
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b)
        for (int cc = 0; a + b + cc <= degree; ++cc)
          for (int d = 0; a + b + cc + d <= degree; ++d)
          {
            double s = 0;
            for (std::size_t i = 0; i < rule.size(); ++i)
            {
              const auto l = barycentric(rule.points[i]);
              s += rule.weights[i] * std::pow(l[0], a) * std::pow(l[1], b)
                   * std::pow(l[2], cc) * std::pow(l[3], d);
            }
            const double exact = testing::simplex_monomial(a, b, cc, d, 1.0 / 6);
            quad = std::max(quad, std::abs(s - exact) / exact);
          }
  }
  c.require(quad <= 1e-12, "quadrature exactness");
  c.note("quadrature " + num(quad));

  std::mt19937 rng(77);

  // P1 mass entries V/10 and V/20.
  double p1 = 0;
  for (int k = 0; k < 3; ++k)
  {
    auto mesh = random_cell(rng);
    auto q = build_space(mesh, Family::LagrangeP1);
    const double vol = cell_geometry(*mesh, 0).volume;
    const Eigen::MatrixXd m = assemble_matrix({FormKind::Mass, q, q}).to_dense();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        p1 = std::max(p1, std::abs(m(i, j) - (i == j ? vol / 10 : vol / 20)) / vol);
  }
  c.require(p1 <= 1e-14, "P1 mass entries");
  c.note("P1 mass " + num(p1));

  // Dof duality: Lagrange nodality and moment duality of the vector bases.
  double dual = 0;
  {
    const auto& v = reference_vertices();
    std::vector<Vec3> nodes(v.begin(), v.end());
    for (const auto& e : kTetEdges)
      nodes.push_back(0.5 * (v[e[0]] + v[e[1]]));
    const ReferenceTable p2 = tabulate(Family::LagrangeP2, nodes);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j)
        dual = std::max(dual, std::abs(p2.scalar[p2.index(i, j)] - (i == j)));
    const ReferenceTable p1t = tabulate(Family::LagrangeP1, std::vector<Vec3>(v.begin(), v.end()));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        dual = std::max(dual, std::abs(p1t.scalar[p1t.index(i, j)] - (i == j)));
    for (Family fam : {Family::Nedelec2, Family::BDM1})
    {
      const auto dof = fam == Family::Nedelec2 ? testing::nedelec_dof : testing::bdm_dof;
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
        {
          const double value = dof(i, [fam, j](const Vec3& x) {
            return tabulate(fam, std::vector<Vec3>{x}).vector[j];
          });
          dual = std::max(dual, std::abs(value - (i == j)));
        }
    }
  }
  c.require(dual <= 1e-12, "dof duality");
  c.note("duality " + num(dual));

  // de Rham inclusion: curls of C_h functions are in D_h.
  double incl = 0;
  {
    std::vector<Vec3> pts;
    for (int i = 0; i < 8; ++i)
      pts.push_back(testing::random_point_in_tet(rng));
    const ReferenceTable ned = tabulate(Family::Nedelec2, pts);
    const ReferenceTable bdm = tabulate(Family::BDM1, pts);
    std::vector<std::shared_ptr<const Mesh>> meshes{cube(1)};
    for (int k = 0; k < 3; ++k)
      meshes.push_back(random_cell(rng));
    for (const auto& mesh : meshes)
    {
      auto cs = build_space(mesh, Family::Nedelec2);
      auto ds = build_space(mesh, Family::BDM1);
      for (int cell = 0; cell < mesh->num_cells(); ++cell)
      {
        ElementValues ce, de;
        cs->evaluate_basis(cell, ned, pts, {}, ce);
        ds->evaluate_basis(cell, bdm, pts, {}, de);
        Eigen::MatrixXd a(3 * pts.size(), 12);
        for (std::size_t q = 0; q < pts.size(); ++q)
          for (int j = 0; j < 12; ++j)
            a.block<3, 1>(3 * q, j) = de.value[de.index(q, j)];
        const auto qr = a.colPivHouseholderQr();
        for (int i = 0; i < 12; ++i)
        {
          Eigen::VectorXd b(3 * pts.size());
          for (std::size_t q = 0; q < pts.size(); ++q)
            b.segment<3>(3 * q) = ce.curl[ce.index(q, i)];
          const Eigen::VectorXd x = qr.solve(b);
          incl = std::max(incl, (a * x - b).norm() / std::max(1.0, b.norm()));
        }
      }
    }
  }
  c.require(incl < 1e-12, "de Rham inclusion");
  c.note("inclusion " + num(incl));

  // Assembled blocks against the one-cell dense oracle.
  double blocks = 0;
  for (int k = 0; k < 3; ++k)
  {
    auto mesh = random_cell(rng);
    auto v = build_space(mesh, Family::LagrangeP2);
    auto q = build_space(mesh, Family::LagrangeP1);
    auto cs = build_space(mesh, Family::Nedelec2);
    auto ds = build_space(mesh, Family::BDM1);
    std::uniform_real_distribution<double> u(-1, 1);
    FEField w(v), b(ds);
    for (int i = 0; i < v->dim(); ++i)
      w.coeffs[i] = u(rng);
    for (int i = 0; i < ds->dim(); ++i)
      b.coeffs[i] = u(rng);
    const std::vector<FormDescriptor> forms = {
        {FormKind::Mass, q, q},
        {FormKind::Mass, v, v},
        {FormKind::Mass, cs, cs},
        {FormKind::Mass, ds, ds},
        {FormKind::Stiffness, q, q},
        {FormKind::Stiffness, v, v},
        {FormKind::DivPressure, q, v},
        {FormKind::CurlCoupling, ds, cs},
        {FormKind::ConvectionSkew, v, v, &w},
        {FormKind::CrossLorentz, cs, v, &b},
        {FormKind::CrossOhm, v, cs, &b},
    };
    for (const auto& f : forms)
    {
      const Eigen::MatrixXd a = assemble_matrix(f).to_dense();
      const Eigen::MatrixXd o = testing::dense_form_oracle(f);
      blocks = std::max(blocks, (a - o).cwiseAbs().maxCoeff()
                                    / std::max(1.0, o.cwiseAbs().maxCoeff()));
    }
  }
  c.require(blocks <= 1e-12, "assembled blocks vs dense oracle");
  c.note("blocks " + num(blocks));
}

} // namespace

int main(int argc, char** argv)
{
  const std::vector<std::pair<int, std::function<void(Checks&)>>> criteria = {
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
      {5, criterion_5}, {6, criterion_6}, {7, criterion_7},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i)
    selected.insert(std::atoi(argv[i]));

  bool all = true;
  for (const auto& [id, body] : criteria)
  {
    if (!selected.empty() && !selected.count(id))
      continue;
    Checks c;
    const auto start = std::chrono::steady_clock::now();
    try
    {
      body(c);
    }
    catch (const std::exception& e)
    {
      c.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && c.ok;
    std::cout << "criterion " << id << ": " << (c.ok ? "PASS" : "FAIL") << " (" << num(secs)
              << " s)" << c.detail.str() << std::endl;
  }
  return all ? 0 : 1;
}
