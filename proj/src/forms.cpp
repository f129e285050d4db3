#include "mhd/forms.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace mhd
{

int assembly_threads()
{
  if (const char* env = std::getenv("MHD_THREADS"))
  {
    const int n = std::atoi(env);
    if (n >= 1)
      return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for_cells(int num_cells, const std::function<void(int, int)>& body,
                        int threads)
{
  threads = std::clamp(threads, 1, std::max(1, num_cells));
  if (threads == 1)
  {
    for (int c = 0; c < num_cells; ++c)
      body(c, 0);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (num_cells + threads - 1) / threads;
  for (int t = 0; t < threads; ++t)
  {
    const int first = t * chunk;
    const int last = std::min(num_cells, first + chunk);
    pool.emplace_back([&body, first, last, t] {
      for (int c = first; c < last; ++c)
        body(c, t);
    });
  }
  for (auto& th : pool)
    th.join();
}

namespace
{

bool needs_coefficient(FormKind kind)
{
  return kind == FormKind::ConvectionSkew || kind == FormKind::CrossLorentz
         || kind == FormKind::CrossOhm;
}

void validate(const FormDescriptor& f)
{
  if (!f.trial || !f.test)
    throw std::invalid_argument("assemble_bilinear: missing space");
  if (&f.trial->mesh() != &f.test->mesh())
    throw std::invalid_argument("assemble_bilinear: spaces on different meshes");
  const Family tr = f.trial->family();
  const Family te = f.test->family();
  const Family coef = f.coefficient ? f.coefficient->space->family() : tr;
  bool ok = false;
  switch (f.kind)
  {
  case FormKind::Mass:
    ok = tr == te;
    break;
  case FormKind::Stiffness:
    ok = tr == te && (tr == Family::LagrangeP2 || tr == Family::LagrangeP1);
    break;
  case FormKind::DivPressure:
    ok = tr == Family::LagrangeP1 && te == Family::LagrangeP2;
    break;
  case FormKind::CurlCoupling:
    ok = tr == Family::BDM1 && te == Family::Nedelec2;
    break;
  case FormKind::ConvectionSkew:
    ok = tr == Family::LagrangeP2 && te == Family::LagrangeP2
         && coef == Family::LagrangeP2;
    break;
  case FormKind::CrossLorentz:
    ok = tr == Family::Nedelec2 && te == Family::LagrangeP2 && coef == Family::BDM1;
    break;
  case FormKind::CrossOhm:
    ok = tr == Family::LagrangeP2 && te == Family::Nedelec2 && coef == Family::BDM1;
    break;
  }
  if (!ok)
    throw std::invalid_argument("assemble_bilinear: space mismatch for form ("
                                + std::string(family_name(tr)) + " -> "
                                + std::string(family_name(te)) + ")");
  if (needs_coefficient(f.kind))
  {
    if (!f.coefficient)
      throw std::invalid_argument("assemble_bilinear: form needs a coefficient");
    if (&f.coefficient->space->mesh() != &f.trial->mesh())
      throw std::invalid_argument("assemble_bilinear: coefficient on another mesh");
  }
}

struct CellWork
{
  ElementValues trial, test, coef;
  FieldValues coef_values;
  Eigen::MatrixXd local;
  TripletList triplets;
};

void local_matrix(const FormDescriptor& f, const ElementValues& trial,
                  const ElementValues& test, const FieldValues& coef,
                  Eigen::MatrixXd& a)
{
  const int nq = trial.num_points;
  const int nt = test.num_dofs;
  const int nr = trial.num_dofs;
  a.setZero(nt, nr);
  for (int q = 0; q < nq; ++q)
  {
    const double w = trial.weights[q];
    switch (f.kind)
    {
    case FormKind::Mass:
      if (!trial.scalar.empty())
      {
        for (int i = 0; i < nt; ++i)
          for (int j = 0; j < nr; ++j)
            a(i, j) += w * test.scalar[test.index(q, i)] * trial.scalar[trial.index(q, j)];
      }
      else
      {
        for (int i = 0; i < nt; ++i)
          for (int j = 0; j < nr; ++j)
            a(i, j) += w * test.value[test.index(q, i)].dot(trial.value[trial.index(q, j)]);
      }
      break;
    case FormKind::Stiffness:
      if (!trial.scalar.empty())
      {
        for (int i = 0; i < nt; ++i)
          for (int j = 0; j < nr; ++j)
            a(i, j) += w * test.gradient[test.index(q, i)].dot(trial.gradient[trial.index(q, j)]);
      }
      else
      {
        for (int i = 0; i < nt; ++i)
          for (int j = 0; j < nr; ++j)
            a(i, j) += w * test.jacobian[test.index(q, i)].cwiseProduct(
                               trial.jacobian[trial.index(q, j)]).sum();
      }
      break;
    case FormKind::DivPressure:
      for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nr; ++j)
          a(i, j) += w * test.divergence[test.index(q, i)] * trial.scalar[trial.index(q, j)];
      break;
    case FormKind::CurlCoupling:
      for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nr; ++j)
          a(i, j) += w * test.curl[test.index(q, i)].dot(trial.value[trial.index(q, j)]);
      break;
    case FormKind::ConvectionSkew:
    {
      // Built as K - K^T so that the block is skew to rounding.
      const Vec3& wq = coef.value[q];
      for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nr; ++j)
          a(i, j) += 0.5 * w * (trial.jacobian[trial.index(q, j)] * wq).dot(test.value[test.index(q, i)]);
      break;
    }
    case FormKind::CrossLorentz:
    case FormKind::CrossOhm:
    {
      const Vec3& bq = coef.value[q];
      for (int j = 0; j < nr; ++j)
      {
        const Vec3 cross = trial.value[trial.index(q, j)].cross(bq);
        for (int i = 0; i < nt; ++i)
          a(i, j) += w * cross.dot(test.value[test.index(q, i)]);
      }
      break;
    }
    }
  }
  if (f.kind == FormKind::ConvectionSkew)
  {
    Eigen::MatrixXd k = a;
    a = k - k.transpose();
  }
}

} // namespace

TripletList assemble_bilinear(const FormDescriptor& f)
{
  validate(f);
  const int degree = f.quadrature_degree > 0
                         ? f.quadrature_degree
                         : (needs_coefficient(f.kind) ? kTrilinearDegree : kMassDegree);
  const QuadratureRule& rule = quadrature(degree);
  const ReferenceTable trial_table = tabulate(f.trial->family(), rule.points);
  const ReferenceTable test_table = tabulate(f.test->family(), rule.points);
  ReferenceTable coef_table;
  if (f.coefficient)
    coef_table = tabulate(f.coefficient->space->family(), rule.points);

  const int nc = f.trial->mesh().num_cells();
  const int threads = std::min(assembly_threads(), std::max(1, nc / 64));
  std::vector<CellWork> work(std::max(1, threads));
  for (auto& w : work)
    w.triplets.reserve(static_cast<std::size_t>(nc) * f.trial->local_dim()
                       * f.test->local_dim() / work.size());

  parallel_for_cells(
      nc,
      [&](int c, int t) {
        CellWork& w = work[t];
        f.trial->evaluate_basis(c, trial_table, rule.points, rule.weights, w.trial);
        const ElementValues* test = &w.trial;
        if (f.test.get() != f.trial.get())
        {
          f.test->evaluate_basis(c, test_table, rule.points, rule.weights, w.test);
          test = &w.test;
        }
        if (f.coefficient && needs_coefficient(f.kind))
        {
          const FunctionSpace& cs = *f.coefficient->space;
          cs.evaluate_basis(c, coef_table, rule.points, {}, w.coef);
          contract(cs, w.coef, f.coefficient->coeffs, c, w.coef_values);
        }
        local_matrix(f, w.trial, *test, w.coef_values, w.local);
        const auto rows = f.test->cell_dofs(c);
        const auto cols = f.trial->cell_dofs(c);
        for (int i = 0; i < w.local.rows(); ++i)
          for (int j = 0; j < w.local.cols(); ++j)
            if (w.local(i, j) != 0.0)
              w.triplets.add(rows[i], cols[j], f.scale * w.local(i, j));
      },
      threads);

  TripletList out(f.test->dim(), f.trial->dim());
  std::size_t total = 0;
  for (const auto& w : work)
    total += w.triplets.entries().size();
  out.reserve(total);
  for (const auto& w : work)
    out.append(w.triplets, 0, 0);
  return out;
}

TripletList cross_product_block(std::shared_ptr<const FunctionSpace> trial,
                                std::shared_ptr<const FunctionSpace> test,
                                const FEField& frozen, double scale)
{
  FormDescriptor f;
  f.kind = trial->family() == Family::Nedelec2 ? FormKind::CrossLorentz
                                               : FormKind::CrossOhm;
  f.trial = std::move(trial);
  f.test = std::move(test);
  f.coefficient = &frozen;
  f.scale = scale;
  return assemble_bilinear(f);
}

namespace
{

// Runs body(ev, q, cell, b) over all cells and quadrature points.
template <class Body>
Vector load_loop(const FunctionSpace& space, int degree, Body&& body)
{
  const QuadratureRule& rule = quadrature(degree);
  const ReferenceTable table = tabulate(space.family(), rule.points);
  Vector b = Vector::Zero(space.dim());
  ElementValues ev;
  for (int c = 0; c < space.mesh().num_cells(); ++c)
  {
    space.evaluate_basis(c, table, rule.points, rule.weights, ev);
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < ev.num_points; ++q)
      body(ev, q, PointContext{c, rule.points[q], ev.x[q]}, dofs, b);
  }
  return b;
}

} // namespace

Vector assemble_load(const FunctionSpace& space, const VectorSource& f, int degree)
{
  if (space.value_dim() != 3)
    throw std::invalid_argument("assemble_load: vector source on a scalar space");
  return load_loop(space, degree, [&](const ElementValues& ev, int q,
                                      const PointContext& pc, auto dofs, Vector& b) {
    const Vec3 fq = f(pc);
    if (fq.isZero(0.0))
      return;
    for (int i = 0; i < ev.num_dofs; ++i)
      b[dofs[i]] += ev.weights[q] * fq.dot(ev.value[ev.index(q, i)]);
  });
}

Vector assemble_load(const FunctionSpace& space, const ScalarSource& f, int degree)
{
  if (space.value_dim() != 1)
    throw std::invalid_argument("assemble_load: scalar source on a vector space");
  return load_loop(space, degree, [&](const ElementValues& ev, int q,
                                      const PointContext& pc, auto dofs, Vector& b) {
    const double fq = f(pc);
    for (int i = 0; i < ev.num_dofs; ++i)
      b[dofs[i]] += ev.weights[q] * fq * ev.scalar[ev.index(q, i)];
  });
}

Vector assemble_curl_load(const FunctionSpace& space, const VectorSource& f, int degree)
{
  if (space.family() != Family::Nedelec2 && space.family() != Family::LagrangeP2)
    throw std::invalid_argument("assemble_curl_load: space has no curl");
  return load_loop(space, degree, [&](const ElementValues& ev, int q,
                                      const PointContext& pc, auto dofs, Vector& b) {
    const Vec3 fq = f(pc);
    for (int i = 0; i < ev.num_dofs; ++i)
      b[dofs[i]] += ev.weights[q] * fq.dot(ev.curl[ev.index(q, i)]);
  });
}

Vector assemble_gradient_load(const FunctionSpace& space, const MatrixSource& g,
                              int degree)
{
  if (space.family() != Family::LagrangeP2)
    throw std::invalid_argument("assemble_gradient_load: needs the velocity space");
  return load_loop(space, degree, [&](const ElementValues& ev, int q,
                                      const PointContext& pc, auto dofs, Vector& b) {
    const Mat3 gq = g(pc);
    for (int i = 0; i < ev.num_dofs; ++i)
      b[dofs[i]] += ev.weights[q] * gq.cwiseProduct(ev.jacobian[ev.index(q, i)]).sum();
  });
}

Vector assemble_divergence_load(const FunctionSpace& space, const ScalarSource& s,
                                int degree)
{
  if (space.family() != Family::LagrangeP2 && space.family() != Family::BDM1)
    throw std::invalid_argument("assemble_divergence_load: space has no divergence");
  return load_loop(space, degree, [&](const ElementValues& ev, int q,
                                      const PointContext& pc, auto dofs, Vector& b) {
    const double sq = s(pc);
    for (int i = 0; i < ev.num_dofs; ++i)
      b[dofs[i]] += ev.weights[q] * sq * ev.divergence[ev.index(q, i)];
  });
}

} // namespace mhd
