#pragma once

#include "mhd/function_space.hpp"
#include "mhd/sparse.hpp"

#include <functional>
#include <memory>

namespace mhd
{

/// Bilinear forms of the scheme. Rows are test dofs, columns trial dofs.
///
///  Mass            (u, v)                          any space with itself
///  Stiffness       (grad u, grad v)                V_h or Q_h with itself
///  DivPressure     (p, div v)                      trial Q_h, test V_h
///  CurlCoupling    (B, curl F)                     trial D_h, test C_h
///  ConvectionSkew  1/2 [(w.grad u, v) - (w.grad v, u)]  V_h, w in V_h
///  CrossLorentz    (H x b, v)                      trial C_h, test V_h, b in D_h
///  CrossOhm        (u x b, F)                      trial V_h, test C_h, b in D_h
enum class FormKind
{
  Mass,
  Stiffness,
  DivPressure,
  CurlCoupling,
  ConvectionSkew,
  CrossLorentz,
  CrossOhm,
};

struct FormDescriptor
{
  FormKind kind = FormKind::Mass;
  std::shared_ptr<const FunctionSpace> trial;
  std::shared_ptr<const FunctionSpace> test;
  /// Frozen coefficient (w for convection, b for the cross-product forms).
  const FEField* coefficient = nullptr;
  double scale = 1.0;
  /// 0 selects the default: kMassDegree, or kTrilinearDegree for forms
  /// with a coefficient.
  int quadrature_degree = 0;
};

/// Throws std::invalid_argument when the spaces do not fit the kind.
TripletList assemble_bilinear(const FormDescriptor& form);

inline SparseMatrix assemble_matrix(const FormDescriptor& form)
{
  return assemble_finalize(assemble_bilinear(form));
}

/// (trial x frozen, test) for the Lorentz (C_h -> V_h) or Ohm (V_h -> C_h)
/// pairing, selected from the spaces.
TripletList cross_product_block(std::shared_ptr<const FunctionSpace> trial,
                                std::shared_ptr<const FunctionSpace> test,
                                const FEField& frozen, double scale = 1.0);

/// Load vector int f . phi_i for vector spaces.
Vector assemble_load(const FunctionSpace& space, const VectorSource& f,
                     int degree);
/// Load vector int f phi_i for the scalar space.
Vector assemble_load(const FunctionSpace& space, const ScalarSource& f,
                     int degree);

/// int f . curl phi_i (C_h).
Vector assemble_curl_load(const FunctionSpace& space, const VectorSource& f,
                          int degree);
/// int G : grad phi_i (V_h), G(x) row i = gradient of component i.
Vector assemble_gradient_load(const FunctionSpace& space, const MatrixSource& g,
                              int degree);
/// int s div phi_i (V_h or D_h).
Vector assemble_divergence_load(const FunctionSpace& space,
                                const ScalarSource& s, int degree);

inline Vector assemble_load(const FunctionSpace& space, const VectorField& f,
                            double t, int degree)
{
  return assemble_load(space, at_time(f, t), degree);
}

/// Number of worker threads for element loops: MHD_THREADS when set (>= 1),
/// otherwise the hardware concurrency.
int assembly_threads();

/// Runs body(cell, thread) over all cells, split into contiguous chunks.
void parallel_for_cells(int num_cells,
                        const std::function<void(int, int)>& body,
                        int threads);

} // namespace mhd
