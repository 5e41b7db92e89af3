#pragma once

#include "singcov/models.hpp"
#include "singcov/piecewise.hpp"
#include "singcov/quadrature.hpp"

namespace singcov::norms {

struct NormOptions {
  quad::Tolerances tol{};
};

// ||f||_H^2 = int f^2(s) R(ds,inf) - 1/2 int int (f(s1)-f(s2))^2 dmu
double norm_H_sq(const PiecewiseFn& f, const models::CovModel& model,
                 const NormOptions& opts = {});

// ||f||_R^2: same structure with |R|(ds,inf) and +1/2 ... d|mu|
double norm_R_sq(const PiecewiseFn& f, const models::CovModel& model,
                 const NormOptions& opts = {});

// <f,g>_H = int fg R(ds,inf) - 1/2 int int (f(s1)-f(s2))(g(s1)-g(s2)) dmu
double inner_H(const PiecewiseFn& f, const PiecewiseFn& g, const models::CovModel& model,
               const NormOptions& opts = {});

// absolute-measure counterpart of inner_H
double inner_R(const PiecewiseFn& f, const PiecewiseFn& g, const models::CovModel& model,
               const NormOptions& opts = {});

// <f1 (x) f2, g1 (x) g2>_{2,R} = <f1,g1>_R <f2,g2>_R
double norm_2R_sq_tensor(const PiecewiseFn& f1, const PiecewiseFn& f2, const PiecewiseFn& g1,
                         const PiecewiseFn& g2, const models::CovModel& model,
                         const NormOptions& opts = {});

// E(I_2(h)^2) for planar-step h: double sum of R(.,.)R(.,.) against the
// atomic planar-increment measure of h
double norm_2R_sq_planar(const PlanarStepFn& h, const models::CovModel& model);

// norm values for models violating Assumption (D) are evaluations of the
// displays without the isometry guarantee; reports label them formal
bool norms_formal(const models::CovModel& model);

}  // namespace singcov::norms
