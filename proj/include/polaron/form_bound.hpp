#pragma once

#include "polaron/grid.hpp"
#include "polaron/potentials.hpp"

namespace polaron {

// Best constant S in ||grad f||_2^2 >= S ||f||_6^2 on R^3: 3 (pi/2)^{4/3}.
double sharp_sobolev_constant();

// Declared norms of a decomposition V = V1 + V2.
struct FormBoundSplit {
  double v1_norm_five_thirds = 0.0;  // ||V1||_{5/3}
  double v2_sup = 0.0;               // ||V2||_inf
};

// Coulomb -Z/|x| cut at radius R: V1 inside the ball, V2 outside.
FormBoundSplit coulomb_split(double charge, double radius);

struct FormBoundReport {
  double lhs = 0.0;          // |<phi, V phi>|
  double rhs = 0.0;          // C ||V1|| ||phi||_{H1}^2 + ||V2|| ||phi||^2
  double margin = 0.0;       // rhs - lhs
  double constant = 0.0;     // C = max(1/10, 9 / (10 S))
  double h1_norm_sq = 0.0;   // ||phi||^2 + ||grad phi||^2
  double l5_norm_sq = 0.0;   // ||phi||_5^2, the Hoelder intermediate
};

// |<phi,V phi>| <= ||V1||_{5/3} ||phi||_5^2 + ||V2||_inf ||phi||^2, with
// ||phi||_5^2 <= ||phi||^{1/5} ||phi||_6^{9/5} <= ||phi||^2/10 + 9/10 ||phi||_6^2
// and the sharp Sobolev inequality for ||phi||_6.
FormBoundReport form_bound_check(const ComplexField3D& phi,
                                 const ScalarPotentialSpec& v,
                                 const FormBoundSplit& split);

}  // namespace polaron
