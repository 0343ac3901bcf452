#pragma once

#include <vector>

#include "tailrisk/model.hpp"

namespace tailrisk {

// One evaluation of
//   sigma_ij + c sqrt((1 - sigma_ij^2) / log u)  <=  (beta_j / beta_i) log(eps e_i*(u)) / log u
// for j in J (max beta) and i != j. The condition is asymptotic; a pass here
// only means it holds at this grid point.
struct PairDiagnostic {
    int j = 0;
    int i = 0;
    double u = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    bool i_in_J = false;
};

// Sufficient condition for equal slopes beta_i = beta_j:
//   -log(e_j*(u)/u) / ((1 - sigma_ij) log u) < 1, evaluated as the max over the grid.
struct EqualSlopeDiagnostic {
    int j = 0;
    int i = 0;
    double max_ratio = 0.0;
    bool holds = false;
};

struct MakConditionReport {
    double c = 0.0;
    double eps = 0.0;
    std::vector<double> u_grid;
    std::vector<PairDiagnostic> pairs;
    // i restricted to J, and i ranging over every index.
    bool holds_on_grid_within_J = true;
    bool holds_on_grid_all_indices = true;
    std::vector<EqualSlopeDiagnostic> equal_slope;
    bool equal_slope_holds = true;
};

// Throws DomainError for u <= max(e, d * max lambda_i).
MakConditionReport check_mak_condition(const ModelSpec& m, const std::vector<double>& u_grid, double c, double eps);

}  // namespace tailrisk
