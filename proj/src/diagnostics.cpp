#include "tailrisk/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tailrisk/errors.hpp"
#include "tailrisk/tails.hpp"

namespace tailrisk {

MakConditionReport check_mak_condition(const ModelSpec& m, const std::vector<double>& u_grid, double c, double eps) {
    if (!(c > 0.0) || !(eps > 0.0)) throw ValidationError("check_mak_condition needs c > 0 and eps > 0");
    const int d = m.dim();
    const double floor = std::max(std::numbers::e, d * m.lambda.maxCoeff());
    for (double u : u_grid) {
        if (!(u > 1.0)) throw DomainError("check_mak_condition: log(u) <= 0 for u = " + std::to_string(u));
        if (!(u > floor)) {
            std::ostringstream os;
            os << "check_mak_condition: u = " << u << " must exceed max(e, d * max lambda) = " << floor;
            throw DomainError(os.str());
        }
    }

    MakConditionReport rep;
    rep.c = c;
    rep.eps = eps;
    rep.u_grid = u_grid;
    const MaxIndexSet top = max_index_set(m);
    auto in_j = [&](int i) { return std::find(top.J.begin(), top.J.end(), i) != top.J.end(); };

    for (int j : top.J) {
        for (int i = 0; i < d; ++i) {
            if (i == j) continue;
            const double s = m.sigma(i, j);
            for (double u : u_grid) {
                const double logu = std::log(u);
                PairDiagnostic p;
                p.j = j;
                p.i = i;
                p.u = u;
                p.i_in_J = in_j(i);
                p.lhs = s + c * std::sqrt(std::max(0.0, 1.0 - s * s) / logu);
                p.rhs = (m.beta[j] / m.beta[i]) * std::log(eps * estar(m, i, u)) / logu;
                p.holds = p.lhs <= p.rhs;
                if (!p.holds) {
                    rep.holds_on_grid_all_indices = false;
                    if (p.i_in_J) rep.holds_on_grid_within_J = false;
                }
                rep.pairs.push_back(p);
            }
            if (std::abs(m.beta[i] - m.beta[j]) <= kTieTolerance * m.beta[j] && s < 1.0) {
                EqualSlopeDiagnostic e;
                e.j = j;
                e.i = i;
                e.max_ratio = -std::numeric_limits<double>::infinity();
                for (double u : u_grid) {
                    const double ratio = -std::log(estar(m, j, u) / u) / ((1.0 - s) * std::log(u));
                    e.max_ratio = std::max(e.max_ratio, ratio);
                }
                e.holds = e.max_ratio < 1.0;
                if (!e.holds) rep.equal_slope_holds = false;
                rep.equal_slope.push_back(e);
            }
        }
    }
    return rep;
}

}  // namespace tailrisk
