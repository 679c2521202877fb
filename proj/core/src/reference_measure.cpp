#include "mdef/reference_measure.hpp"

#include <set>

#include "mdef/common.hpp"

namespace mdef {

ReferenceMeasure ReferenceMeasure::finite_grid(
    std::vector<std::vector<double>> points, std::vector<double> weights) {
    require(!points.empty(), "finite grid needs at least one point");
    require(points.size() == weights.size(),
            "grid points and weights must have equal length");
    const std::size_t d = points[0].size();
    std::set<std::vector<double>> seen;
    for (std::size_t k = 0; k < points.size(); ++k) {
        require(points[k].size() == d, "grid points must share one dimension");
        require(weights[k] >= 0.0, "grid weights must be nonnegative");
        require(seen.insert(points[k]).second, "grid points must be distinct");
    }
    ReferenceMeasure m;
    m.kind_ = ReferenceKind::finite_grid;
    m.points_ = std::move(points);
    m.weights_ = std::move(weights);
    return m;
}

ReferenceMeasure ReferenceMeasure::lebesgue_truncated(double u_max,
                                                      int quad_order) {
    require(u_max > 0.0, "truncation bound must be positive");
    require(quad_order >= 1 && quad_order <= 64,
            "quadrature order must be in [1,64]");
    ReferenceMeasure m;
    m.kind_ = ReferenceKind::lebesgue_truncated;
    m.u_max_ = u_max;
    m.quad_order_ = quad_order;
    return m;
}

}  // namespace mdef
