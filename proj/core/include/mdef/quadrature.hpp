#pragma once

#include <functional>
#include <vector>

namespace mdef {

// Gauss-Legendre rule on [-1,1].  Nodes are found by Newton iteration on the
// Legendre recurrence; order up to 64 is supported and cached.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussLegendre& gauss_legendre(int order);

// Composite rule: [a,b] is split at every supplied breakpoint and at unit
// cell boundaries, one Gauss-Legendre panel per cell.  Cells of unit width
// match how the truncated reference measure assigns mass.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int order, const std::vector<double>& breakpoints = {});

// Tensor rule over the box [ax,bx] x [ay,by] with the same cell splitting.
double integrate2d(const std::function<double(double, double)>& f, double ax,
                   double bx, double ay, double by, int order);

}  // namespace mdef
