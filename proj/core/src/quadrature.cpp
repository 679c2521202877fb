#include "mdef/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "mdef/common.hpp"

namespace mdef {

namespace {

GaussLegendre compute_rule(int n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int order) {
    require(order >= 1 && order <= 64, "quadrature order must be in [1,64]");
    static std::map<int, GaussLegendre> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int order, const std::vector<double>& breakpoints) {
    if (!(b > a)) return 0.0;
    std::vector<double> cuts;
    cuts.push_back(a);
    // unit cell boundaries keep panels aligned with the measure's cells
    for (double c = std::floor(a) + 1.0; c < b; c += 1.0)
        if (c > a) cuts.push_back(c);
    for (double c : breakpoints)
        if (c > a && c < b) cuts.push_back(c);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const GaussLegendre& rule = gauss_legendre(order);
    std::vector<double> parts;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        const double h = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        double s = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            s += rule.weights[k] * f(mid + h * rule.nodes[k]);
        parts.push_back(h * s);
    }
    return pairwise_sum(parts);
}

double integrate2d(const std::function<double(double, double)>& f, double ax,
                   double bx, double ay, double by, int order) {
    return integrate(
        [&](double x) {
            return integrate([&](double y) { return f(x, y); }, ay, by, order);
        },
        ax, bx, order);
}

}  // namespace mdef
