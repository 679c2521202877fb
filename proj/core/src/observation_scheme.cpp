#include "mdef/observation_scheme.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

#include "mdef/common.hpp"

namespace mdef {

namespace {

constexpr double kAlive = std::numeric_limits<double>::infinity();

// Signature of a point under the scheme's time-t sigma-algebra: two points
// share an atom exactly when their signatures coincide.
void signature_and_label(const ObservationScheme& s,
                         const std::vector<double>& pt, double t, int n,
                         std::vector<double>& sig, std::string& label) {
    sig.clear();
    std::ostringstream os;
    switch (s.kind) {
        case SchemeKind::initial: {
            sig = pt;
            os << "point=";
            for (std::size_t j = 0; j < pt.size(); ++j)
                os << (j ? "," : "") << format_double(pt[j]);
            break;
        }
        case SchemeKind::progressive_single: {
            const double u = pt[0];
            if (u <= t) {
                sig = {0.0, u};
                os << "default@" << format_double(u);
            } else {
                sig = {1.0, kAlive};
                os << "alive";
            }
            break;
        }
        case SchemeKind::insider: {
            const double u = pt[0];
            if (u <= t) {
                sig = {0.0, u};
                os << "default@" << format_double(u);
            } else if (t < s.t0 && u <= s.t0) {
                sig = {1.0, 0.0};
                os << "alive-cut-lo";
            } else if (t < s.t0) {
                sig = {1.0, 1.0};
                os << "alive-cut-hi";
            } else {
                sig = {1.0, kAlive};
                os << "alive";
            }
            break;
        }
        case SchemeKind::advanced: {
            // indicator levels available by t are [eps, t+eps]; values in
            // [0,eps] are never separated from each other
            const double u = pt[0];
            if (u <= s.eps) {
                sig = {0.0, 0.0};
                os << "early-window";
            } else if (u <= t + s.eps) {
                sig = {1.0, u};
                os << "default@" << format_double(u);
            } else {
                sig = {2.0, kAlive};
                os << "alive";
            }
            break;
        }
        case SchemeKind::delayed: {
            const double cut = std::max(t - s.eps, 0.0);
            const double u = pt[0];
            if (u <= 0.0) {
                sig = {0.0, 0.0};
                os << "at-origin";
            } else if (u <= cut) {
                sig = {1.0, u};
                os << "default@" << format_double(u);
            } else {
                sig = {2.0, kAlive};
                os << "alive";
            }
            break;
        }
        case SchemeKind::ordered_counting: {
            int i = 0;
            while (i < n && pt[i] <= t) ++i;
            sig.push_back(double(i));
            for (int j = 0; j < i; ++j) sig.push_back(pt[j]);
            os << "count=" << i;
            if (i > 0) {
                os << ";pins=";
                for (int j = 0; j < i; ++j)
                    os << (j ? "," : "") << format_double(pt[j]);
            }
            break;
        }
        case SchemeKind::nonordered_indicators: {
            std::string set, pins;
            for (int j = 0; j < n; ++j) {
                if (pt[j] <= t) {
                    sig.push_back(pt[j]);
                    if (!set.empty()) set += ",";
                    set += std::to_string(j + 1);
                    if (!pins.empty()) pins += ",";
                    pins += format_double(pt[j]);
                } else {
                    sig.push_back(kAlive);
                }
            }
            os << "set={" << set << "}";
            if (!pins.empty()) os << ";pins=" << pins;
            break;
        }
        case SchemeKind::marked_counting: {
            int i = 0;
            while (i < n && pt[i] <= t) ++i;
            sig.push_back(double(i));
            os << "count=" << i;
            if (i > 0) os << ";pins=";
            for (int j = 0; j < i; ++j) {
                sig.push_back(pt[j]);
                sig.push_back(pt[n + j]);
                os << "(" << format_double(pt[j]) << ","
                   << format_double(pt[n + j]) << ")";
            }
            break;
        }
    }
    label = os.str();
}

}  // namespace

ObservationScheme ObservationScheme::parse(const std::string& name, double t0,
                                           double eps) {
    ObservationScheme s;
    s.t0 = t0;
    s.eps = eps;
    if (name == "initial")
        s.kind = SchemeKind::initial;
    else if (name == "progressive-single")
        s.kind = SchemeKind::progressive_single;
    else if (name == "insider")
        s.kind = SchemeKind::insider;
    else if (name == "advanced")
        s.kind = SchemeKind::advanced;
    else if (name == "delayed")
        s.kind = SchemeKind::delayed;
    else if (name == "ordered-counting")
        s.kind = SchemeKind::ordered_counting;
    else if (name == "nonordered-indicators")
        s.kind = SchemeKind::nonordered_indicators;
    else if (name == "marked-counting")
        s.kind = SchemeKind::marked_counting;
    else
        throw std::invalid_argument("unknown observation scheme: " + name);
    if (s.kind == SchemeKind::insider)
        require(t0 >= 0.0, "insider cut t0 must be nonnegative");
    if (s.kind == SchemeKind::advanced || s.kind == SchemeKind::delayed)
        require(eps > 0.0, "advanced/delayed shift eps must be positive");
    return s;
}

std::string ObservationScheme::name() const {
    switch (kind) {
        case SchemeKind::initial: return "initial";
        case SchemeKind::progressive_single: return "progressive-single";
        case SchemeKind::insider: return "insider";
        case SchemeKind::advanced: return "advanced";
        case SchemeKind::delayed: return "delayed";
        case SchemeKind::ordered_counting: return "ordered-counting";
        case SchemeKind::nonordered_indicators: return "nonordered-indicators";
        case SchemeKind::marked_counting: return "marked-counting";
    }
    return "?";
}

void check_scheme_compatible(const ObservationScheme& scheme, int n,
                             bool ordered, bool marks) {
    switch (scheme.kind) {
        case SchemeKind::initial:
            return;
        case SchemeKind::progressive_single:
        case SchemeKind::insider:
        case SchemeKind::advanced:
        case SchemeKind::delayed:
            require(n == 1 && !marks, "single-default scheme needs n=1");
            return;
        case SchemeKind::ordered_counting:
            require(ordered && !marks, "ordered-counting needs an ordered model");
            return;
        case SchemeKind::nonordered_indicators:
            require(!ordered && !marks,
                    "nonordered-indicators needs a non-ordered model");
            return;
        case SchemeKind::marked_counting:
            require(ordered && marks, "marked-counting needs a marked model");
            return;
    }
}

Partition observation_partition(const ObservationScheme& scheme,
                                const ReferenceMeasure& reference, double t,
                                int n, bool marks) {
    require(reference.is_grid(),
            "observation_partition is defined for finite grids only");
    require(t >= 0.0, "time must be nonnegative");
    const std::size_t want_dim = marks ? std::size_t(2 * n) : std::size_t(n);
    require(reference.dim() == want_dim,
            "grid dimension does not match the model's coordinate count");
    Partition p;
    p.atom_of.resize(reference.size());
    std::map<std::vector<double>, int> index;
    std::vector<double> sig;
    std::string label;
    for (std::size_t k = 0; k < reference.size(); ++k) {
        signature_and_label(scheme, reference.point(k), t, n, sig, label);
        auto [it, fresh] = index.emplace(sig, static_cast<int>(p.atoms.size()));
        if (fresh) {
            p.atoms.emplace_back();
            p.labels.push_back(label);
        }
        p.atom_of[k] = it->second;
        p.atoms[it->second].push_back(k);
    }
    return p;
}

bool refines(const Partition& fine, const Partition& coarse) {
    if (fine.atom_of.size() != coarse.atom_of.size()) return false;
    for (const auto& atom : fine.atoms) {
        for (std::size_t j = 1; j < atom.size(); ++j)
            if (coarse.atom_of[atom[j]] != coarse.atom_of[atom[0]]) return false;
    }
    return true;
}

std::string regime_label(const ObservationScheme& scheme,
                         const std::vector<double>& point, double t, int n,
                         bool marks) {
    (void)marks;
    std::vector<double> sig;
    std::string label;
    signature_and_label(scheme, point, t, n, sig, label);
    return label;
}

}  // namespace mdef
