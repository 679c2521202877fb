#pragma once

#include <string>
#include <vector>

#include "mdef/reference_measure.hpp"

namespace mdef {

// What the secondary observer sees about the outcome by time t.
//
//   initial                 the outcome is known from time 0
//   progressive_single      one default indicator, revealed at default
//   insider                 progressive plus, before t0, the t0-cut
//   advanced                indicators run ahead of calendar time by eps
//   delayed                 indicators lag calendar time by eps
//   ordered_counting        the counting process of an ordered system
//   nonordered_indicators   one indicator per coordinate
//   marked_counting         ordered counting plus the mark at each arrival
enum class SchemeKind {
    initial,
    progressive_single,
    insider,
    advanced,
    delayed,
    ordered_counting,
    nonordered_indicators,
    marked_counting,
};

struct ObservationScheme {
    SchemeKind kind = SchemeKind::progressive_single;
    double t0 = 0.0;   // insider cut
    double eps = 0.0;  // advanced / delayed shift

    static ObservationScheme parse(const std::string& name, double t0 = 0.0,
                                   double eps = 0.0);
    std::string name() const;
};

// Compatibility with a model of n coordinates (throws when incompatible).
void check_scheme_compatible(const ObservationScheme& scheme, int n,
                             bool ordered, bool marks);

// Partition of the grid points of E into observation atoms at time t.
// atom_of[k] is the atom index of grid point k; atoms are ordered by their
// smallest member, so the layout is deterministic.
struct Partition {
    std::vector<int> atom_of;
    std::vector<std::vector<std::size_t>> atoms;
    std::vector<std::string> labels;  // canonical regime descriptor per atom
};

Partition observation_partition(const ObservationScheme& scheme,
                                const ReferenceMeasure& reference, double t,
                                int n, bool marks);

// True when partition `fine` refines `coarse` (every fine atom sits inside
// one coarse atom).
bool refines(const Partition& fine, const Partition& coarse);

// Regime descriptor of a single point under a scheme at time t, matching the
// labels produced by observation_partition.
std::string regime_label(const ObservationScheme& scheme,
                         const std::vector<double>& point, double t, int n,
                         bool marks);

}  // namespace mdef
