#pragma once

#include <cstddef>
#include <vector>

namespace mdef {

enum class ReferenceKind { finite_grid, lebesgue_truncated };

// Support of the outcome space E.  Either a finite weighted grid of points
// (each point is a coordinate vector; with marks, times first then marks),
// or Lebesgue measure truncated at u_max with the analytic tail of a
// parametric density folded into the last cell.
class ReferenceMeasure {
  public:
    static ReferenceMeasure finite_grid(std::vector<std::vector<double>> points,
                                        std::vector<double> weights);
    static ReferenceMeasure lebesgue_truncated(double u_max, int quad_order = 16);

    ReferenceKind kind() const { return kind_; }
    bool is_grid() const { return kind_ == ReferenceKind::finite_grid; }

    // grid accessors
    std::size_t size() const { return points_.size(); }
    const std::vector<double>& point(std::size_t k) const { return points_[k]; }
    double weight(std::size_t k) const { return weights_[k]; }
    std::size_t dim() const { return points_.empty() ? 0 : points_[0].size(); }

    // truncation accessors
    double u_max() const { return u_max_; }
    int quad_order() const { return quad_order_; }

  private:
    ReferenceMeasure() = default;

    ReferenceKind kind_ = ReferenceKind::finite_grid;
    std::vector<std::vector<double>> points_;
    std::vector<double> weights_;
    double u_max_ = 0.0;
    int quad_order_ = 16;
};

}  // namespace mdef
