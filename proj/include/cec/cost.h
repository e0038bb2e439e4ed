#ifndef CEC_COST_H
#define CEC_COST_H

#include <string>
#include <string_view>

namespace cec {

enum class CostKind {
  kMM1,       // F / (C - F), defined for 0 <= F < C
  kExpRatio,  // exp(a * F / C)
};

// Convex increasing link cost D(F, C). The same model applies to every link
// of an instance; the capacity is supplied per call.
struct LinkCostModel {
  CostKind kind = CostKind::kExpRatio;
  double coeff = 1.0;  // a, used by kExpRatio only

  static LinkCostModel mm1() { return {CostKind::kMM1, 1.0}; }
  static LinkCostModel exp_ratio(double a = 1.0) {
    return {CostKind::kExpRatio, a};
  }

  // Throws CapacityExceeded (with the given link id) for M/M/1 at F >= C and
  // InvalidArgument for negative flow.
  double value(double flow, double capacity, int link = -1) const;
  double derivative(double flow, double capacity, int link = -1) const;
  double second_derivative(double flow, double capacity, int link = -1) const;

  // True when F lies in the open domain of the cost function.
  bool in_domain(double flow, double capacity) const;
};

LinkCostModel parse_cost_model(std::string_view kind, double coeff);
std::string to_string(const LinkCostModel& model);

}  // namespace cec

#endif  // CEC_COST_H
