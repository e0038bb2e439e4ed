#include "cec/cost.h"

#include <cmath>
#include <sstream>

#include "cec/errors.h"

namespace cec {

CapacityExceeded::CapacityExceeded(int link, double flow, double capacity)
    : Error([&] {
        std::ostringstream msg;
        msg << "capacity exceeded on link " << link << ": F=" << flow
            << " >= C=" << capacity;
        return msg.str();
      }()),
      link_(link),
      flow_(flow),
      capacity_(capacity) {}

namespace {

void CheckDomain(const LinkCostModel& model, double flow, double capacity,
                 int link) {
  if (!(flow >= 0.0)) {
    // Round-off from propagation can leave -1e-17 style values.
    if (flow > -1e-12) return;
    throw InvalidArgument("negative flow on link " + std::to_string(link));
  }
  if (model.kind == CostKind::kMM1 && !(flow < capacity)) {
    throw CapacityExceeded(link, flow, capacity);
  }
}

}  // namespace

bool LinkCostModel::in_domain(double flow, double capacity) const {
  if (!(flow > -1e-12)) return false;
  return kind != CostKind::kMM1 || flow < capacity;
}

double LinkCostModel::value(double flow, double capacity, int link) const {
  CheckDomain(*this, flow, capacity, link);
  flow = std::max(flow, 0.0);
  switch (kind) {
    case CostKind::kMM1:
      return flow / (capacity - flow);
    case CostKind::kExpRatio:
      return std::exp(coeff * flow / capacity);
  }
  return 0.0;
}

double LinkCostModel::derivative(double flow, double capacity, int link) const {
  CheckDomain(*this, flow, capacity, link);
  flow = std::max(flow, 0.0);
  switch (kind) {
    case CostKind::kMM1: {
      double slack = capacity - flow;
      return capacity / (slack * slack);
    }
    case CostKind::kExpRatio:
      return coeff / capacity * std::exp(coeff * flow / capacity);
  }
  return 0.0;
}

double LinkCostModel::second_derivative(double flow, double capacity,
                                        int link) const {
  CheckDomain(*this, flow, capacity, link);
  flow = std::max(flow, 0.0);
  switch (kind) {
    case CostKind::kMM1: {
      double slack = capacity - flow;
      return 2.0 * capacity / (slack * slack * slack);
    }
    case CostKind::kExpRatio: {
      double r = coeff / capacity;
      return r * r * std::exp(coeff * flow / capacity);
    }
  }
  return 0.0;
}

LinkCostModel parse_cost_model(std::string_view kind, double coeff) {
  if (kind == "exp") {
    if (!(coeff > 0.0)) throw InvalidArgument("cost_coeff must be positive");
    return LinkCostModel::exp_ratio(coeff);
  }
  if (kind == "mm1") return LinkCostModel::mm1();
  throw InvalidArgument("unknown cost kind: " + std::string(kind));
}

std::string to_string(const LinkCostModel& model) {
  if (model.kind == CostKind::kMM1) return "mm1";
  std::ostringstream out;
  out << "exp(a=" << model.coeff << ")";
  return out.str();
}

}  // namespace cec
